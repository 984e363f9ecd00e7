"""Domain error hierarchy shared by all evalforge modules.

Every error that a CLI user can trigger derives from EvalforgeError so the
entry point can print the error name and exit with code 1 instead of dumping
a traceback.
"""

from __future__ import annotations


class EvalforgeError(Exception):
    """Base class for all domain errors."""


class StoreCorrupt(EvalforgeError):
    """A project store document is unreadable or violates its invariants."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class IntegrityError(EvalforgeError):
    """A reference (team, expert, discipline) does not resolve."""


class PhaseViolation(EvalforgeError):
    """An operation was requested in a workflow phase that forbids it."""


class GateUnsatisfied(EvalforgeError):
    """A phase transition was requested without its gate evidence."""

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__("missing gate evidence: " + ", ".join(self.missing))


class JustificationRequired(EvalforgeError):
    """Rejecting an expert requires a non-empty justification."""


class UnknownSlot(EvalforgeError):
    """A dossier delta targets a section slot that does not exist."""


class DeletionForbidden(EvalforgeError):
    """A dossier delta attempted to remove store-derived records."""


class CoreLimitExceeded(EvalforgeError):
    """More than five core publications were supplied."""


class CoreOutsideOverview(EvalforgeError):
    """A core publication is not listed in the publications overview."""


class IncompleteDossier(EvalforgeError):
    """Rendering was requested for a file with empty slots."""

    def __init__(self, empty_slots: list[str]):
        self.empty_slots = list(empty_slots)
        super().__init__("empty slots: " + ", ".join(self.empty_slots))


class NoForms(EvalforgeError):
    """Aggregation was requested with no returned forms."""


class InvalidCategory(EvalforgeError):
    """A value falls outside a closed enumeration."""


class DegenerateVariance(EvalforgeError):
    """Correlation is undefined because one input has zero variance."""


class TooFewPairs(EvalforgeError):
    """Fewer than three paired observations were supplied."""


class NoPublications(EvalforgeError):
    """Citation indicators are undefined for an empty publication list."""


class MissingBaseline(EvalforgeError):
    """A publication's field has no baseline citation rate."""

    def __init__(self, field: str):
        self.field = field
        super().__init__(f"no baseline for field {field!r}")


class Infeasible(EvalforgeError):
    """No cycle plan satisfies the capacity and blackout constraints."""

    def __init__(self, conflict: tuple[str, ...]):
        self.conflict = tuple(conflict)
        super().__init__("conflicting disciplines: " + ", ".join(self.conflict))


class ConfigError(EvalforgeError):
    """A simulation or project configuration is invalid."""


class DraftWarning(UserWarning):
    """Non-fatal finding while drafting an evaluation file."""
