"""Panel lifecycle: suggestions, conflict screening, composition checks.

Screening is monotone by construction: a new conflict link can only keep a
verdict or push it toward disqualification, never toward clear. Composition
checks produce findings as values; a report with any error-severity finding
is not accepted by the workflow gate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from evalforge.errors import IntegrityError, JustificationRequired, PhaseViolation
from evalforge.model import (
    Discipline,
    Expert,
    ExpertStatus,
    Team,
    transition_expert,
)
from evalforge.model.types import utcnow


class LinkKind(enum.Enum):
    SAME_INSTITUTION = "same_institution"
    COPUBLICATION = "copublication"
    COPROJECT = "coproject"
    SUPERVISION = "supervision"
    OTHER_DECLARED = "other_declared"


class Ruling(enum.Enum):
    CLEARED = "cleared"
    DISQUALIFIED = "disqualified"
    PENDING = "pending"


#: Years a connection stays material before the evaluation window opens.
LOOKBACK_YEARS = 3


@dataclass(frozen=True)
class ConflictLink:
    """One verified connection between an expert and a team or institution."""

    expert_id: str
    target: str
    kind: LinkKind
    evidence: str = ""
    window: tuple[int, int] | None = None
    ruling: Ruling = Ruling.PENDING

    def material_in(self, evaluation_window: tuple[int, int]) -> bool:
        """True when the link overlaps the screening window.

        The screening window extends the evaluation window three years back;
        an undated link is always material.
        """
        if self.window is None:
            return True
        start, end = evaluation_window
        return self.window[1] >= start - LOOKBACK_YEARS and self.window[0] <= end


class Verdict(enum.Enum):
    CLEAR = "clear"
    FLAGGED = "flagged"
    DISQUALIFIED = "disqualified"


@dataclass(frozen=True)
class ScreeningResult:
    expert_id: str
    verdict: Verdict
    pending: tuple[ConflictLink, ...] = ()
    reason: str = ""

    @property
    def is_clear(self) -> bool:
        return self.verdict is Verdict.CLEAR


def screen_expert(
    expert: Expert,
    links: Iterable[ConflictLink],
    *,
    institution: str,
    window: tuple[int, int],
    known_team_ids: Iterable[str] | None = None,
) -> ScreeningResult:
    """Screen one suggested or invited expert against the conflict evidence.

    Affiliation with the evaluated institution disqualifies unconditionally.
    Material co-publication, co-project, supervision or declared links are
    flagged for a coordinator ruling and are never cleared automatically.
    """
    if expert.status not in (ExpertStatus.SUGGESTED, ExpertStatus.INVITED):
        raise PhaseViolation(
            f"screening applies to suggested or invited experts, "
            f"not {expert.status.value}"
        )
    if known_team_ids is not None:
        known = set(known_team_ids) | {institution}
        for link in links:
            if link.expert_id == expert.id and link.target not in known:
                raise IntegrityError(
                    f"conflict link for {expert.id} references unknown "
                    f"target {link.target!r}"
                )

    if expert.affiliation.strip().lower() == institution.strip().lower():
        return ScreeningResult(
            expert_id=expert.id,
            verdict=Verdict.DISQUALIFIED,
            reason="affiliated with the evaluated institution",
        )

    pending: list[ConflictLink] = []
    for link in sorted(
        (l for l in links if l.expert_id == expert.id),
        key=lambda l: (l.kind.value, l.target),
    ):
        if link.kind is LinkKind.SAME_INSTITUTION:
            return ScreeningResult(
                expert_id=expert.id,
                verdict=Verdict.DISQUALIFIED,
                reason=f"same-institution link to {link.target}",
            )
        if not link.material_in(window):
            continue
        if link.ruling is Ruling.DISQUALIFIED:
            return ScreeningResult(
                expert_id=expert.id,
                verdict=Verdict.DISQUALIFIED,
                reason=f"{link.kind.value} with {link.target}, ruled disqualifying",
            )
        if link.ruling is Ruling.PENDING:
            pending.append(link)

    if pending:
        return ScreeningResult(
            expert_id=expert.id, verdict=Verdict.FLAGGED, pending=tuple(pending)
        )
    return ScreeningResult(expert_id=expert.id, verdict=Verdict.CLEAR)


@dataclass(frozen=True)
class AuditEvent:
    """Immutable record of a coordinator or team decision."""

    action: str
    expert_id: str
    team_id: str
    justification: str
    at: datetime


def reject_expert(
    expert: Expert, team: Team, justification: str, at: datetime | None = None
) -> tuple[Expert, AuditEvent]:
    """Reject a suggested expert on a team's demonstrated objection.

    Returns the updated expert and the audit event the caller must persist;
    the justification is part of the permanent record.
    """
    if not justification.strip():
        raise JustificationRequired(
            "teams must demonstrate why an expert cannot be objective"
        )
    rejected = transition_expert(expert, ExpertStatus.REJECTED)
    event = AuditEvent(
        action="reject_expert",
        expert_id=expert.id,
        team_id=team.id,
        justification=justification,
        at=at or utcnow(),
    )
    return rejected, event


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    message: str
    subject: str = ""


@dataclass(frozen=True)
class PanelReport:
    panel: tuple[str, ...]
    findings: tuple[Finding, ...]

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.WARNING)

    @property
    def accepted(self) -> bool:
        return not self.errors


def _size_band(n_teams: int) -> tuple[int, int]:
    return math.ceil(0.7 * n_teams), math.ceil(1.3 * n_teams)


def validate_panel(
    panel: Sequence[Expert],
    teams: Sequence[Team],
    discipline: Discipline,
    *,
    home_country: str = "BE",
    screenings: Mapping[str, ScreeningResult] | None = None,
    assignments: Mapping[str, Sequence[str]] | None = None,
) -> PanelReport:
    """Check a confirmed panel against the composition precautions.

    Errors: a member with an unresolved or disqualifying screening, a team
    whose fields no member's domains cover, and (unless the discipline
    requires national experts) foreign members not forming a strict
    majority. Warnings: panel size outside 70-130% of the team count and
    fewer than two countries represented. Ordering of the inputs never
    changes the findings.

    With ``assignments`` (per-team panels), field coverage is checked per
    team against the experts assigned to it.
    """
    findings: list[Finding] = []
    members: list[Expert] = []
    for expert in sorted(panel, key=lambda e: e.id):
        if expert.status is not ExpertStatus.CONFIRMED:
            findings.append(
                Finding(Severity.ERROR, "not_confirmed",
                        f"{expert.id} is {expert.status.value}, not confirmed",
                        subject=expert.id)
            )
            continue
        screening = (screenings or {}).get(expert.id)
        if screening is not None and not screening.is_clear:
            findings.append(
                Finding(Severity.ERROR, "unresolved_screening",
                        f"{expert.id} screening verdict is {screening.verdict.value}",
                        subject=expert.id)
            )
            continue
        members.append(expert)

    member_ids = {expert.id for expert in members}
    ordered_teams = sorted(teams, key=lambda team: team.id)
    for team in ordered_teams:
        if assignments is not None:
            covering = [e for e in members if e.id in set(assignments.get(team.id, ()))]
        else:
            covering = members
        domains = {domain for expert in covering for domain in expert.domains}
        uncovered = [f for f in team.fields if f not in domains]
        if uncovered:
            findings.append(
                Finding(Severity.ERROR, "field_not_covered",
                        f"team {team.id}: no expert covers {', '.join(uncovered)}",
                        subject=team.id)
            )

    n_teams = len(teams)
    if n_teams:
        low, high = _size_band(n_teams)
        if not low <= len(members) <= high:
            findings.append(
                Finding(Severity.WARNING, "panel_size",
                        f"{len(members)} experts for {n_teams} teams "
                        f"(expected {low}..{high})")
            )

    foreign = [e for e in members if e.country.upper() != home_country.upper()]
    if members and len(foreign) * 2 <= len(members):
        severity = (
            Severity.WARNING if discipline.requires_national_experts else Severity.ERROR
        )
        findings.append(
            Finding(severity, "not_primarily_foreign",
                    f"only {len(foreign)} of {len(members)} experts are foreign")
        )
    countries = {expert.country.upper() for expert in members}
    if members and len(countries) < 2:
        findings.append(
            Finding(Severity.WARNING, "single_country",
                    "fewer than 2 countries represented")
        )

    return PanelReport(panel=tuple(sorted(member_ids)), findings=tuple(findings))


# -- persistence helpers ------------------------------------------------------

def link_to_doc(link: ConflictLink) -> dict:
    return {
        "expert_id": link.expert_id,
        "target": link.target,
        "kind": link.kind.value,
        "evidence": link.evidence,
        "window": list(link.window) if link.window else None,
        "ruling": link.ruling.value,
    }


def link_from_doc(doc: dict) -> ConflictLink:
    window = doc.get("window")
    return ConflictLink(
        expert_id=doc["expert_id"],
        target=doc["target"],
        kind=LinkKind(doc["kind"]),
        evidence=doc.get("evidence", ""),
        window=(int(window[0]), int(window[1])) if window else None,
        ruling=Ruling(doc.get("ruling", "pending")),
    )


def report_to_doc(report: PanelReport) -> dict:
    return {
        "panel": list(report.panel),
        "findings": [
            {
                "severity": f.severity.value,
                "code": f.code,
                "message": f.message,
                "subject": f.subject,
            }
            for f in report.findings
        ],
    }


def report_from_doc(doc: dict) -> PanelReport:
    return PanelReport(
        panel=tuple(doc.get("panel", ())),
        findings=tuple(
            Finding(Severity(f["severity"]), f["code"], f["message"], f.get("subject", ""))
            for f in doc.get("findings", ())
        ),
    )
