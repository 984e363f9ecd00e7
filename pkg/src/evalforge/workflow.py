"""Phase-gated state machine and the multi-year evaluation-cycle planner.

One evaluation project advances through nine ordered phases; each transition
requires its gate evidence and is appended to an immutable audit log that can
replay the state. The planner assigns disciplines to years under a per-year
capacity and blackout cells, and proves infeasibility with a conflicting
subset of disciplines.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Callable, Iterable, Mapping, Sequence

from evalforge.errors import GateUnsatisfied, Infeasible, PhaseViolation
from evalforge.model.store import ProjectStore


class Phase(enum.IntEnum):
    START_UP = 0
    INTRO_MEETING = 1
    PANEL_COMPOSITION = 2
    DOSSIER_COMPILATION = 3
    FORMS_OVERVIEW = 4
    EVALUATION_MEETING = 5
    REPORTS = 6
    DEBRIEFING = 7
    COUNCIL_REPORT = 8


PHASE_LABELS: dict[Phase, str] = {
    Phase.START_UP: "P0 Start-up",
    Phase.INTRO_MEETING: "P1 Introductory meeting",
    Phase.PANEL_COMPOSITION: "P2 Panel composition",
    Phase.DOSSIER_COMPILATION: "P3 Dossier compilation",
    Phase.FORMS_OVERVIEW: "P4 Forms overview",
    Phase.EVALUATION_MEETING: "P5 Evaluation meeting",
    Phase.REPORTS: "P6 Reports",
    Phase.DEBRIEFING: "P7 Debriefing",
    Phase.COUNCIL_REPORT: "P8 Council report",
}

#: Target duration of one evaluation project.
ONE_YEAR = timedelta(days=365)


@dataclass(frozen=True)
class GateEvidence:
    """Facts the gates inspect; gates themselves are pure predicates."""

    artifacts: frozenset[str] = frozenset()
    panel_errors: int | None = None
    dossiers_complete: Mapping[str, bool] = field(default_factory=dict)
    forms_returned: Mapping[str, int] = field(default_factory=dict)
    lead_form_returned: Mapping[str, bool] = field(default_factory=dict)
    reports_approved: bool = False
    debrief_acks: Mapping[str, bool] = field(default_factory=dict)
    reaction_window_expired: bool = False
    team_ids: tuple[str, ...] = ()


GateCheck = Callable[[GateEvidence], list[str]]


def _needs_artifact(kind: str) -> GateCheck:
    def check(evidence: GateEvidence) -> list[str]:
        return [] if kind in evidence.artifacts else [f"artifact:{kind}"]

    return check


def _panel_accepted(evidence: GateEvidence) -> list[str]:
    if evidence.panel_errors is None:
        return ["panel_report"]
    if evidence.panel_errors > 0:
        return [f"panel_report:{evidence.panel_errors}_errors"]
    return []


def _dossiers_complete(evidence: GateEvidence) -> list[str]:
    return [
        f"dossier:{team}"
        for team in evidence.team_ids
        if not evidence.dossiers_complete.get(team, False)
    ]


def _forms_in(evidence: GateEvidence) -> list[str]:
    missing = []
    for team in evidence.team_ids:
        if evidence.forms_returned.get(team, 0) < 1:
            missing.append(f"form:{team}")
        if not evidence.lead_form_returned.get(team, False):
            missing.append(f"lead_form:{team}")
    return missing


def _reports_approved(evidence: GateEvidence) -> list[str]:
    return [] if evidence.reports_approved else ["reports_approved"]


def _debriefed(evidence: GateEvidence) -> list[str]:
    if evidence.reaction_window_expired:
        return []
    return [
        f"debrief_ack:{team}"
        for team in evidence.team_ids
        if not evidence.debrief_acks.get(team, False)
    ]


#: Gate table: evidence required to *enter* each phase. Institutions can
#: pass an adapted table to :func:`advance`.
DEFAULT_GATES: dict[Phase, GateCheck] = {
    Phase.INTRO_MEETING: _needs_artifact("intro_documents"),
    Phase.PANEL_COMPOSITION: _panel_accepted,
    Phase.DOSSIER_COMPILATION: _needs_artifact("invitations"),
    Phase.FORMS_OVERVIEW: _dossiers_complete,
    Phase.EVALUATION_MEETING: _forms_in,
    Phase.REPORTS: _needs_artifact("meeting_minutes"),
    Phase.DEBRIEFING: _reports_approved,
    Phase.COUNCIL_REPORT: _debriefed,
}


@dataclass(frozen=True)
class Transition:
    from_phase: Phase
    to_phase: Phase
    at: date
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class WorkflowState:
    """Phase of one evaluation project with its transition history."""

    phase: Phase = Phase.START_UP
    started_at: date = date(2001, 1, 1)
    deadline: date | None = None
    audit_log: tuple[Transition, ...] = ()

    def __post_init__(self):
        if self.deadline is None:
            object.__setattr__(self, "deadline", self.started_at + ONE_YEAR)
        if len(self.audit_log) != int(self.phase):
            raise ValueError(
                f"audit log has {len(self.audit_log)} transitions but the "
                f"phase index is {int(self.phase)}"
            )

    @property
    def label(self) -> str:
        return PHASE_LABELS[self.phase]


def advance(
    state: WorkflowState,
    evidence: GateEvidence,
    *,
    to: Phase | None = None,
    at: date | None = None,
    gates: Mapping[Phase, GateCheck] = DEFAULT_GATES,
) -> WorkflowState:
    """Advance exactly one phase, provided the next gate is satisfied.

    Requesting any other target raises PhaseViolation; missing evidence
    raises GateUnsatisfied listing what is absent. Exceeding the one-year
    time frame is recorded as a warning on the transition, never a stop.
    """
    if state.phase is Phase.COUNCIL_REPORT:
        raise PhaseViolation("the evaluation project is already concluded")
    next_phase = Phase(int(state.phase) + 1)
    if to is not None and to is not next_phase:
        raise PhaseViolation(
            f"cannot move from {PHASE_LABELS[state.phase]} to {PHASE_LABELS[to]}; "
            f"next is {PHASE_LABELS[next_phase]}"
        )
    missing = gates[next_phase](evidence)
    if missing:
        raise GateUnsatisfied(missing)

    at = at or state.started_at
    transition_warnings: list[str] = []
    if state.deadline is not None and at > state.deadline:
        transition_warnings.append(
            f"transition on {at.isoformat()} exceeds the one-year time frame "
            f"(deadline {state.deadline.isoformat()})"
        )
    transition = Transition(
        from_phase=state.phase,
        to_phase=next_phase,
        at=at,
        warnings=tuple(transition_warnings),
    )
    return replace(
        state, phase=next_phase, audit_log=state.audit_log + (transition,)
    )


def replay(
    transitions: Sequence[Transition],
    started_at: date,
    deadline: date | None = None,
) -> WorkflowState:
    """Reconstruct a workflow state from its audit log."""
    phase = Phase.START_UP
    for index, transition in enumerate(transitions):
        if transition.from_phase is not phase or int(transition.to_phase) != index + 1:
            raise PhaseViolation(
                f"audit log entry {index} does not continue from "
                f"{PHASE_LABELS[phase]}"
            )
        phase = transition.to_phase
    return WorkflowState(
        phase=phase,
        started_at=started_at,
        deadline=deadline,
        audit_log=tuple(transitions),
    )


# -- persistence ---------------------------------------------------------------

def state_to_doc(state: WorkflowState) -> dict:
    return {
        "phase": int(state.phase),
        "started_at": state.started_at.isoformat(),
        "deadline": state.deadline.isoformat() if state.deadline else None,
        "audit_log": [
            {
                "from": int(tr.from_phase),
                "to": int(tr.to_phase),
                "at": tr.at.isoformat(),
                "warnings": list(tr.warnings),
            }
            for tr in state.audit_log
        ],
    }


def state_from_doc(doc: dict) -> WorkflowState:
    return WorkflowState(
        phase=Phase(doc["phase"]),
        started_at=date.fromisoformat(doc["started_at"]),
        deadline=date.fromisoformat(doc["deadline"]) if doc.get("deadline") else None,
        audit_log=tuple(
            Transition(
                from_phase=Phase(tr["from"]),
                to_phase=Phase(tr["to"]),
                at=date.fromisoformat(tr["at"]),
                warnings=tuple(tr.get("warnings", ())),
            )
            for tr in doc.get("audit_log", ())
        ),
    )


def _scope_name(discipline_id: str | None) -> str:
    return f"workflow_{discipline_id}" if discipline_id else "workflow"


def load_workflow(
    store: ProjectStore, discipline_id: str | None = None
) -> WorkflowState:
    doc = store.load_state_doc(_scope_name(discipline_id))
    if doc is None and discipline_id is not None:
        doc = store.load_state_doc(_scope_name(None))
    if doc is None:
        return WorkflowState()
    return state_from_doc(doc)


def save_workflow(
    store: ProjectStore, state: WorkflowState, discipline_id: str | None = None
) -> None:
    store.save_state_doc(_scope_name(discipline_id), state_to_doc(state))


def gate_evidence(
    store: ProjectStore, discipline_id: str | None = None
) -> GateEvidence:
    """Assemble gate evidence from what the project store holds."""
    from evalforge.model import validate_form
    from evalforge.panel import report_from_doc

    teams = store.load_teams(discipline_id)
    team_ids = tuple(sorted(team.id for team in teams))
    lead_by_team = {team.id: team.lead_expert_id for team in teams}

    artifact_doc = store.load_state_doc("artifacts", default={}) or {}
    scope = discipline_id or ""
    artifacts = frozenset(artifact_doc.get(scope, ()))

    report_doc = store.load_state_doc(
        f"panel_report_{discipline_id}" if discipline_id else "panel_report"
    )
    panel_errors = None
    if report_doc is not None:
        panel_errors = len(report_from_doc(report_doc).errors)

    from evalforge.errors import StoreCorrupt

    dossiers_complete: dict[str, bool] = {}
    for team_id in team_ids:
        if not (store.root / "state" / "files" / f"{team_id}.json").exists():
            dossiers_complete[team_id] = False
            continue
        try:
            dossiers_complete[team_id] = store.load_file(team_id).complete
        except StoreCorrupt:
            dossiers_complete[team_id] = False

    forms_returned: dict[str, int] = {team_id: 0 for team_id in team_ids}
    lead_form_returned: dict[str, bool] = {team_id: False for team_id in team_ids}
    for form in store.load_forms():
        if form.team_id not in forms_returned or validate_form(form):
            continue
        forms_returned[form.team_id] += 1
        if form.expert_id == lead_by_team.get(form.team_id):
            lead_form_returned[form.team_id] = True

    debrief_doc = store.load_state_doc("debriefs", default={}) or {}
    approval_doc = store.load_state_doc("approvals", default={}) or {}
    return GateEvidence(
        artifacts=artifacts,
        panel_errors=panel_errors,
        dossiers_complete=dossiers_complete,
        forms_returned=forms_returned,
        lead_form_returned=lead_form_returned,
        reports_approved=bool(approval_doc.get(scope, False)),
        debrief_acks={t: bool(debrief_doc.get(t, False)) for t in team_ids},
        reaction_window_expired=bool(
            (store.load_state_doc("reaction_window", default={}) or {}).get(scope, False)
        ),
        team_ids=team_ids,
    )


# -- cycle planning ---------------------------------------------------------------

@dataclass(frozen=True)
class CyclePlan:
    """Assignment of each discipline to one year of the evaluation cycle."""

    assignments: dict[str, int]
    horizon: int = 8
    capacity: int = 2
    blackouts: frozenset[tuple[str, int]] = frozenset()


def verify_plan(
    plan: CyclePlan, disciplines: Sequence[str]
) -> list[str]:
    """Independent check of a plan against the cycle constraints."""
    problems: list[str] = []
    for discipline in disciplines:
        if discipline not in plan.assignments:
            problems.append(f"{discipline} is not scheduled")
    for discipline, year in plan.assignments.items():
        if discipline not in disciplines:
            problems.append(f"{discipline} is not a known discipline")
        if not 0 <= year < plan.horizon:
            problems.append(f"{discipline} scheduled outside the horizon ({year})")
        if (discipline, year) in plan.blackouts:
            problems.append(f"{discipline} scheduled in blackout year {year}")
    per_year: dict[int, int] = {}
    for year in plan.assignments.values():
        per_year[year] = per_year.get(year, 0) + 1
    for year, count in sorted(per_year.items()):
        if count > plan.capacity:
            problems.append(f"year {year} holds {count} > capacity {plan.capacity}")
    return problems


def _allowed_years(
    discipline: str, horizon: int, blackouts: frozenset[tuple[str, int]]
) -> list[int]:
    return [y for y in range(horizon) if (discipline, y) not in blackouts]


def _conflict_witness(
    disciplines: Sequence[str],
    horizon: int,
    capacity: int,
    blackouts: frozenset[tuple[str, int]],
) -> tuple[str, ...]:
    """A subset of disciplines whose allowed years cannot hold them all.

    Found from a maximum assignment: any unassigned discipline seeds an
    alternating search whose reachable set violates the counting condition;
    a greedy pass then drops members that are not needed for the violation.
    """
    slots = [
        (year, copy)
        for year in range(horizon)
        for copy in range(capacity)
    ]
    slot_index = {slot: i for i, slot in enumerate(slots)}
    allowed = {
        d: [slot_index[(y, c)] for y in _allowed_years(d, horizon, blackouts)
            for c in range(capacity)]
        for d in disciplines
    }

    # Hopcroft-Karp is overkill at this scale; simple augmenting paths.
    match_of_slot: dict[int, str] = {}

    def try_assign(discipline: str, visited: set[int]) -> bool:
        for slot in allowed[discipline]:
            if slot in visited:
                continue
            visited.add(slot)
            holder = match_of_slot.get(slot)
            if holder is None or try_assign(holder, visited):
                match_of_slot[slot] = discipline
                return True
        return False

    unmatched = [d for d in disciplines if not try_assign(d, set())]
    if not unmatched:
        return ()

    seed = unmatched[0]
    reachable = {seed}
    frontier = [seed]
    reachable_slots: set[int] = set()
    while frontier:
        discipline = frontier.pop()
        for slot in allowed[discipline]:
            if slot in reachable_slots:
                continue
            reachable_slots.add(slot)
            holder = match_of_slot.get(slot)
            if holder is not None and holder not in reachable:
                reachable.add(holder)
                frontier.append(holder)

    def violates(subset: Sequence[str]) -> bool:
        years = {y for d in subset for y in _allowed_years(d, horizon, blackouts)}
        return len(years) * capacity < len(subset)

    witness = [d for d in disciplines if d in reachable]
    assert violates(witness)
    for discipline in list(witness):
        trimmed = [d for d in witness if d != discipline]
        if trimmed and violates(trimmed):
            witness = trimmed
    return tuple(witness)


def plan_cycle(
    disciplines: Sequence[str],
    horizon: int = 8,
    capacity: int = 2,
    blackouts: Iterable[tuple[str, int]] = (),
) -> CyclePlan:
    """Assign every discipline to a year, at most ``capacity`` per year.

    Deterministic backtracking with a fewest-options-first ordering; an
    infeasible instance raises Infeasible carrying a minimal conflicting
    subset that any checker can verify by counting.
    """
    blackout_set = frozenset((str(d), int(y)) for d, y in blackouts)
    disciplines = list(disciplines)
    if len(set(disciplines)) != len(disciplines):
        raise ValueError("duplicate discipline ids")
    if len(disciplines) > horizon * capacity:
        raise Infeasible(_conflict_witness(disciplines, horizon, capacity, blackout_set))

    order = sorted(
        disciplines,
        key=lambda d: (len(_allowed_years(d, horizon, blackout_set)),
                       disciplines.index(d)),
    )
    load = [0] * horizon
    assignment: dict[str, int] = {}

    def backtrack(index: int) -> bool:
        if index == len(order):
            return True
        discipline = order[index]
        for year in _allowed_years(discipline, horizon, blackout_set):
            if load[year] >= capacity:
                continue
            load[year] += 1
            assignment[discipline] = year
            if backtrack(index + 1):
                return True
            load[year] -= 1
            del assignment[discipline]
        return False

    if not backtrack(0):
        raise Infeasible(_conflict_witness(disciplines, horizon, capacity, blackout_set))
    plan = CyclePlan(
        assignments=dict(sorted(assignment.items())),
        horizon=horizon,
        capacity=capacity,
        blackouts=blackout_set,
    )
    assert not verify_plan(plan, disciplines)
    return plan
