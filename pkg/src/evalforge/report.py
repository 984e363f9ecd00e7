"""Two-track reporting: public global report, confidential team reports.

The separation is structural: the global renderer consumes
:class:`GlobalReportInputs`, a type with no place for per-team scores, ranks
or comments, and it formats nothing but discipline-level aggregates (integer
percentages and counts). Team reports carry one team's data only, with every
comment attributed to the panel as a whole.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from evalforge.analytics import Histogram, histogram
from evalforge.errors import IntegrityError, PhaseViolation
from evalforge.model import (
    INDICATOR_LABELS,
    NUMERIC_INDICATORS,
    SCORE_BANDS,
    TEAM_INDICATORS,
    BlindForm,
    Discipline,
    DominantCharacter,
    Indicator,
)
from evalforge.model.store import ProjectStore
from evalforge.scoring import (
    CollectedComments,
    ScoreSummary,
    WeightingPolicy,
    aggregate_team,
    collect_general_comments,
    get_policy,
    rank_discipline,
    round_half_away,
)
from evalforge.workflow import Phase, load_workflow

GLOBAL_SECTIONS: tuple[str, ...] = (
    "I. Context",
    "II. The discipline and its teams",
    "III. Procedure",
    "IV. Conclusions of the experts",
    "V. Further remarks regarding research evaluation",
    "VI. Concluding observations by the coordinator",
)

ADDENDUM_TITLES: tuple[str, ...] = (
    "ADDENDUM 1: Content of the evaluation files",
    "ADDENDUM 2: The evaluation form",
    "ADDENDUM 3: Coordinator and experts",
    "ADDENDUM 4: Short CV's of the coordinator and the experts",
    "ADDENDUM 5: Contact information for the teams",
)

TEAM_COMMENT_SECTIONS: tuple[str, ...] = (
    "Team",
    "Topics & Innovation",
    "Output",
    "Fundamental / Applied / Policy Oriented Research",
    "Planning",
    "Coordination & Collaborations",
    "General Conclusions",
)

#: Fixed caption marker on every numbers section.
INDICATION_MARKER = "only as an indication"

_DOMINANT_LABELS = {
    DominantCharacter.FUNDAMENTAL: "fundamental",
    DominantCharacter.APPLIED: "applied",
    DominantCharacter.POLICY_ORIENTED: "policy oriented",
}


@dataclass(frozen=True)
class GlobalReportInputs:
    """Everything the public report may contain.

    By construction there is no field for per-team summaries, ranks, form
    comments or expert identities; code that renders the global report
    cannot leak what it never receives.
    """

    discipline_name: str
    team_names: tuple[str, ...]
    n_teams: int
    n_experts: int
    n_countries: int
    n_forms: int
    window: tuple[int, int]
    distributions: tuple[Histogram, ...]
    general_comments: CollectedComments
    context_text: str = ""
    further_remarks: str = ""
    concluding_text: str = ""
    addenda: tuple[str, str, str, str, str] = ("", "", "", "", "")


def _percent(fraction: float) -> str:
    return f"{round(fraction * 100):d}%"


def _render_distribution(hist: Histogram) -> list[str]:
    lines = [f"{hist.label} (n={hist.n})"]
    row = "  " + "  ".join(
        f"{score}:{_percent(hist.bins[score])}" for score in range(1, 11)
    )
    lines.append(row)
    if hist.mode is not None:
        lines.append(f"  most frequent score: {hist.mode}")
    return lines


def render_global_document(inputs: GlobalReportInputs) -> str:
    """Render the public report from discipline-level inputs only."""
    lines = [
        f"=== GLOBAL REPORT: {inputs.discipline_name} ===",
        "",
        f"# {GLOBAL_SECTIONS[0]}",
        inputs.context_text or "(provided by the vice-rector for research)",
        "",
        f"# {GLOBAL_SECTIONS[1]}",
        f"The discipline counts {inputs.n_teams} research teams, evaluated over "
        f"{inputs.window[0]}-{inputs.window[1]}.",
    ]
    for name in inputs.team_names:
        lines.append(f"- {name}")
    lines += [
        "",
        f"# {GLOBAL_SECTIONS[2]}",
        f"A panel of {inputs.n_experts} experts from {inputs.n_countries} "
        f"countries reviewed uniform evaluation files; {inputs.n_forms} "
        "evaluation forms were returned before the evaluation meeting.",
        "Ratings were aggregated per team, weighting each rating by the "
        "reviewer's expertise in the team's area.",
        "",
        f"# {GLOBAL_SECTIONS[3]}",
        "Distribution of the returned ratings per indicator "
        "(relative frequencies over the 1-10 scale):",
    ]
    for hist in inputs.distributions:
        lines += _render_distribution(hist)
    if inputs.general_comments.team_level:
        lines.append("")
        lines.append("Generally valid recommendations, by category:")
        for comment in inputs.general_comments.team_level:
            lines.append(f"- [{comment.category}] {comment.text}")
    lines += [
        "",
        f"# {GLOBAL_SECTIONS[4]}",
        inputs.further_remarks or "(none recorded)",
    ]
    for comment in inputs.general_comments.institutional:
        lines.append(f"- [{comment.category}] {comment.text}")
    lines += [
        "",
        f"# {GLOBAL_SECTIONS[5]}",
        inputs.concluding_text or "(provided by the coordinator)",
        "",
    ]
    for title, text in zip(ADDENDUM_TITLES, inputs.addenda):
        lines.append(f"# {title}")
        lines.append(text or "(maintained by the research administration)")
        lines.append("")
    return "\n".join(lines)


def _discipline_forms(store: ProjectStore, discipline_id: str) -> list[BlindForm]:
    team_ids = {team.id for team in store.load_teams(discipline_id)}
    return [
        form for form in store.load_forms_blind() if form.team_id in team_ids
    ]


def _require_phase(store: ProjectStore, discipline_id: str | None) -> None:
    state = load_workflow(store, discipline_id)
    if state.phase < Phase.REPORTS:
        raise PhaseViolation(
            f"reports can be rendered from P6 Reports on; the project is at "
            f"{state.label}"
        )


def build_global_inputs(
    store: ProjectStore, discipline_id: str
) -> GlobalReportInputs:
    """Collect the discipline-level aggregates the public report may show."""
    discipline = store.load_discipline(discipline_id)
    teams = store.load_teams(discipline_id)
    forms = _discipline_forms(store, discipline_id)
    # Panel size and countries come from the stored panel report, not from
    # form attribution; only counts reach the document either way.
    report_doc = store.load_state_doc(f"panel_report_{discipline_id}")
    if report_doc is None:
        report_doc = store.load_state_doc("panel_report") or {"panel": []}
    panel_ids = list(report_doc.get("panel", ()))
    countries = {store.load_expert(expert_id).country for expert_id in panel_ids}
    distributions = tuple(
        histogram(
            [form.scores[ind] for form in forms if ind in form.scores],
            label=INDICATOR_LABELS[ind],
        )
        for ind in NUMERIC_INDICATORS
    )
    texts = store.load_state_doc("report_texts", default={}) or {}
    addenda_texts = texts.get("addenda", ["", "", "", "", ""])
    return GlobalReportInputs(
        discipline_name=discipline.name,
        team_names=tuple(sorted(team.name for team in teams)),
        n_teams=len(teams),
        n_experts=len(experts_involved),
        n_countries=len(countries),
        n_forms=len(forms),
        window=store.config.window,
        distributions=distributions,
        general_comments=collect_general_comments(forms),
        context_text=texts.get("context", ""),
        further_remarks=texts.get("further_remarks", ""),
        concluding_text=texts.get("concluding", ""),
        addenda=tuple((addenda_texts + [""] * 5)[:5]),
    )


def render_global(store: ProjectStore, discipline_id: str) -> str:
    """Render the public discipline report (requires phase P6 or later)."""
    _require_phase(store, discipline_id)
    return render_global_document(build_global_inputs(store, discipline_id))


def _methodology_note(policy: WeightingPolicy) -> str:
    return (
        "Explanation of the calculations: each rating was weighted by the "
        f"reviewer's self-reported expertise using {policy.formula} "
        f"('{policy.name}' weighting); per indicator, the weighted mean "
        "sum(w*score)/sum(w) runs over the reviewers who rated that "
        "indicator. Scores are reported to two decimals."
    )


def render_team_document(
    team_name: str,
    discipline: Discipline,
    summary: ScoreSummary,
    forms: Sequence[BlindForm],
    n_teams: int,
    score_range: tuple[float, float] | None,
    policy: WeightingPolicy,
) -> str:
    """Render one confidential team report from that team's data only."""
    for form in forms:
        if not isinstance(form, BlindForm):
            raise TypeError("team reports are rendered from blinded forms only")
        if form.team_id != summary.team_id:
            raise ValueError("forms of another team passed to a team report")

    lines = [
        f"=== CONFIDENTIAL REPORT: {team_name} ===",
        f"Discipline: {discipline.name}",
        "This report is confidential to the team leader, the dean, the rector "
        "and the vice-rectors.",
        "",
        "# Comments",
        "All advice is formulated by the panel as a whole.",
    ]
    ordered = sorted(
        forms, key=lambda f: (-(f.expertise or 0), sorted(f.comments.items()))
    )
    for section in TEAM_COMMENT_SECTIONS:
        lines.append(f"## {section}")
        texts = []
        for form in ordered:
            for slot, text in sorted(form.comments.items()):
                if slot == section or (
                    section == "General Conclusions"
                    and slot not in TEAM_COMMENT_SECTIONS
                ):
                    texts.append(text)
        for text in texts:
            lines.append(f"- {text} (the panel)")
        if not texts:
            lines.append("(no comments in this section)")
        lines.append("")

    lines.append(f"# Assessment in numbers ({INDICATION_MARKER})")
    lines.append(
        "The scores below are an indication only, showing the team its "
        "position within the discipline; the experts' comments carry the "
        "advice."
    )
    for indicator in TEAM_INDICATORS:
        aggregate = summary.per_indicator.get(indicator)
        if aggregate is None:
            continue
        lines.append(
            f"- {INDICATOR_LABELS[indicator]}: "
            f"{round_half_away(aggregate.weighted_mean):.2f} "
            f"(from {aggregate.n_ratings} ratings)"
        )
    proportions = summary.dominant_proportions()
    if proportions:
        parts = ", ".join(
            f"{_DOMINANT_LABELS[cat]} {_percent(share)}"
            for cat, share in sorted(proportions.items(), key=lambda kv: kv[0].value)
        )
        lines.append(f"- Dominant character of the research: {parts}")
    rank = summary.rank_in_discipline
    if rank is not None:
        rank_str = f"{rank:g}"
        lines.append(f"Position within the discipline: {rank_str} of {n_teams}")
    if score_range is not None:
        lines.append(
            "Overall scores in the discipline range from "
            f"{score_range[0]:.1f} to {score_range[1]:.1f}."
        )
    lines += ["", "# Method", _methodology_note(policy), ""]
    return "\n".join(lines)


def render_team(
    store: ProjectStore,
    team_id: str,
    policy: WeightingPolicy | None = None,
) -> str:
    """Render the confidential report for one team (phase P6 or later)."""
    team_path = store.root / "teams" / f"{team_id}.json"
    if not team_path.exists():
        raise IntegrityError(f"unknown team {team_id}")
    team = store.load_team(team_id)
    _require_phase(store, team.discipline_id)
    policy = policy or get_policy(store.config.weighting_policy)
    discipline = store.load_discipline(team.discipline_id)

    summaries = []
    for sibling in store.load_teams(team.discipline_id):
        forms = store.load_forms_blind(sibling.id)
        if forms:
            summaries.append(aggregate_team(forms, policy))
    ranked = rank_discipline(summaries)
    by_team = {summary.team_id: summary for summary in ranked}
    if team_id not in by_team:
        raise IntegrityError(f"team {team_id} has no returned forms to report on")
    overall = [s.overall_weighted for s in ranked if s.overall_weighted is not None]
    score_range = (min(overall), max(overall)) if overall else None
    return render_team_document(
        team_name=team.name,
        discipline=discipline,
        summary=by_team[team_id],
        forms=store.load_forms_blind(team_id),
        n_teams=len(ranked),
        score_range=score_range,
        policy=policy,
    )


def find_leaks(document: str, confidential_tokens: Sequence[str]) -> list[str]:
    """Exact-substring scan of a rendered document for confidential tokens."""
    return [token for token in confidential_tokens if token and token in document]
