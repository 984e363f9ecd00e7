"""Expertise-weighted aggregation of evaluation forms.

Each reviewer's ratings are weighted by the expertise score the reviewer
reported on the same form, so opinions from reviewers closer to a team's
field carry more weight. Aggregation consumes :class:`BlindForm` views only;
the anonymization firewall lives in the type system, not in a convention.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Iterable, Mapping, Sequence

from evalforge.errors import InvalidCategory, NoForms
from evalforge.model import (
    RECOMMENDATION_CATEGORIES,
    TEAM_INDICATORS,
    BlindForm,
    DominantCharacter,
    EvaluationForm,
    Indicator,
    RecommendationLevel,
    TaggedComment,
)


@dataclass(frozen=True)
class WeightingPolicy:
    """Maps a reported expertise score to an aggregation weight.

    The mapping is isolated here so alternatives can be compared in the
    simulator without touching the aggregation code.
    """

    name: str
    formula: str
    weight: Callable[[float], float]

    def __call__(self, expertise: float) -> float:
        return self.weight(expertise)


UNWEIGHTED = WeightingPolicy("unweighted", "w(e) = 1", lambda e: 1.0)
LINEAR = WeightingPolicy("linear", "w(e) = e", lambda e: float(e))
QUADRATIC = WeightingPolicy("quadratic", "w(e) = e^2", lambda e: float(e) * float(e))

POLICIES: dict[str, WeightingPolicy] = {
    p.name: p for p in (UNWEIGHTED, LINEAR, QUADRATIC)
}


def get_policy(name: str) -> WeightingPolicy:
    try:
        return POLICIES[name]
    except KeyError:
        raise InvalidCategory(
            f"unknown weighting policy {name!r}; expected one of "
            + ", ".join(sorted(POLICIES))
        ) from None


def weighted_mean(scores: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted arithmetic mean sum(w*s)/sum(w) at full float precision.

    Invariant under rescaling of the weight vector by any positive constant.
    """
    if len(scores) != len(weights):
        raise ValueError("scores and weights differ in length")
    if not scores:
        raise ValueError("weighted mean of an empty sequence")
    total = math.fsum(weights)
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    return math.fsum(w * s for s, w in zip(scores, weights)) / total


def round_half_away(value: float, ndigits: int = 2) -> float:
    """Round with halves away from zero, as used for all reported scores."""
    quantum = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class IndicatorAggregate:
    weighted_mean: float
    n_ratings: int
    weight_sum: float


@dataclass(frozen=True)
class ScoreSummary:
    """Per-team aggregates over all returned forms for that team."""

    team_id: str
    per_indicator: dict[Indicator, IndicatorAggregate]
    dominant_tally: dict[DominantCharacter, float]
    overall_weighted: float | None
    n_forms: int
    rank_in_discipline: float | None = None

    def dominant_proportions(self) -> dict[DominantCharacter, float]:
        total = sum(self.dominant_tally.values())
        if total <= 0:
            return {}
        return {cat: count / total for cat, count in self.dominant_tally.items()}

    def with_rank(self, rank: float) -> ScoreSummary:
        return ScoreSummary(
            team_id=self.team_id,
            per_indicator=self.per_indicator,
            dominant_tally=self.dominant_tally,
            overall_weighted=self.overall_weighted,
            n_forms=self.n_forms,
            rank_in_discipline=rank,
        )


def _blind(form: BlindForm | EvaluationForm) -> BlindForm:
    if isinstance(form, EvaluationForm):
        return form.blind()
    return form


def aggregate_team(
    forms: Iterable[BlindForm | EvaluationForm],
    policy: WeightingPolicy = LINEAR,
) -> ScoreSummary:
    """Aggregate one team's forms into expertise-weighted indicator means.

    Per indicator, only forms that actually rated it contribute (a skipped
    rating is excluded, never imputed); an indicator no form rated is simply
    absent from the result. The reviewer expertise score itself is the
    weight and never an aggregate.
    """
    blinded = [_blind(form) for form in forms]
    if not blinded:
        raise NoForms("no returned forms to aggregate")
    team_ids = {form.team_id for form in blinded}
    if len(team_ids) != 1:
        raise ValueError(f"forms belong to several teams: {sorted(team_ids)}")

    per_indicator: dict[Indicator, IndicatorAggregate] = {}
    for indicator in TEAM_INDICATORS:
        scores: list[float] = []
        weights: list[float] = []
        for form in blinded:
            if indicator not in form.scores:
                continue
            expertise = form.expertise
            if expertise is None:
                raise ValueError("form without a reviewer expertise score")
            scores.append(float(form.scores[indicator]))
            weights.append(policy(expertise))
        if scores:
            per_indicator[indicator] = IndicatorAggregate(
                weighted_mean=weighted_mean(scores, weights),
                n_ratings=len(scores),
                weight_sum=math.fsum(weights),
            )

    dominant_tally: dict[DominantCharacter, float] = {}
    for form in blinded:
        if form.dominant_character is None:
            continue
        expertise = form.expertise
        if expertise is None:
            raise ValueError("form without a reviewer expertise score")
        weight = policy(expertise)
        dominant_tally[form.dominant_character] = (
            dominant_tally.get(form.dominant_character, 0.0) + weight
        )

    overall = per_indicator.get(Indicator.OVERALL)
    return ScoreSummary(
        team_id=blinded[0].team_id,
        per_indicator=per_indicator,
        dominant_tally=dominant_tally,
        overall_weighted=overall.weighted_mean if overall else None,
        n_forms=len(blinded),
    )


def average_ranks(values: Sequence[float]) -> list[float]:
    """Rank positions (1 = highest value) with exact ties averaged."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0.0] * len(values)
    position = 0
    while position < len(order):
        tied_end = position
        while (
            tied_end + 1 < len(order)
            and values[order[tied_end + 1]] == values[order[position]]
        ):
            tied_end += 1
        mean_rank = (position + tied_end) / 2 + 1
        for k in range(position, tied_end + 1):
            ranks[order[k]] = mean_rank
        position = tied_end + 1
    return ranks


def rank_discipline(summaries: Sequence[ScoreSummary]) -> list[ScoreSummary]:
    """Rank summaries within a discipline by overall weighted score.

    Rank 1 is the highest score, exact ties share the average of the tied
    positions, and the result is sorted best first.
    """
    if not summaries:
        return []
    for summary in summaries:
        if summary.overall_weighted is None:
            raise ValueError(f"team {summary.team_id} has no overall score")
    ranks = average_ranks([s.overall_weighted for s in summaries])
    ranked = [s.with_rank(r) for s, r in zip(summaries, ranks)]
    return sorted(ranked, key=lambda s: (s.rank_in_discipline, s.team_id))


@dataclass(frozen=True)
class OverviewRow:
    anon_label: str
    label_number: int
    expertise: int
    scores: dict[Indicator, int]
    dominant_character: DominantCharacter | None
    comments: dict[str, str]


@dataclass(frozen=True)
class AnonymousOverview:
    """All reviewers' scores and comments for one team, identities stripped.

    Labels are drawn per team from a seeded shuffle, so the same reviewer
    carries different labels on different teams and rows cannot be linked
    across overviews.
    """

    team_id: str
    rows: tuple[OverviewRow, ...]


def build_overview(
    forms: Sequence[BlindForm], seed: int, team_id: str | None = None
) -> AnonymousOverview:
    """Compile the anonymous per-team overview, ordered by expertise.

    Accepts blinded forms only; passing an attributable form is a type error,
    which is the point.
    """
    for form in forms:
        if not isinstance(form, BlindForm):
            raise TypeError(
                "build_overview accepts BlindForm views only; "
                "call .blind() at the store boundary"
            )
    if team_id is None:
        team_ids = {form.team_id for form in forms}
        if len(team_ids) != 1:
            raise ValueError("forms belong to several teams; pass team_id explicitly")
        team_id = team_ids.pop()

    labels = list(range(1, len(forms) + 1))
    random.Random(f"{seed}:{team_id}").shuffle(labels)
    rows = []
    for form, number in zip(forms, labels):
        expertise = form.expertise
        if expertise is None:
            raise ValueError("form without a reviewer expertise score")
        rows.append(
            OverviewRow(
                anon_label=f"Reviewer {number}",
                label_number=number,
                expertise=expertise,
                scores=dict(form.scores),
                dominant_character=form.dominant_character,
                comments=dict(form.comments),
            )
        )
    rows.sort(key=lambda row: (-row.expertise, row.label_number))
    return AnonymousOverview(team_id=team_id, rows=tuple(rows))


def render_overview(overview: AnonymousOverview) -> str:
    """Plain-text rendering of an overview, for the pre-meeting mailing."""
    lines = [f"Overview of scores and comments (team {overview.team_id})", ""]
    for row in overview.rows:
        lines.append(f"{row.anon_label} (expertise {row.expertise}/10)")
        for indicator in Indicator:
            if indicator in row.scores and indicator is not Indicator.REVIEWER_EXPERTISE:
                lines.append(f"  {indicator.value}: {row.scores[indicator]}")
        if row.dominant_character is not None:
            lines.append(f"  dominant_character: {row.dominant_character.value}")
        for slot in sorted(row.comments):
            lines.append(f"  [{slot}] {row.comments[slot]}")
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class CollectedComments:
    """Generally valid remarks bucketed by governance level."""

    team_level: tuple[TaggedComment, ...]
    institutional: tuple[TaggedComment, ...]


def collect_general_comments(
    forms: Iterable[BlindForm | EvaluationForm],
) -> CollectedComments:
    """Gather category-tagged general comments from all returned forms.

    Tags are manual input carried on the forms; an unknown category raises
    InvalidCategory rather than being guessed at.
    """
    team_level: list[TaggedComment] = []
    institutional: list[TaggedComment] = []
    for form in forms:
        for comment in _blind(form).general_comments:
            level = RECOMMENDATION_CATEGORIES.get(comment.category)
            if level is None:
                raise InvalidCategory(
                    f"unknown recommendation category {comment.category!r}"
                )
            if level is RecommendationLevel.TEAM:
                team_level.append(comment)
            else:
                institutional.append(comment)
    return CollectedComments(
        team_level=tuple(sorted(team_level, key=lambda c: (c.category, c.text))),
        institutional=tuple(sorted(institutional, key=lambda c: (c.category, c.text))),
    )


def summaries_csv_rows(
    summaries: Iterable[ScoreSummary],
) -> list[dict[str, object]]:
    """One row per team and indicator, scores reported at two decimals."""
    rows: list[dict[str, object]] = []
    for summary in summaries:
        for indicator in TEAM_INDICATORS:
            aggregate = summary.per_indicator.get(indicator)
            if aggregate is None:
                continue
            rows.append(
                {
                    "team_id": summary.team_id,
                    "indicator": indicator.value,
                    "weighted_mean": f"{round_half_away(aggregate.weighted_mean):.2f}",
                    "n_ratings": aggregate.n_ratings,
                    "weight_sum": aggregate.weight_sum,
                    "rank_in_discipline": summary.rank_in_discipline,
                }
            )
    return rows
