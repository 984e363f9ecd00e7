"""Quantitative analyses over evaluation results.

Score distributions per indicator and per discipline, all-pairs indicator
correlations over per-team weighted means, field-normalized citation impact,
and the comparison of peer scores with citation impact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import median
from typing import Iterable, Mapping, Sequence

from evalforge.errors import (
    DegenerateVariance,
    MissingBaseline,
    NoPublications,
    TooFewPairs,
)
from evalforge.model import TEAM_INDICATORS, BibliometricRecord, Indicator
from evalforge.scoring import ScoreSummary

SCALE = tuple(range(1, 11))


@dataclass(frozen=True)
class Histogram:
    """Relative frequency distribution over the 1-10 score scale."""

    label: str
    bins: dict[int, float]
    n: int
    mode: int | None

    def __post_init__(self):
        missing = set(SCALE) - set(self.bins)
        if missing:
            raise ValueError(f"bins must cover 1..10, missing {sorted(missing)}")


def histogram(scores: Sequence[int], label: str) -> Histogram:
    """Count scores into zero-filled 1..10 bins of relative frequencies.

    An empty input yields n=0 with all-zero bins; no normalization is
    attempted. Ties for the modal bin resolve to the lowest score.
    """
    counts = {score: 0 for score in SCALE}
    for score in scores:
        if score not in counts:
            raise ValueError(f"score {score} outside the 1-10 scale")
        counts[score] += 1
    n = len(scores)
    if n == 0:
        return Histogram(label=label, bins={s: 0.0 for s in SCALE}, n=0, mode=None)
    bins = {score: count / n for score, count in counts.items()}
    mode = max(SCALE, key=lambda score: (counts[score], -score))
    return Histogram(label=label, bins=bins, n=n, mode=mode)


def _exact_moments(x: Sequence[float], y: Sequence[float]):
    """Exact rational means and centered moments; floats convert losslessly."""
    n = len(x)
    fx = [Fraction(v) for v in x]
    fy = [Fraction(v) for v in y]
    mx = sum(fx) / n
    my = sum(fy) / n
    sxx = sum((v - mx) ** 2 for v in fx)
    syy = sum((v - my) ** 2 for v in fy)
    sxy = sum((a - mx) * (b - my) for a, b in zip(fx, fy))
    return mx, my, sxx, syy, sxy


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient.

    Centered moments are accumulated in exact rational arithmetic, so a
    perfectly linear relation returns exactly +1.0 or -1.0 and the result
    can never leave [-1, 1] through rounding.
    """
    if len(x) != len(y):
        raise ValueError("x and y differ in length")
    if len(x) < 3:
        raise TooFewPairs(f"{len(x)} pairs; need at least 3")
    _, _, sxx, syy, sxy = _exact_moments(x, y)
    if sxx == 0 or syy == 0:
        raise DegenerateVariance("an input has zero variance")
    if sxy * sxy == sxx * syy:
        return 1.0 if sxy > 0 else -1.0
    return float(sxy) / math.sqrt(float(sxx) * float(syy))


def r_significance(r: float, n: int) -> float:
    """Two-sided t statistic for r with n-2 degrees of freedom (display only)."""
    if abs(r) >= 1.0:
        return math.inf
    return r * math.sqrt((n - 2) / (1.0 - r * r))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise-complete indicator correlations over team summaries.

    A cell is None where correlation is undefined (degenerate variance or
    fewer than three complete pairs); the paired count is recorded per cell
    either way.
    """

    labels: tuple[Indicator, ...]
    r: tuple[tuple[float | None, ...], ...]
    n: tuple[tuple[int, ...], ...]

    def cell(self, a: Indicator, b: Indicator) -> float | None:
        return self.r[self.labels.index(a)][self.labels.index(b)]

    @property
    def complete(self) -> bool:
        return all(value is not None for row in self.r for value in row)


def indicator_correlations(
    summaries: Sequence[ScoreSummary],
    labels: Sequence[Indicator] = TEAM_INDICATORS,
) -> CorrelationMatrix:
    """All-pairs correlations of per-team weighted indicator means.

    Pairwise-complete: a team missing one indicator still contributes to
    every pair it has. Fewer than three summaries overall is an error.
    """
    if len(summaries) < 3:
        raise TooFewPairs(f"{len(summaries)} teams; need at least 3")
    columns: dict[Indicator, list[float | None]] = {
        label: [
            (s.per_indicator[label].weighted_mean if label in s.per_indicator else None)
            for s in summaries
        ]
        for label in labels
    }
    size = len(labels)
    r_matrix: list[list[float | None]] = [[None] * size for _ in range(size)]
    n_matrix: list[list[int]] = [[0] * size for _ in range(size)]
    for i, a in enumerate(labels):
        for j, b in enumerate(labels[: i + 1]):
            pairs = [
                (va, vb)
                for va, vb in zip(columns[a], columns[b])
                if va is not None and vb is not None
            ]
            n_matrix[i][j] = n_matrix[j][i] = len(pairs)
            if i == j:
                r_matrix[i][j] = 1.0 if pairs else None
                continue
            if len(pairs) < 3:
                continue
            try:
                value = pearson([p[0] for p in pairs], [p[1] for p in pairs])
            except DegenerateVariance:
                value = None
            r_matrix[i][j] = r_matrix[j][i] = value
    return CorrelationMatrix(
        labels=tuple(labels),
        r=tuple(tuple(row) for row in r_matrix),
        n=tuple(tuple(row) for row in n_matrix),
    )


@dataclass(frozen=True)
class CrownResult:
    """Field-normalized citation impact of one team's publication set."""

    team_id: str
    cpp: float
    fcsm: float
    crown: float
    p: int


def crown(
    record: BibliometricRecord, fcsm_weighting: str = "publications"
) -> CrownResult:
    """Citations per publication over the expected field citation rate.

    The field baseline mean is publication-count weighted by default; the
    ``citations`` variant weights each field's baseline by the team's
    citations in that field instead.
    """
    if not record.publications:
        raise NoPublications(f"team {record.team_id} has no publications")
    if fcsm_weighting not in ("publications", "citations"):
        raise ValueError(f"unknown fcsm weighting {fcsm_weighting!r}")

    per_field_pubs: dict[str, int] = {}
    per_field_citations: dict[str, float] = {}
    total_citations = 0.0
    for field, citations in record.publications:
        if field not in record.field_baselines:
            raise MissingBaseline(field)
        per_field_pubs[field] = per_field_pubs.get(field, 0) + 1
        per_field_citations[field] = per_field_citations.get(field, 0.0) + citations
        total_citations += citations

    p = len(record.publications)
    cpp = total_citations / p
    if fcsm_weighting == "publications":
        fcsm = math.fsum(
            count * record.field_baselines[field]
            for field, count in per_field_pubs.items()
        ) / p
    else:
        weight_total = math.fsum(per_field_citations.values())
        if weight_total <= 0:
            raise DegenerateVariance("citation-weighted baseline needs citations > 0")
        fcsm = math.fsum(
            cites * record.field_baselines[field]
            for field, cites in per_field_citations.items()
        ) / weight_total
    return CrownResult(
        team_id=record.team_id, cpp=cpp, fcsm=fcsm, crown=cpp / fcsm, p=p
    )


@dataclass(frozen=True)
class ScatterStudy:
    """Peer score against citation impact, with fit and quadrant counts.

    ``high_crown_low_peer`` counts teams above the world field average whose
    peer score falls below the discipline median; ``high_peer_low_crown``
    counts the opposite asymmetry.
    """

    indicator: Indicator
    points: tuple[tuple[str, float, float], ...]
    r: float
    slope: float
    intercept: float
    t_stat: float
    median_peer: float
    high_crown_low_peer: int
    high_peer_low_crown: int
    dropped: tuple[str, ...]


def peer_vs_crown(
    summaries: Iterable[ScoreSummary],
    crowns: Iterable[CrownResult],
    indicator: Indicator = Indicator.TEAM_QUALITY,
) -> ScatterStudy:
    """Pair each team's citation impact with its peer score and fit a line.

    Teams present in only one input are dropped and reported; fewer than
    three matched pairs is an error.
    """
    peer_by_team: dict[str, float] = {}
    for summary in summaries:
        aggregate = summary.per_indicator.get(indicator)
        if aggregate is not None:
            peer_by_team[summary.team_id] = aggregate.weighted_mean
    crown_by_team: Mapping[str, float] = {c.team_id: c.crown for c in crowns}

    matched = sorted(set(peer_by_team) & set(crown_by_team))
    dropped = tuple(sorted(set(peer_by_team) ^ set(crown_by_team)))
    if len(matched) < 3:
        raise TooFewPairs(f"{len(matched)} matched teams; need at least 3")

    points = tuple(
        (team, crown_by_team[team], peer_by_team[team]) for team in matched
    )
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    r = pearson(xs, ys)
    mx, my, sxx, _, sxy = _exact_moments(xs, ys)
    if sxx == 0:
        raise DegenerateVariance("crown values have zero variance")
    slope_exact = sxy / sxx
    slope = float(slope_exact)
    intercept = float(my - slope_exact * mx)
    med = median(ys)
    return ScatterStudy(
        indicator=indicator,
        points=points,
        r=r,
        slope=slope,
        intercept=intercept,
        t_stat=r_significance(r, len(points)),
        median_peer=med,
        high_crown_low_peer=sum(1 for _, c, s in points if c > 1.0 and s < med),
        high_peer_low_crown=sum(1 for _, c, s in points if s > med and c < 1.0),
        dropped=dropped,
    )
