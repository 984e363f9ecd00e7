"""Domain types for discipline-level peer-review evaluations.

All types are immutable dataclasses. Structural constraints (field types,
closed enumerations, ranges that make a value meaningless) are enforced at
construction; rule-level checks on evaluation forms are reported as values
by :func:`validate_form` so that out-of-scale documents can still be loaded,
inspected and rejected with a precise message.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone

from evalforge.errors import PhaseViolation


class Indicator(enum.Enum):
    """The eleven rated aspects on the standard evaluation form."""

    SCIENTIFIC_MERIT = "scientific_merit"
    RESEARCH_APPROACH = "research_approach"
    INNOVATION = "innovation"
    TEAM_QUALITY = "team_quality"
    PROBABILITY_OBJECTIVES = "probability_objectives"
    PRODUCTIVITY = "productivity"
    POTENTIAL_IMPACT = "potential_impact"
    COMMUNITY_UTILITY = "community_utility"
    DOMINANT_CHARACTER = "dominant_character"
    REVIEWER_EXPERTISE = "reviewer_expertise"
    OVERALL = "overall"


#: Indicators rated on the 1-10 integer scale (everything but the
#: categorical "dominant character" answer).
NUMERIC_INDICATORS: tuple[Indicator, ...] = tuple(
    i for i in Indicator if i is not Indicator.DOMINANT_CHARACTER
)

#: Numeric indicators describing the team itself. The reviewer's expertise
#: is a meta-indicator: it is the aggregation weight, never an aggregate.
TEAM_INDICATORS: tuple[Indicator, ...] = tuple(
    i for i in NUMERIC_INDICATORS if i is not Indicator.REVIEWER_EXPERTISE
)

INDICATOR_LABELS: dict[Indicator, str] = {
    Indicator.SCIENTIFIC_MERIT: "Scientific merit of the research / uniqueness of the research",
    Indicator.RESEARCH_APPROACH: "Research approach / plan / focus / coordination",
    Indicator.INNOVATION: "Innovation",
    Indicator.TEAM_QUALITY: "Quality of the research team",
    Indicator.PROBABILITY_OBJECTIVES: "Probability that the research objectives will be achieved",
    Indicator.PRODUCTIVITY: "Research productivity",
    Indicator.POTENTIAL_IMPACT: (
        "Potential impact on further research and on the development of applications"
    ),
    Indicator.COMMUNITY_UTILITY: "Potential for transition to or utility for the community",
    Indicator.DOMINANT_CHARACTER: "Dominant character of the research",
    Indicator.REVIEWER_EXPERTISE: "Reviewer's expertise in the particular research area",
    Indicator.OVERALL: "Overall research evaluation",
}

#: Display bands over the 1-10 scale. Storage keeps raw integers; bands are
#: presentation metadata only.
SCORE_BANDS: tuple[tuple[int, int, str], ...] = (
    (9, 10, "High"),
    (7, 8, "Good"),
    (5, 6, "Average"),
    (3, 4, "Fair"),
    (1, 2, "Low"),
)


def score_band(score: int) -> str:
    """Return the display band for an in-scale score."""
    for lo, hi, label in SCORE_BANDS:
        if lo <= score <= hi:
            return label
    raise ValueError(f"score {score} outside the 1-10 scale")


class DominantCharacter(enum.Enum):
    FUNDAMENTAL = "fundamental"
    APPLIED = "applied"
    POLICY_ORIENTED = "policy_oriented"


class ExpertStatus(enum.Enum):
    SUGGESTED = "suggested"
    REJECTED = "rejected"
    INVITED = "invited"
    CONFIRMED = "confirmed"


#: Legal expert status moves: suggested -> (rejected | invited) -> confirmed.
EXPERT_TRANSITIONS: dict[ExpertStatus, frozenset[ExpertStatus]] = {
    ExpertStatus.SUGGESTED: frozenset({ExpertStatus.REJECTED, ExpertStatus.INVITED}),
    ExpertStatus.INVITED: frozenset({ExpertStatus.CONFIRMED, ExpertStatus.REJECTED}),
    ExpertStatus.REJECTED: frozenset(),
    ExpertStatus.CONFIRMED: frozenset(),
}


class MemberRole(enum.Enum):
    POSTDOC_LEVEL = "postdoc_level"
    PHD = "phd"
    OTHER = "other"


class ActivityKind(enum.Enum):
    PUBLICATION = "publication"
    PROJECT = "project"
    OTHER_ACCOMPLISHMENT = "other_accomplishment"
    PERSONNEL = "personnel"
    TEACHING_LOAD = "teaching_load"
    FUNDING_SOURCE = "funding_source"
    EXTERNAL_ACTIVITY = "external_activity"
    COLLABORATION = "collaboration"
    VALORIZABLE_RESULT = "valorizable_result"


#: Default qualitative ordering of publication categories. Disciplines may
#: override the list (document formats are adapted per discipline).
DEFAULT_PUBLICATION_CATEGORIES: tuple[str, ...] = (
    "international-refereed",
    "national-refereed",
    "book/chapter",
    "proceedings",
    "other",
)


class RecommendationLevel(enum.Enum):
    TEAM = "team"
    INSTITUTION = "institution"


#: Closed category lists for generally valid recommendations: seven team
#: level categories and two institutional ones.
RECOMMENDATION_CATEGORIES: dict[str, RecommendationLevel] = {
    "team formation & human resources management": RecommendationLevel.TEAM,
    "research planning & strategy": RecommendationLevel.TEAM,
    "PhD students": RecommendationLevel.TEAM,
    "publications": RecommendationLevel.TEAM,
    "teaching": RecommendationLevel.TEAM,
    "internal collaborations": RecommendationLevel.TEAM,
    "international collaborations & networking": RecommendationLevel.TEAM,
    "human resources management": RecommendationLevel.INSTITUTION,
    "research policy": RecommendationLevel.INSTITUTION,
}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class Discipline:
    """A grouping of research teams evaluated together by one panel."""

    id: str
    name: str
    language_of_evaluation: str = "en"
    requires_national_experts: bool = False
    national_experts_rationale: str = ""
    publication_categories: tuple[str, ...] = ()

    def __post_init__(self):
        _require(bool(self.id), "discipline id must be non-empty")
        _require(bool(self.name), "discipline name must be non-empty")
        if self.requires_national_experts:
            _require(
                bool(self.national_experts_rationale.strip()),
                "requires_national_experts needs an explicit rationale",
            )

    @property
    def categories(self) -> tuple[str, ...]:
        return self.publication_categories or DEFAULT_PUBLICATION_CATEGORIES


@dataclass(frozen=True)
class TeamMember:
    name: str
    role: MemberRole
    fte: float

    def __post_init__(self):
        _require(bool(self.name), "member name must be non-empty")
        _require(0.0 <= self.fte <= 1.0, f"FTE fraction {self.fte} outside [0, 1]")


@dataclass(frozen=True)
class Team:
    """The smallest evaluated unit; belongs to exactly one discipline."""

    id: str
    discipline_id: str
    name: str
    leader: str
    members: tuple[TeamMember, ...] = ()
    fields: tuple[str, ...] = ()
    lead_expert_id: str | None = None

    def __post_init__(self):
        _require(bool(self.id), "team id must be non-empty")
        _require(bool(self.discipline_id), "team must reference a discipline")
        _require(bool(self.name), "team name must be non-empty")
        _require(bool(self.leader), "team leader must be non-empty")


@dataclass(frozen=True)
class Expert:
    id: str
    name: str
    affiliation: str
    country: str
    domains: tuple[str, ...] = ()
    suggested_by: str = "coordinator"
    status: ExpertStatus = ExpertStatus.SUGGESTED

    def __post_init__(self):
        _require(bool(self.id), "expert id must be non-empty")
        _require(bool(self.name), "expert name must be non-empty")
        _require(bool(self.affiliation), "expert affiliation must be non-empty")
        _require(bool(self.country), "expert country must be non-empty")


def transition_expert(expert: Expert, new_status: ExpertStatus) -> Expert:
    """Move an expert along the suggested -> (rejected | invited) -> confirmed path.

    Raises PhaseViolation for any move the lifecycle does not allow.
    """
    if new_status not in EXPERT_TRANSITIONS[expert.status]:
        raise PhaseViolation(
            f"expert {expert.id}: cannot move from {expert.status.value} "
            f"to {new_status.value}"
        )
    return Expert(
        id=expert.id,
        name=expert.name,
        affiliation=expert.affiliation,
        country=expert.country,
        domains=expert.domains,
        suggested_by=expert.suggested_by,
        status=new_status,
    )


#: Required payload keys per activity kind. Extra keys are allowed.
_PAYLOAD_KEYS: dict[ActivityKind, tuple[str, ...]] = {
    ActivityKind.PUBLICATION: ("title", "venue", "category", "field"),
    ActivityKind.PROJECT: ("funder", "amount"),
    ActivityKind.PERSONNEL: ("name", "role", "fte"),
    ActivityKind.TEACHING_LOAD: ("hours_per_year",),
    ActivityKind.FUNDING_SOURCE: ("funder",),
}


@dataclass(frozen=True)
class ActivityRecord:
    """One dated scientific activity of a team (publication, project, ...)."""

    team_id: str
    kind: ActivityKind
    year: int
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        _require(bool(self.team_id), "activity must reference a team")
        for key in _PAYLOAD_KEYS.get(self.kind, ()):
            _require(
                key in self.payload,
                f"{self.kind.value} record requires payload key {key!r}",
            )
        if self.kind is ActivityKind.PERSONNEL:
            fte = self.payload["fte"]
            _require(
                isinstance(fte, (int, float)) and 0.0 <= float(fte) <= 1.0,
                f"personnel FTE {fte!r} outside [0, 1]",
            )


@dataclass(frozen=True)
class TaggedComment:
    """A generally valid remark with its manually assigned category tag.

    The tag is data supplied at ingestion; nothing in the engine infers it.
    """

    category: str
    text: str

    def __post_init__(self):
        _require(bool(self.category), "comment category must be non-empty")
        _require(bool(self.text), "comment text must be non-empty")


@dataclass(frozen=True)
class EvaluationForm:
    """One expert's ratings of one team.

    The form is attributable internally (audit, return tracking, screening)
    but every scoring or reporting surface must consume :class:`BlindForm`
    views produced by :meth:`blind`, which carry no expert identity.
    """

    expert_id: str
    team_id: str
    scores: dict[Indicator, int] = field(default_factory=dict)
    dominant_character: DominantCharacter | None = None
    comments: dict[str, str] = field(default_factory=dict)
    general_comments: tuple[TaggedComment, ...] = ()
    returned_at: datetime | None = None

    def __post_init__(self):
        _require(bool(self.expert_id), "form must reference an expert")
        _require(bool(self.team_id), "form must reference a team")
        for key in self.scores:
            _require(isinstance(key, Indicator), f"score key {key!r} is not an indicator")

    def blind(self) -> BlindForm:
        """Anonymized view safe to hand to scoring and reporting code."""
        return BlindForm(
            team_id=self.team_id,
            scores=dict(self.scores),
            dominant_character=self.dominant_character,
            comments=dict(self.comments),
            general_comments=self.general_comments,
        )


@dataclass(frozen=True)
class BlindForm:
    """An evaluation form with the expert identity stripped.

    This type deliberately has no ``expert_id`` attribute: code that builds
    overviews or reports cannot read an identity that is not there.
    """

    team_id: str
    scores: dict[Indicator, int] = field(default_factory=dict)
    dominant_character: DominantCharacter | None = None
    comments: dict[str, str] = field(default_factory=dict)
    general_comments: tuple[TaggedComment, ...] = ()

    @property
    def expertise(self) -> int | None:
        return self.scores.get(Indicator.REVIEWER_EXPERTISE)


@dataclass(frozen=True)
class Violation:
    """One broken form rule; violations are values, never exceptions."""

    field: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule} ({self.message})"


def validate_form(form: EvaluationForm) -> list[Violation]:
    """Check every form invariant; empty list means the form is valid.

    Rules checked: all numeric scores are integers in 1..10, the categorical
    indicator never appears among the numeric scores, the reviewer expertise
    score is present (it is the aggregation weight), the dominant character
    value belongs to its closed enumeration, and general comment tags belong
    to the closed recommendation category lists.
    """
    violations: list[Violation] = []
    for indicator, value in sorted(form.scores.items(), key=lambda kv: kv[0].value):
        name = f"scores.{indicator.value}"
        if indicator is Indicator.DOMINANT_CHARACTER:
            violations.append(
                Violation(name, "categorical_indicator_scored",
                          "dominant character takes a category, not a score")
            )
            continue
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 10:
            violations.append(
                Violation(name, "score_out_of_scale",
                          f"score {value!r} is not an integer in 1..10")
            )
    if Indicator.REVIEWER_EXPERTISE not in form.scores:
        violations.append(
            Violation("scores.reviewer_expertise", "missing_expertise_weight",
                      "reviewer expertise is required on every returned form")
        )
    if form.dominant_character is not None and not isinstance(
        form.dominant_character, DominantCharacter
    ):
        violations.append(
            Violation("dominant_character", "invalid_category",
                      f"{form.dominant_character!r} is not a dominant character")
        )
    for comment in form.general_comments:
        if comment.category not in RECOMMENDATION_CATEGORIES:
            violations.append(
                Violation("general_comments", "invalid_category",
                          f"unknown recommendation category {comment.category!r}")
            )
    return violations


def parse_dominant_character(value: str) -> DominantCharacter:
    """Parse a categorical answer, raising ValueError outside the enumeration."""
    try:
        return DominantCharacter(value)
    except ValueError:
        raise ValueError(
            f"{value!r} is not one of "
            + ", ".join(c.value for c in DominantCharacter)
        ) from None


@dataclass(frozen=True)
class BibliometricRecord:
    """A team's publication set with field baseline citation rates."""

    team_id: str
    publications: tuple[tuple[str, float], ...]
    field_baselines: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        _require(bool(self.team_id), "bibliometric record must reference a team")
        for field_tag, citations in self.publications:
            _require(bool(field_tag), "publication field tag must be non-empty")
            _require(citations >= 0, f"citation count {citations} must be >= 0")
        for field_tag, baseline in self.field_baselines.items():
            _require(baseline > 0, f"baseline for {field_tag!r} must be > 0")


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


# --- evaluation file -------------------------------------------------------

class Provenance(enum.Enum):
    DRAFTED_FROM_STORE = "drafted-from-store"
    TEAM_SUPPLIED = "team-supplied"
    EMPTY = "empty"


#: Ordered content slots of an evaluation file.
SLOT_IDS: tuple[str, ...] = (
    "Preamble",
    "A.I", "A.II", "A.III", "A.IV", "A.V", "A.VI", "A.VII", "A.VIII",
    "B.I", "B.II", "B.III",
    "C.I", "C.II", "C.III", "C.IV",
    "D", "E", "F",
)

#: Narrative slots supplied by the team.
TEXT_SLOTS: frozenset[str] = frozenset(
    {"Preamble", "A.I", "A.II", "A.III", "A.IV", "A.V", "A.VI", "A.VII", "D", "E", "F"}
)

#: Overview slots drafted from stored activity records.
RECORD_SLOTS: frozenset[str] = frozenset(
    {"B.I", "B.II", "B.III", "C.I", "C.II", "C.III", "C.IV"}
)

#: The core publication slot: at most five entries, each listed in B.I.
CORE_SLOT = "A.VIII"
CORE_PUBLICATION_LIMIT = 5


@dataclass(frozen=True)
class SectionContent:
    """Content of one dossier slot: narrative text and/or records."""

    text: str = ""
    records: tuple = ()
    provenance: Provenance = Provenance.EMPTY

    @property
    def is_empty(self) -> bool:
        return self.provenance is Provenance.EMPTY


def empty_sections() -> dict[str, SectionContent]:
    return {slot: SectionContent() for slot in SLOT_IDS}


@dataclass(frozen=True)
class EvaluationFile:
    """The standardized per-team dossier over one evaluation window."""

    team_id: str
    window: tuple[int, int]
    sections: dict[str, SectionContent] = field(default_factory=empty_sections)
    snapshot_id: str = ""

    def __post_init__(self):
        _require(bool(self.team_id), "evaluation file must reference a team")
        start, end = self.window
        _require(start <= end, f"window {self.window} has start after end")
        unknown = set(self.sections) - set(SLOT_IDS)
        _require(not unknown, f"unknown slots {sorted(unknown)}")
        normalized = {slot: self.sections.get(slot, SectionContent()) for slot in SLOT_IDS}
        object.__setattr__(self, "sections", normalized)
        core = self.sections[CORE_SLOT]
        _require(
            len(core.records) <= CORE_PUBLICATION_LIMIT,
            f"{CORE_SLOT} holds at most {CORE_PUBLICATION_LIMIT} core publications",
        )
        listed = {
            rec.payload.get("title")
            for rec in self.sections["B.I"].records
            if isinstance(rec, ActivityRecord)
        }
        for title in core.records:
            _require(
                title in listed,
                f"core publication {title!r} is not listed in B.I",
            )

    @property
    def complete(self) -> bool:
        return all(not content.is_empty for content in self.sections.values())

    @property
    def empty_slots(self) -> tuple[str, ...]:
        return tuple(slot for slot in SLOT_IDS if self.sections[slot].is_empty)
