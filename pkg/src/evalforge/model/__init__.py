"""Domain types and the file-based project store."""

from evalforge.model.store import ProjectConfig, ProjectStore, open_project
from evalforge.model.types import (
    CORE_PUBLICATION_LIMIT,
    CORE_SLOT,
    DEFAULT_PUBLICATION_CATEGORIES,
    INDICATOR_LABELS,
    NUMERIC_INDICATORS,
    RECOMMENDATION_CATEGORIES,
    RECORD_SLOTS,
    SCORE_BANDS,
    SLOT_IDS,
    TEAM_INDICATORS,
    TEXT_SLOTS,
    ActivityKind,
    ActivityRecord,
    BibliometricRecord,
    BlindForm,
    Discipline,
    DominantCharacter,
    EvaluationFile,
    EvaluationForm,
    Expert,
    ExpertStatus,
    Indicator,
    MemberRole,
    Provenance,
    RecommendationLevel,
    SectionContent,
    TaggedComment,
    Team,
    TeamMember,
    Violation,
    empty_sections,
    parse_dominant_character,
    score_band,
    transition_expert,
    validate_form,
)

__all__ = [
    "ActivityKind",
    "ActivityRecord",
    "BibliometricRecord",
    "BlindForm",
    "CORE_PUBLICATION_LIMIT",
    "CORE_SLOT",
    "DEFAULT_PUBLICATION_CATEGORIES",
    "Discipline",
    "DominantCharacter",
    "EvaluationFile",
    "EvaluationForm",
    "Expert",
    "ExpertStatus",
    "INDICATOR_LABELS",
    "Indicator",
    "MemberRole",
    "NUMERIC_INDICATORS",
    "ProjectConfig",
    "ProjectStore",
    "Provenance",
    "RECOMMENDATION_CATEGORIES",
    "RECORD_SLOTS",
    "RecommendationLevel",
    "SCORE_BANDS",
    "SLOT_IDS",
    "SectionContent",
    "TEAM_INDICATORS",
    "TEXT_SLOTS",
    "TaggedComment",
    "Team",
    "TeamMember",
    "Violation",
    "empty_sections",
    "open_project",
    "parse_dominant_character",
    "score_band",
    "transition_expert",
    "validate_form",
]
