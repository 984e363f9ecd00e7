"""Compile, complete and render per-team evaluation files.

Drafting fills the activity and personnel overviews from stored records;
teams complete the narrative slots through deltas that can add but never
remove store-derived content. Rendering produces a deterministic structured
text document with a fixed section sequence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from evalforge.errors import (
    CoreLimitExceeded,
    CoreOutsideOverview,
    DeletionForbidden,
    DraftWarning,
    IncompleteDossier,
    UnknownSlot,
)
from evalforge.model import (
    CORE_PUBLICATION_LIMIT,
    CORE_SLOT,
    RECORD_SLOTS,
    SLOT_IDS,
    TEXT_SLOTS,
    ActivityKind,
    ActivityRecord,
    EvaluationFile,
    MemberRole,
    Provenance,
    SectionContent,
    Team,
    empty_sections,
)
from evalforge.model.store import ProjectStore

#: Fixed, uniform heading sequence of a rendered dossier. Group headings
#: carry no slot; content slots map 1:1 to evaluation file sections.
SECTION_HEADINGS: tuple[tuple[str | None, str], ...] = (
    ("Preamble", "Preamble"),
    (None, "A. Presentation of the team"),
    ("A.I", "A.I. Introduction"),
    ("A.II", "A.II. Research topics"),
    ("A.III", "A.III. Most important research results"),
    ("A.IV", "A.IV. Past, present and future activities (objectives and strategy)"),
    ("A.V", "A.V. Strengths and weaknesses / threats and opportunities"),
    ("A.VI", "A.VI. Scientific and social relevance of the research"),
    ("A.VII", "A.VII. Short CV of the head of the team"),
    ("A.VIII", "A.VIII. Five core publications"),
    (None, "B. Overview of the scientific activities"),
    ("B.I", "B.I. Publications"),
    ("B.II", "B.II. Research projects"),
    ("B.III", "B.III. Other scientific accomplishments (awards, promoters of "
              "PhD theses, memberships, ...)"),
    (None, "C. Financial means and personnel"),
    ("C.I", "C.I. Personnel - Overview"),
    ("C.II", "C.II. Personnel - Details"),
    ("C.III", "C.III. Teaching load"),
    ("C.IV", "C.IV. Most important sources of funding"),
    ("D", "D. Overview of external activities which contribute to teaching "
          "and/or research"),
    ("E", "E. Collaborations"),
    ("F", "F. Valorizable results"),
)

_KIND_TO_SLOT: dict[ActivityKind, str] = {
    ActivityKind.PUBLICATION: "B.I",
    ActivityKind.PROJECT: "B.II",
    ActivityKind.OTHER_ACCOMPLISHMENT: "B.III",
    ActivityKind.TEACHING_LOAD: "C.III",
    ActivityKind.FUNDING_SOURCE: "C.IV",
}

_ROLE_LABELS = {
    MemberRole.POSTDOC_LEVEL: "postdoc-level",
    MemberRole.PHD: "PhD",
    MemberRole.OTHER: "other",
}


def _fmt(number: float) -> str:
    return f"{number:g}"


def _sort_records(records: Iterable[ActivityRecord]) -> list[ActivityRecord]:
    return sorted(
        records,
        key=lambda r: (-r.year, str(r.payload.get("title", "")),
                       str(r.payload.get("name", "")), str(r.payload.get("funder", ""))),
    )


def _personnel_overview_text(records: Sequence[ActivityRecord]) -> str:
    total = sum(float(r.payload["fte"]) for r in records)
    by_role: dict[str, float] = {}
    for record in records:
        role = str(record.payload.get("role", "other"))
        by_role[role] = by_role.get(role, 0.0) + float(record.payload["fte"])
    lines = [f"Total FTE: {_fmt(total)}"]
    for role in sorted(by_role):
        lines.append(f"  {role}: {_fmt(by_role[role])} FTE")
    return "\n".join(lines)


def draft_file(
    team: Team, window: tuple[int, int], store: ProjectStore
) -> EvaluationFile:
    """Draft a team's evaluation file from centrally stored records.

    Overview slots (B and C) are filled from the team's activity records
    inside the window; every narrative slot stays empty for the team to
    complete. Drafting an unchanged store twice gives the same file.
    """
    start, end = window
    if start > end:
        raise ValueError(f"window {window} has start after end")
    records = [
        record
        for record in store.load_activities(team.id)
        if start <= record.year <= end
    ]
    overview_kinds = set(_KIND_TO_SLOT)
    if not any(record.kind in overview_kinds for record in records):
        warnings.warn(
            DraftWarning(f"team {team.id}: no activity records in {start}-{end}; "
                         "overview sections drafted empty")
        )

    sections = empty_sections()
    per_slot: dict[str, list[ActivityRecord]] = {slot: [] for slot in RECORD_SLOTS}
    for record in records:
        slot = _KIND_TO_SLOT.get(record.kind)
        if slot is not None:
            per_slot[slot].append(record)
        elif record.kind is ActivityKind.PERSONNEL:
            per_slot["C.I"].append(record)
            per_slot["C.II"].append(record)

    for slot in sorted(RECORD_SLOTS):
        slot_records = tuple(_sort_records(per_slot[slot]))
        text = ""
        if slot == "C.I" and slot_records:
            text = _personnel_overview_text(slot_records)
        sections[slot] = SectionContent(
            text=text,
            records=slot_records,
            provenance=Provenance.DRAFTED_FROM_STORE,
        )
    return EvaluationFile(
        team_id=team.id,
        window=window,
        sections=sections,
        snapshot_id=store.snapshot_id(),
    )


@dataclass(frozen=True)
class DraftDelta:
    """A team's completion of one slot: narrative text or extra records.

    Deltas can fill narrative slots, select the core publications, or append
    records to overview slots; store-derived records can never be removed.
    """

    team_id: str
    slot: str
    text: str = ""
    records: tuple = ()
    author: str = ""
    replace: bool = False


def delta_from_doc(doc: dict) -> DraftDelta:
    from evalforge.model.store import _activity_from_doc

    return DraftDelta(
        team_id=doc["team_id"],
        slot=doc["slot"],
        text=doc.get("text", ""),
        records=tuple(
            _activity_from_doc(rec) if isinstance(rec, dict) else rec
            for rec in doc.get("records", ())
        ),
        author=doc.get("author", ""),
        replace=bool(doc.get("replace", False)),
    )


def merge_delta(eval_file: EvaluationFile, delta: DraftDelta) -> EvaluationFile:
    """Merge one team-supplied delta into an evaluation file.

    Narrative slots take the supplied text; the core slot takes up to five
    publication titles, each of which must appear in the publications
    overview; overview slots append the supplied records.
    """
    if delta.team_id != eval_file.team_id:
        raise ValueError(
            f"delta for team {delta.team_id} applied to file of {eval_file.team_id}"
        )
    if delta.slot not in SLOT_IDS:
        raise UnknownSlot(f"no such slot {delta.slot!r}")

    sections = dict(eval_file.sections)
    current = sections[delta.slot]

    if delta.slot in TEXT_SLOTS:
        sections[delta.slot] = SectionContent(
            text=delta.text,
            records=current.records,
            provenance=Provenance.TEAM_SUPPLIED,
        )
    elif delta.slot == CORE_SLOT:
        titles = current.records if not delta.replace else ()
        combined = tuple(titles) + tuple(delta.records)
        if len(combined) > CORE_PUBLICATION_LIMIT:
            raise CoreLimitExceeded(
                f"{len(combined)} core publications; the limit is "
                f"{CORE_PUBLICATION_LIMIT}"
            )
        listed = {
            rec.payload.get("title")
            for rec in sections["B.I"].records
            if isinstance(rec, ActivityRecord)
        }
        for title in combined:
            if title not in listed:
                raise CoreOutsideOverview(
                    f"core publication {title!r} is not listed in B.I"
                )
        sections[delta.slot] = SectionContent(
            text=delta.text or current.text,
            records=combined,
            provenance=Provenance.TEAM_SUPPLIED,
        )
    else:
        if delta.replace and current.records:
            raise DeletionForbidden(
                f"slot {delta.slot} holds store-derived records; they can be "
                "appended to, never replaced"
            )
        sections[delta.slot] = SectionContent(
            text=delta.text or current.text,
            records=tuple(current.records) + tuple(delta.records),
            provenance=Provenance.TEAM_SUPPLIED,
        )
    return EvaluationFile(
        team_id=eval_file.team_id,
        window=eval_file.window,
        sections=sections,
        snapshot_id=eval_file.snapshot_id,
    )


def _render_record(record: ActivityRecord) -> str:
    payload = record.payload
    if record.kind is ActivityKind.PUBLICATION:
        return (f"{record.year} [{payload['category']}] {payload['title']} "
                f"({payload['venue']})")
    if record.kind is ActivityKind.PROJECT:
        return (f"{record.year} {payload.get('title', 'project')} "
                f"funded by {payload['funder']} ({_fmt(float(payload['amount']))})")
    if record.kind is ActivityKind.PERSONNEL:
        return (f"{payload['name']} ({payload['role']}, "
                f"{_fmt(float(payload['fte']))} FTE, {record.year})")
    if record.kind is ActivityKind.TEACHING_LOAD:
        return f"{record.year}: {_fmt(float(payload['hours_per_year']))} hours/year"
    if record.kind is ActivityKind.FUNDING_SOURCE:
        return (f"{payload['funder']}"
                + (f" ({_fmt(float(payload['amount']))})" if "amount" in payload else ""))
    description = payload.get("description") or payload.get("title") or record.kind.value
    return f"{record.year} {description}"


def render_dossier(eval_file: EvaluationFile, allow_incomplete: bool = False) -> str:
    """Render the uniform dossier document.

    The section sequence and headings are fixed constants; equal inputs give
    byte-identical output. An incomplete file is refused unless explicitly
    overridden.
    """
    if not eval_file.complete and not allow_incomplete:
        raise IncompleteDossier(list(eval_file.empty_slots))

    lines = [
        "=== EVALUATION FILE ===",
        f"team: {eval_file.team_id}",
        f"window: {eval_file.window[0]}-{eval_file.window[1]}",
        f"snapshot: {eval_file.snapshot_id}",
        "",
    ]
    for slot, heading in SECTION_HEADINGS:
        lines.append(f"## {heading}")
        if slot is None:
            continue
        content = eval_file.sections[slot]
        if content.text:
            lines.append(content.text)
        if slot == CORE_SLOT:
            for index, title in enumerate(content.records, start=1):
                lines.append(f"{index}. {title}")
        elif slot == "B.I":
            by_category: dict[str, list[ActivityRecord]] = {}
            for record in content.records:
                by_category.setdefault(str(record.payload["category"]), []).append(record)
            for category in sorted(by_category):
                lines.append(f"[{category}]")
                for record in _sort_records(by_category[category]):
                    lines.append(f"- {_render_record(record)}")
        else:
            for record in content.records:
                if isinstance(record, ActivityRecord):
                    lines.append(f"- {_render_record(record)}")
                else:
                    lines.append(f"- {record}")
        if content.is_empty:
            lines.append("(not supplied)")
        lines.append("")
    return "\n".join(lines)


def extract_headings(document: str) -> list[str]:
    """Heading sequence of a rendered dossier, for order checks."""
    return [line[3:] for line in document.splitlines() if line.startswith("## ")]
