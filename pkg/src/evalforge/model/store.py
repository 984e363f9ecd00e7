"""File-based project store.

One evaluation project is a directory of human-diffable JSON documents, one
file per entity, organized as::

    project/
      config                      project-level settings
      disciplines/<id>.json
      teams/<id>.json
      experts/<id>.json
      activities/<team_id>.json   all activity records of one team
      forms/<team_id>__<expert_id>.json
      bibliometrics/<team_id>.json
      state/                      workflow, dossiers, panel reports, audit log

Field names match the domain type definitions (lower_snake_case), timestamps
are ISO-8601, text is UTF-8. The store is single-writer; every loaded value
is an immutable snapshot safe to share across parallel readers.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable

from evalforge.errors import StoreCorrupt
from evalforge.model import types as t

_DATA_DIRS = ("disciplines", "teams", "experts", "activities", "forms", "bibliometrics")
_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class ProjectConfig:
    """Project-level settings, persisted at ``project/config``."""

    institution: str = "Evaluated University"
    home_country: str = "BE"
    window: tuple[int, int] = (2001, 2005)
    window_length: int = 5
    reaction_window_days: int = 14
    weighting_policy: str = "linear"
    year_range: tuple[int, int] = (1950, 2100)


def _check_id(value: str) -> str:
    if not _ID_RE.match(value) or "__" in value:
        raise ValueError(f"identifier {value!r} is not filename-safe")
    return value


def _plain(value: Any) -> Any:
    """Convert a domain value to a JSON-serializable document."""
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, datetime):
        return value.isoformat()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: _plain(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {_plain(k) if isinstance(k, enum.Enum) else k: _plain(v)
                for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _pair(doc: Any, name: str) -> tuple[int, int]:
    lo, hi = doc
    return int(lo), int(hi)


def _discipline_from_doc(doc: dict) -> t.Discipline:
    return t.Discipline(
        id=doc["id"],
        name=doc["name"],
        language_of_evaluation=doc.get("language_of_evaluation", "en"),
        requires_national_experts=doc.get("requires_national_experts", False),
        national_experts_rationale=doc.get("national_experts_rationale", ""),
        publication_categories=tuple(doc.get("publication_categories", ())),
    )


def _team_from_doc(doc: dict) -> t.Team:
    return t.Team(
        id=doc["id"],
        discipline_id=doc["discipline_id"],
        name=doc["name"],
        leader=doc["leader"],
        members=tuple(
            t.TeamMember(m["name"], t.MemberRole(m["role"]), float(m["fte"]))
            for m in doc.get("members", ())
        ),
        fields=tuple(doc.get("fields", ())),
        lead_expert_id=doc.get("lead_expert_id"),
    )


def _expert_from_doc(doc: dict) -> t.Expert:
    return t.Expert(
        id=doc["id"],
        name=doc["name"],
        affiliation=doc["affiliation"],
        country=doc["country"],
        domains=tuple(doc.get("domains", ())),
        suggested_by=doc.get("suggested_by", "coordinator"),
        status=t.ExpertStatus(doc.get("status", "suggested")),
    )


def _activity_from_doc(doc: dict) -> t.ActivityRecord:
    return t.ActivityRecord(
        team_id=doc["team_id"],
        kind=t.ActivityKind(doc["kind"]),
        year=int(doc["year"]),
        payload=dict(doc.get("payload", {})),
    )


def _form_from_doc(doc: dict) -> t.EvaluationForm:
    returned_at = doc.get("returned_at")
    return t.EvaluationForm(
        expert_id=doc["expert_id"],
        team_id=doc["team_id"],
        scores={t.Indicator(k): v for k, v in doc.get("scores", {}).items()},
        dominant_character=(
            t.DominantCharacter(doc["dominant_character"])
            if doc.get("dominant_character") is not None
            else None
        ),
        comments=dict(doc.get("comments", {})),
        general_comments=tuple(
            t.TaggedComment(c["category"], c["text"])
            for c in doc.get("general_comments", ())
        ),
        returned_at=datetime.fromisoformat(returned_at) if returned_at else None,
    )


def _bibliometrics_from_doc(doc: dict) -> t.BibliometricRecord:
    return t.BibliometricRecord(
        team_id=doc["team_id"],
        publications=tuple(
            (p["field"], float(p["citations"])) for p in doc.get("publications", ())
        ),
        field_baselines={k: float(v) for k, v in doc.get("field_baselines", {}).items()},
    )


def _bibliometrics_to_doc(record: t.BibliometricRecord) -> dict:
    return {
        "team_id": record.team_id,
        "publications": [
            {"field": field, "citations": citations}
            for field, citations in record.publications
        ],
        "field_baselines": dict(record.field_baselines),
    }


def _section_from_doc(doc: dict) -> t.SectionContent:
    records = tuple(
        _activity_from_doc(rec) if isinstance(rec, dict) else rec
        for rec in doc.get("records", ())
    )
    return t.SectionContent(
        text=doc.get("text", ""),
        records=records,
        provenance=t.Provenance(doc.get("provenance", "empty")),
    )


def _file_from_doc(doc: dict) -> t.EvaluationFile:
    return t.EvaluationFile(
        team_id=doc["team_id"],
        window=_pair(doc["window"], "window"),
        sections={k: _section_from_doc(v) for k, v in doc.get("sections", {}).items()},
        snapshot_id=doc.get("snapshot_id", ""),
    )


def _config_from_doc(doc: dict) -> ProjectConfig:
    return ProjectConfig(
        institution=doc.get("institution", ProjectConfig.institution),
        home_country=doc.get("home_country", ProjectConfig.home_country),
        window=_pair(doc.get("window", ProjectConfig.window), "window"),
        window_length=int(doc.get("window_length", ProjectConfig.window_length)),
        reaction_window_days=int(
            doc.get("reaction_window_days", ProjectConfig.reaction_window_days)
        ),
        weighting_policy=doc.get("weighting_policy", ProjectConfig.weighting_policy),
        year_range=_pair(doc.get("year_range", ProjectConfig.year_range), "year_range"),
    )


class ProjectStore:
    """Typed load/save access to one evaluation project directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    # -- low-level document IO ---------------------------------------------

    def _write_doc(self, relpath: str, doc: Any) -> None:
        path = self.root / relpath
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
        path.write_text(text + "\n", encoding="utf-8")

    def _read_doc(self, relpath: str) -> Any:
        path = self.root / relpath
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise StoreCorrupt(str(path), str(exc)) from exc

    def _load(self, relpath: str, parse):
        doc = self._read_doc(relpath)
        try:
            return parse(doc)
        except (KeyError, TypeError, ValueError) as exc:
            raise StoreCorrupt(str(self.root / relpath), str(exc)) from exc

    def _doc_names(self, directory: str) -> list[str]:
        base = self.root / directory
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    # -- config -------------------------------------------------------------

    @property
    def config(self) -> ProjectConfig:
        path = self.root / "config"
        if not path.exists():
            return ProjectConfig()
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            return _config_from_doc(doc)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise StoreCorrupt(str(path), str(exc)) from exc

    def save_config(self, config: ProjectConfig) -> None:
        text = json.dumps(_plain(config), indent=2, sort_keys=True, ensure_ascii=False)
        (self.root / "config").write_text(text + "\n", encoding="utf-8")

    # -- disciplines ---------------------------------------------------------

    def save_discipline(self, discipline: t.Discipline) -> None:
        self._write_doc(f"disciplines/{_check_id(discipline.id)}.json", _plain(discipline))

    def load_discipline(self, discipline_id: str) -> t.Discipline:
        return self._load(f"disciplines/{discipline_id}.json", _discipline_from_doc)

    def load_disciplines(self) -> tuple[t.Discipline, ...]:
        return tuple(
            self.load_discipline(name) for name in self._doc_names("disciplines")
        )

    # -- teams ----------------------------------------------------------------

    def save_team(self, team: t.Team) -> None:
        self._write_doc(f"teams/{_check_id(team.id)}.json", _plain(team))

    def load_team(self, team_id: str) -> t.Team:
        return self._load(f"teams/{team_id}.json", _team_from_doc)

    def load_teams(self, discipline_id: str | None = None) -> tuple[t.Team, ...]:
        teams = tuple(self.load_team(name) for name in self._doc_names("teams"))
        if discipline_id is None:
            return teams
        return tuple(team for team in teams if team.discipline_id == discipline_id)

    # -- experts ---------------------------------------------------------------

    def save_expert(self, expert: t.Expert) -> None:
        self._write_doc(f"experts/{_check_id(expert.id)}.json", _plain(expert))

    def load_expert(self, expert_id: str) -> t.Expert:
        return self._load(f"experts/{expert_id}.json", _expert_from_doc)

    def load_experts(self, status: t.ExpertStatus | None = None) -> tuple[t.Expert, ...]:
        experts = tuple(self.load_expert(name) for name in self._doc_names("experts"))
        if status is None:
            return experts
        return tuple(e for e in experts if e.status is status)

    # -- activities --------------------------------------------------------------

    def save_activities(self, team_id: str, records: Iterable[t.ActivityRecord]) -> None:
        records = tuple(records)
        lo, hi = self.config.year_range
        for record in records:
            if record.team_id != team_id:
                raise ValueError(f"record for {record.team_id} filed under {team_id}")
            if not lo <= record.year <= hi:
                raise ValueError(f"activity year {record.year} outside {lo}..{hi}")
        self._write_doc(f"activities/{_check_id(team_id)}.json", _plain(records))

    def load_activities(self, team_id: str | None = None) -> tuple[t.ActivityRecord, ...]:
        names = [team_id] if team_id is not None else self._doc_names("activities")
        records: list[t.ActivityRecord] = []
        for name in names:
            path = f"activities/{name}.json"
            if team_id is not None and not (self.root / path).exists():
                return ()
            records.extend(self._load(path, lambda doc: [_activity_from_doc(d) for d in doc]))
        return tuple(records)

    # -- forms ----------------------------------------------------------------------

    def save_form(self, form: t.EvaluationForm) -> None:
        name = f"{_check_id(form.team_id)}__{_check_id(form.expert_id)}"
        self._write_doc(f"forms/{name}.json", _plain(form))

    def _load_form(self, name: str) -> t.EvaluationForm:
        form = self._load(f"forms/{name}.json", _form_from_doc)
        violations = t.validate_form(form)
        if violations:
            raise StoreCorrupt(
                str(self.root / f"forms/{name}.json"),
                "; ".join(str(v) for v in violations),
            )
        return form

    def load_forms(self, team_id: str | None = None) -> tuple[t.EvaluationForm, ...]:
        forms = tuple(self._load_form(name) for name in self._doc_names("forms"))
        if team_id is None:
            return forms
        return tuple(f for f in forms if f.team_id == team_id)

    def load_forms_blind(self, team_id: str | None = None) -> tuple[t.BlindForm, ...]:
        """Forms with expert identity stripped, for scoring and reporting."""
        return tuple(form.blind() for form in self.load_forms(team_id))

    # -- bibliometrics ----------------------------------------------------------------

    def save_bibliometrics(self, record: t.BibliometricRecord) -> None:
        self._write_doc(
            f"bibliometrics/{_check_id(record.team_id)}.json",
            _bibliometrics_to_doc(record),
        )

    def load_bibliometrics(self, team_id: str) -> t.BibliometricRecord:
        return self._load(f"bibliometrics/{team_id}.json", _bibliometrics_from_doc)

    def load_all_bibliometrics(self) -> tuple[t.BibliometricRecord, ...]:
        return tuple(
            self.load_bibliometrics(name) for name in self._doc_names("bibliometrics")
        )

    # -- evaluation files (dossiers) ----------------------------------------------------

    def save_file(self, eval_file: t.EvaluationFile) -> None:
        self._write_doc(
            f"state/files/{_check_id(eval_file.team_id)}.json", _plain(eval_file)
        )

    def load_file(self, team_id: str) -> t.EvaluationFile:
        return self._load(f"state/files/{team_id}.json", _file_from_doc)

    def load_files(self) -> tuple[t.EvaluationFile, ...]:
        return tuple(self.load_file(name) for name in self._doc_names("state/files"))

    # -- generic state documents (workflow, panel reports, flags, texts) -----------------

    def save_state_doc(self, name: str, doc: Any) -> None:
        self._write_doc(f"state/{name}.json", doc)

    def load_state_doc(self, name: str, default: Any = None) -> Any:
        path = self.root / f"state/{name}.json"
        if not path.exists():
            return default
        return self._read_doc(f"state/{name}.json")

    def append_audit(self, entry: dict) -> None:
        path = self.root / "state" / "audit.log"
        line = json.dumps(entry, sort_keys=True, ensure_ascii=False)
        with path.open("a", encoding="utf-8") as handle:
            handle.write(line + "\n")

    def read_audit(self) -> list[dict]:
        path = self.root / "state" / "audit.log"
        if not path.exists():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    # -- store-wide views ------------------------------------------------------------------

    def counts(self) -> dict[str, int]:
        return {
            "disciplines": len(self._doc_names("disciplines")),
            "teams": len(self._doc_names("teams")),
            "experts": len(self._doc_names("experts")),
            "forms": len(self._doc_names("forms")),
            "activities": len(self.load_activities()),
            "bibliometrics": len(self._doc_names("bibliometrics")),
        }

    def check_integrity(self) -> list[str]:
        """Verify that every stored reference resolves.

        Returns human-readable violation strings; an empty list means the
        store is referentially consistent.
        """
        problems: list[str] = []
        disciplines = {d.id: d for d in self.load_disciplines()}
        teams = {team.id: team for team in self.load_teams()}
        experts = {e.id: e for e in self.load_experts()}
        for team in teams.values():
            if team.discipline_id not in disciplines:
                problems.append(
                    f"team {team.id}: unknown discipline {team.discipline_id}"
                )
            if team.lead_expert_id and team.lead_expert_id not in experts:
                problems.append(
                    f"team {team.id}: unknown lead expert {team.lead_expert_id}"
                )
        for form in self.load_forms():
            if form.team_id not in teams:
                problems.append(f"form {form.team_id}__{form.expert_id}: unknown team")
            if form.expert_id not in experts:
                problems.append(f"form {form.team_id}__{form.expert_id}: unknown expert")
        for record in self.load_activities():
            if record.team_id not in teams:
                problems.append(f"activity for unknown team {record.team_id}")
                continue
            if record.kind is t.ActivityKind.PUBLICATION:
                team = teams[record.team_id]
                discipline = disciplines.get(team.discipline_id)
                categories = discipline.categories if discipline else ()
                category = record.payload.get("category")
                if categories and category not in categories:
                    problems.append(
                        f"team {record.team_id}: publication category {category!r} "
                        f"not in the discipline's category list"
                    )
        for record in self.load_all_bibliometrics():
            if record.team_id not in teams:
                problems.append(f"bibliometrics for unknown team {record.team_id}")
            for field, _ in record.publications:
                if field not in record.field_baselines:
                    problems.append(
                        f"bibliometrics {record.team_id}: no baseline for field {field!r}"
                    )
        return problems

    def snapshot_id(self) -> str:
        """Content hash of all data documents; changes whenever data changes."""
        digest = hashlib.sha256()
        for directory in _DATA_DIRS:
            base = self.root / directory
            if not base.is_dir():
                continue
            for path in sorted(base.glob("*.json")):
                digest.update(path.name.encode())
                digest.update(path.read_bytes())
        return digest.hexdigest()[:16]

    def verify(self) -> None:
        """Parse every document, raising StoreCorrupt on the first bad one."""
        self.load_disciplines()
        self.load_teams()
        self.load_experts()
        self.load_activities()
        self.load_forms()
        self.load_all_bibliometrics()
        self.load_files()


def open_project(path: str | Path, verify: bool = True) -> ProjectStore:
    """Open (or initialize) the project store at ``path``.

    Creates the canonical directory layout on first open. With ``verify``
    (the default) every stored document is parsed and validated, so a corrupt
    file is reported immediately with its path.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for directory in _DATA_DIRS + ("state",):
        (root / directory).mkdir(exist_ok=True)
    store = ProjectStore(root)
    if verify:
        store.verify()
    return store
