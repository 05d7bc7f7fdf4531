"""Grant-record ingestion, cleaning, truncation, and the append-only project store.

Records arrive as CSV or JSONL. A record must carry a grant id and a title;
abstract and gold labels are optional. Later records for the same grant_id
supersede earlier ones, so a snapshot holds at most one record per grant.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

from .errors import PpaceError
from .store import AppendLog
from .taxonomy import OutOfRangeCategoryError, category_set_from, parse_categories_field

SPLITS = ("train", "test", "unassigned")
STATUSES = ("unverified", "complete", "verified", "disputed")


class FileUnreadableError(PpaceError):
    pass


class EmptyCorpusError(PpaceError):
    pass


def clean_text(text: str) -> str:
    """Strip control characters and collapse whitespace runs to single spaces.

    Punctuation is preserved; abstracts are scientific prose. Idempotent.
    """
    kept = "".join(
        ch for ch in text if ch.isspace() or unicodedata.category(ch) not in ("Cc", "Cf", "Cs")
    )
    return " ".join(kept.split())


def whitespace_tokens(text: str) -> list[str]:
    return text.split()


@dataclass
class Project:
    grant_id: str
    title: str
    abstract: str = ""
    funder: str = ""
    gold: tuple[int, ...] | None = None
    split: str = "unassigned"
    status: str = "complete"
    translated: bool = False
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "grant_id": self.grant_id,
            "title": self.title,
            "abstract": self.abstract,
            "funder": self.funder,
            "gold": list(self.gold) if self.gold is not None else None,
            "split": self.split,
            "status": self.status,
            "translated": self.translated,
            "truncated": self.truncated,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "Project":
        gold = row.get("gold")
        return cls(
            grant_id=row["grant_id"],
            title=row["title"],
            abstract=row.get("abstract", ""),
            funder=row.get("funder") or "",
            gold=category_set_from(gold) if gold else None,
            split=row.get("split", "unassigned"),
            status=row.get("status", "complete"),
            translated=bool(row.get("translated", False)),
            truncated=bool(row.get("truncated", False)),
        )


def truncate_abstract(
    project: Project,
    cap: int = 512,
    tokenizer: Callable[[str], list[str]] = whitespace_tokens,
) -> Project:
    """Cap the abstract at ``cap`` tokens; the title is never touched.

    The default token is a whitespace-delimited word; pass a different
    ``tokenizer`` to change the rule. Idempotent at a fixed cap.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    tokens = tokenizer(project.abstract)
    if len(tokens) <= cap:
        return project
    return replace(project, abstract=" ".join(tokens[:cap]), truncated=True)


@dataclass
class IngestProblem:
    ordinal: int
    error: str
    detail: str


@dataclass
class IngestResult:
    count: int
    problems: list[IngestProblem] = field(default_factory=list)


class CorpusStore:
    """Append-only project log with a last-write-wins snapshot view."""

    def __init__(self, path: str | Path):
        self._log = AppendLog(path)

    @property
    def path(self) -> Path:
        return self._log.path

    def append(self, project: Project) -> None:
        self._log.append(project.to_dict())

    def snapshot(self, split: str | None = None) -> list[Project]:
        """Latest version of each project, optionally filtered, ordered by grant_id."""
        latest: dict[str, Project] = {}
        for row in self._log.records():
            project = Project.from_dict(row)
            latest[project.grant_id] = project
        projects = [p for p in latest.values() if split is None or p.split == split]
        return sorted(projects, key=lambda p: p.grant_id)

    def get(self, grant_id: str) -> Project | None:
        found = None
        for row in self._log.records():
            if row["grant_id"] == grant_id:
                found = Project.from_dict(row)
        return found


def _gold_from_csv_row(row: dict) -> tuple[int, ...] | None:
    raw = (row.get("categories") or "").strip()
    if raw:
        return parse_categories_field(raw) or None
    # Indicator column block: category_1..category_12 (or cat_1..cat_12) with 0/1 cells.
    ids = []
    for key, value in row.items():
        if key is None:
            continue
        name = key.strip().lower()
        for prefix in ("category_", "cat_"):
            if name.startswith(prefix) and name[len(prefix):].isdigit():
                if str(value).strip() in ("1", "true", "True", "yes"):
                    ids.append(int(name[len(prefix):]))
    return category_set_from(ids) if ids else None


def _iter_raw_records(path: Path, fmt: str) -> Iterable[dict]:
    if fmt == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            yield from csv.DictReader(fh)
    elif fmt == "jsonl":
        import json

        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def ingest(
    store: CorpusStore,
    path: str | Path,
    fmt: str = "csv",
    split: str = "unassigned",
) -> IngestResult:
    """Clean and append every valid record in ``path``; report the invalid ones.

    A record is valid when, after cleaning, it still has a non-empty grant id
    and title and its category labels (if any) parse to ids in 1..12. Invalid
    records are skipped and reported, never silently dropped.
    """
    path = Path(path)
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}")
    try:
        raw_records = list(_iter_raw_records(path, fmt))
    except (OSError, UnicodeDecodeError, ValueError) as exc:
        raise FileUnreadableError(f"{path}: {exc}") from exc

    result = IngestResult(count=0)
    for ordinal, row in enumerate(raw_records, 1):
        grant_id = clean_text(str(row.get("grant_id") or ""))
        title = clean_text(str(row.get("title") or ""))
        if not grant_id:
            result.problems.append(IngestProblem(ordinal, "MissingRequiredField", "grant_id"))
            continue
        if not title:
            result.problems.append(IngestProblem(ordinal, "MissingRequiredField", "title"))
            continue
        try:
            if fmt == "csv":
                gold = _gold_from_csv_row(row)
            else:
                # store line-records use "gold", external JSONL uses "categories"
                raw_gold = row.get("categories", row.get("gold"))
                if raw_gold in (None, "", []):
                    gold = None
                elif isinstance(raw_gold, str):
                    gold = parse_categories_field(raw_gold) or None
                else:
                    gold = category_set_from(raw_gold) or None
        except (ValueError, OutOfRangeCategoryError) as exc:
            result.problems.append(IngestProblem(ordinal, "BadCategoryLabel", str(exc)))
            continue

        record_split = str(row.get("split") or "").strip() or split
        if record_split not in SPLITS:
            result.problems.append(IngestProblem(ordinal, "BadSplit", record_split))
            continue
        store.append(
            Project(
                grant_id=grant_id,
                title=title,
                abstract=clean_text(str(row.get("abstract") or "")),
                funder=clean_text(str(row.get("funder") or "")),
                gold=gold,
                split=record_split,
                status=str(row.get("status") or "complete"),
                translated=str(row.get("translated") or "").strip().lower() in ("1", "true", "yes"),
            )
        )
        result.count += 1
    return result
