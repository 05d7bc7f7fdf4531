"""Parse raw model output into a rationale and a category set.

Expected completion shape::

    ### Reasoning: <free text>
    ### Categories: '1', '7'

Strict grammar
--------------
The stripped text must start with ``### Reasoning:``, contain exactly one
``### Categories:`` marker at a line start, and everything after that marker
must be a comma-separated list of single-quoted integers in 1..12 with no
duplicates and no trailing prose. The rationale is the text between the two
markers. Violations raise a typed error.

Lenient grammar
---------------
Tries strict first; on a strict match the result carries mode_used="strict"
and no warnings. Otherwise recovery proceeds and each recovery class used
appends exactly one warning:

- ``section-headers``: markers found case-insensitively, with or without the
  ``###`` prefix, anywhere in the text (not only at line starts).
- ``multiple-categories-sections``: several category markers; the last wins.
- ``number-format``: ids taken as double-quoted or bare integers. Quoted
  tokens win when present; otherwise every bare integer in the segment is
  scanned and bare out-of-range numbers are ignored (``out-of-range-ignored``
  warning) as prose noise.
- ``trailing-text``: prose after a canonical quoted list is ignored.
- ``duplicates``: repeated ids collapsed.
- ``category-names``: with no numeric token at all, full category names are
  resolved case-insensitively against the taxonomy.

Quoted out-of-range ids are an error in every mode: the text explicitly
claims a category that does not exist. A rationale containing a literal
``### Categories:`` marker is unparseable in strict mode by construction;
this ambiguity is documented rather than patched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import PpaceError
from .taxonomy import DEFAULT_TAXONOMY, Taxonomy, category_set_from

STRICT = "strict"
LENIENT = "lenient"

_REASONING_MARK = "### Reasoning:"
_CATEGORIES_MARK = "### Categories:"
_STRICT_LIST = re.compile(r"'\d{1,3}'(?:\s*,\s*'\d{1,3}')*")
_QUOTED_ID = re.compile(r"['\"](\d{1,3})['\"]")
_BARE_ID = re.compile(r"\d{1,3}")
_LOOSE_REASONING = re.compile(r"(?:#+\s*)?\breasoning\b\s*:", re.IGNORECASE)
_LOOSE_CATEGORIES = re.compile(r"(?:#+\s*)?\bcategor(?:ies|y)\b\s*:", re.IGNORECASE)


class ParseError(PpaceError):
    pass


class MissingReasoningSectionError(ParseError):
    pass


class MissingCategoriesSectionError(ParseError):
    pass


class MultipleCategoriesSectionsError(ParseError):
    pass


class EmptyCategoriesError(ParseError):
    pass


class OutOfRangeCategoryInOutputError(ParseError):
    def __init__(self, category_id: int):
        self.category_id = category_id
        super().__init__(f"model output names category {category_id}, valid ids are 1..12")


class MalformedNumberError(ParseError):
    def __init__(self, fragment: str):
        self.fragment = fragment
        super().__init__(f"cannot read category list from {fragment!r}")


class DuplicateCategoryError(ParseError):
    def __init__(self, category_id: int):
        self.category_id = category_id
        super().__init__(f"category {category_id} listed more than once")


@dataclass
class ParsedOutput:
    rationale: str
    categories: tuple[int, ...]
    warnings: list[str] = field(default_factory=list)
    mode_used: str = STRICT


def _checked_ids(raw_ids: list[int]) -> tuple[int, ...]:
    for i in raw_ids:
        if i < 1 or i > 12:
            raise OutOfRangeCategoryInOutputError(i)
    return category_set_from(raw_ids)


def _parse_strict(text: str) -> ParsedOutput:
    stripped = text.strip()
    if not stripped.startswith(_REASONING_MARK):
        raise MissingReasoningSectionError(f"text does not start with {_REASONING_MARK!r}")
    occurrences = stripped.count(_CATEGORIES_MARK)
    if occurrences == 0:
        raise MissingCategoriesSectionError(f"no {_CATEGORIES_MARK!r} marker")
    if occurrences > 1:
        raise MultipleCategoriesSectionsError(f"{occurrences} {_CATEGORIES_MARK!r} markers")
    match = re.search(r"\n[ \t]*" + re.escape(_CATEGORIES_MARK), stripped)
    if match is None:
        raise MissingCategoriesSectionError(f"{_CATEGORIES_MARK!r} not at a line start")
    rationale = stripped[len(_REASONING_MARK):match.start()].strip()
    segment = stripped[match.end():].strip()
    if not segment:
        raise EmptyCategoriesError("empty category list")
    if _STRICT_LIST.fullmatch(segment) is None:
        raise MalformedNumberError(segment[:80])
    raw_ids = [int(m) for m in re.findall(r"'(\d{1,3})'", segment)]
    for i in raw_ids:
        if raw_ids.count(i) > 1:
            raise DuplicateCategoryError(i)
    return ParsedOutput(rationale=rationale, categories=_checked_ids(raw_ids), mode_used=STRICT)


def _lenient_ids(segment: str, warnings: list[str], taxonomy: Taxonomy) -> tuple[int, ...]:
    quoted = [int(m) for m in _QUOTED_ID.findall(segment)]
    if quoted:
        if _STRICT_LIST.fullmatch(segment):
            pass  # list itself canonical; strict failed elsewhere (headers, duplicates)
        elif _STRICT_LIST.match(segment) and '"' not in segment:
            warnings.append("trailing-text")
        else:
            warnings.append("number-format")
        ids = quoted
    else:
        bare = [int(m) for m in _BARE_ID.findall(segment)]
        ids = [i for i in bare if 1 <= i <= 12]
        if bare:
            warnings.append("number-format")
            if len(ids) < len(bare):
                warnings.append("out-of-range-ignored")
            if not ids:
                raise OutOfRangeCategoryInOutputError(bare[0])
        else:
            for cat in taxonomy.categories:
                if re.search(re.escape(cat.name), segment, re.IGNORECASE):
                    ids.append(cat.id)
            if ids:
                warnings.append("category-names")
    if not ids:
        raise EmptyCategoriesError("no category ids or names found")
    if len(set(ids)) < len(ids):
        warnings.append("duplicates")
    return _checked_ids(ids)


def parse(text: str, mode: str = STRICT, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> ParsedOutput:
    """Parse model output; raises a ParseError subclass when unrecoverable."""
    if mode not in (STRICT, LENIENT):
        raise ValueError(f"mode must be {STRICT!r} or {LENIENT!r}")
    try:
        return _parse_strict(text)
    except ParseError:
        if mode == STRICT:
            raise

    warnings: list[str] = []
    stripped = text.strip()
    cat_marks = list(_LOOSE_CATEGORIES.finditer(stripped))
    if not cat_marks:
        raise MissingCategoriesSectionError("no category marker found")
    if len(cat_marks) > 1:
        warnings.append("multiple-categories-sections")
    cat_mark = cat_marks[-1]

    reasoning_marks = [
        m for m in _LOOSE_REASONING.finditer(stripped) if m.start() < cat_mark.start()
    ]
    if not reasoning_marks:
        raise MissingReasoningSectionError("no reasoning marker before the category list")
    head = reasoning_marks[0]
    cat_at_line_start = stripped[:cat_mark.start()].rstrip(" \t").endswith("\n")
    if (
        head.group(0) != _REASONING_MARK
        or cat_mark.group(0) != _CATEGORIES_MARK
        or head.start() != 0
        or not cat_at_line_start
    ):
        warnings.append("section-headers")
    rationale = stripped[head.end():cat_mark.start()].strip()
    categories = _lenient_ids(stripped[cat_mark.end():].strip(), warnings, taxonomy)
    return ParsedOutput(
        rationale=rationale, categories=categories, warnings=warnings, mode_used=LENIENT
    )


@dataclass
class ParseFailure:
    ref: str
    error: str
    snippet: str


def extract_all(
    outputs: Iterable[tuple[str, str | Exception]],
    mode: str = LENIENT,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> tuple[list[tuple[str, ParsedOutput]], list[ParseFailure]]:
    """Partition raw outputs into parsed results and per-item failures.

    Never raises on a malformed item; transport errors passed in as Exception
    values become failures with the exception's class name.
    """
    parsed: list[tuple[str, ParsedOutput]] = []
    failures: list[ParseFailure] = []
    for ref, raw in outputs:
        if isinstance(raw, Exception):
            code = getattr(raw, "code", type(raw).__name__)
            failures.append(ParseFailure(ref=ref, error=code, snippet=str(raw)[:200]))
            continue
        try:
            parsed.append((ref, parse(raw, mode=mode, taxonomy=taxonomy)))
        except ParseError as exc:
            failures.append(ParseFailure(ref=ref, error=exc.code, snippet=raw[:200]))
    return parsed, failures


def write_failure_report(failures: Iterable[ParseFailure], path) -> None:
    import csv
    from pathlib import Path

    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grant_id", "error", "snippet"])
        for f in failures:
            writer.writerow([f.ref, f.error, f.snippet])
