"""Multilabel evaluation: per-category precision/recall/F1 with raw counts,
macro and micro aggregates, and per-category improvement deltas between runs.

Conventions: a ratio with a zero denominator is 0, F1 is 0 when P+R is 0,
macro values are unweighted means over all 12 categories (including
zero-support ones), and micro F1 is the harmonic mean of pooled precision
and recall. An empty predicted set (for example a parse failure) is a valid
prediction that costs recall.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import PpaceError, UnwritableDirectoryError
from .taxonomy import DEFAULT_TAXONOMY, category_set_from, format_categories, parse_categories_field

CATEGORY_IDS = tuple(range(1, 13))


class EmptyRecordsError(PpaceError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    grant_id: str
    gold: tuple[int, ...]
    predicted: tuple[int, ...]

    def __post_init__(self):
        if not self.gold:
            raise ValueError(f"record {self.grant_id}: gold labels must be non-empty")


@dataclass(frozen=True)
class CategoryScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class Aggregate:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    per_category: dict[int, CategoryScore]
    macro: Aggregate
    micro: Aggregate
    n_records: int


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


def evaluate(records: Sequence[PredictionRecord]) -> EvalReport:
    if not records:
        raise EmptyRecordsError("no prediction records")
    tp = {c: 0 for c in CATEGORY_IDS}
    fp = {c: 0 for c in CATEGORY_IDS}
    fn = {c: 0 for c in CATEGORY_IDS}
    for rec in records:
        gold, pred = set(rec.gold), set(rec.predicted)
        for c in CATEGORY_IDS:
            if c in pred and c in gold:
                tp[c] += 1
            elif c in pred:
                fp[c] += 1
            elif c in gold:
                fn[c] += 1

    per_category = {}
    for c in CATEGORY_IDS:
        p = _ratio(tp[c], tp[c] + fp[c])
        r = _ratio(tp[c], tp[c] + fn[c])
        per_category[c] = CategoryScore(tp[c], fp[c], fn[c], p, r, _f1(p, r))

    macro = Aggregate(
        precision=sum(s.precision for s in per_category.values()) / len(CATEGORY_IDS),
        recall=sum(s.recall for s in per_category.values()) / len(CATEGORY_IDS),
        f1=sum(s.f1 for s in per_category.values()) / len(CATEGORY_IDS),
    )
    sum_tp, sum_fp, sum_fn = sum(tp.values()), sum(fp.values()), sum(fn.values())
    micro_p = _ratio(sum_tp, sum_tp + sum_fp)
    micro_r = _ratio(sum_tp, sum_tp + sum_fn)
    micro = Aggregate(precision=micro_p, recall=micro_r, f1=_f1(micro_p, micro_r))
    return EvalReport(per_category=per_category, macro=macro, micro=micro, n_records=len(records))


@dataclass(frozen=True)
class Delta:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ImprovementReport:
    per_category: dict[int, Delta]
    macro: Delta
    micro: Delta


def compare(base: EvalReport, fine: EvalReport) -> ImprovementReport:
    """Per-measure deltas, fine minus base."""
    per_category = {
        c: Delta(
            precision=fine.per_category[c].precision - base.per_category[c].precision,
            recall=fine.per_category[c].recall - base.per_category[c].recall,
            f1=fine.per_category[c].f1 - base.per_category[c].f1,
        )
        for c in CATEGORY_IDS
    }
    return ImprovementReport(
        per_category=per_category,
        macro=Delta(
            fine.macro.precision - base.macro.precision,
            fine.macro.recall - base.macro.recall,
            fine.macro.f1 - base.macro.f1,
        ),
        micro=Delta(
            fine.micro.precision - base.micro.precision,
            fine.micro.recall - base.micro.recall,
            fine.micro.f1 - base.micro.f1,
        ),
    )


def report_emit(report: EvalReport, path: str | Path) -> Path:
    """Twelve category rows plus macro and micro summary rows."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UnwritableDirectoryError(str(exc)) from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "name", "tp", "fp", "fn", "precision", "recall", "f1"])
        for c in CATEGORY_IDS:
            s = report.per_category[c]
            writer.writerow(
                [c, DEFAULT_TAXONOMY.name_of(c), s.tp, s.fp, s.fn,
                 f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}"]
            )
        tp = sum(s.tp for s in report.per_category.values())
        fp = sum(s.fp for s in report.per_category.values())
        fn = sum(s.fn for s in report.per_category.values())
        writer.writerow(
            ["macro", "", "", "", "",
             f"{report.macro.precision:.4f}", f"{report.macro.recall:.4f}", f"{report.macro.f1:.4f}"]
        )
        writer.writerow(
            ["micro", "", tp, fp, fn,
             f"{report.micro.precision:.4f}", f"{report.micro.recall:.4f}", f"{report.micro.f1:.4f}"]
        )
    return path


def improvement_emit(base: EvalReport, fine: EvalReport, path: str | Path) -> Path:
    imp = compare(base, fine)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UnwritableDirectoryError(str(exc)) from exc
    with fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["category", "name", "base_p", "base_r", "base_f1",
             "fine_p", "fine_r", "fine_f1", "p_imp", "r_imp", "f1_imp"]
        )
        rows = [(str(c), DEFAULT_TAXONOMY.name_of(c), base.per_category[c], fine.per_category[c],
                 imp.per_category[c]) for c in CATEGORY_IDS]
        rows.append(("macro", "", base.macro, fine.macro, imp.macro))
        rows.append(("micro", "", base.micro, fine.micro, imp.micro))
        for label, name, b, f, d in rows:
            writer.writerow(
                [label, name,
                 f"{b.precision:.4f}", f"{b.recall:.4f}", f"{b.f1:.4f}",
                 f"{f.precision:.4f}", f"{f.recall:.4f}", f"{f.f1:.4f}",
                 f"{d.precision:.4f}", f"{d.recall:.4f}", f"{d.f1:.4f}"]
            )
    return path


def write_predictions(rows: Iterable[tuple[str, tuple[int, ...] | None, tuple[int, ...], str]],
                      path: str | Path) -> Path:
    """Prediction file rows: grant_id, gold, predicted (canonical text), error class."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grant_id", "gold", "predicted", "error"])
        for grant_id, gold, predicted, error in rows:
            writer.writerow(
                [grant_id,
                 format_categories(gold) if gold else "",
                 format_categories(predicted) if predicted else "",
                 error]
            )
    return path


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                PredictionRecord(
                    grant_id=row["grant_id"],
                    gold=category_set_from(parse_categories_field(row.get("gold") or "")),
                    predicted=category_set_from(parse_categories_field(row.get("predicted") or "")),
                )
            )
    return records
