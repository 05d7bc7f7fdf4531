"""Rationale-augmented instruction-tuning dataset construction and export,
plus the low-rank adapter merge used to sanity-check merged checkpoints.

Gold labels are authoritative: the teacher model only explains why the
human-assigned categories fit, and every exported completion pairs the
teacher's rationale with the gold category list, reasoning first. Teacher
outputs whose own category list disagrees with gold are kept but flagged;
outputs that cannot be parsed into a usable rationale are excluded from the
default export and accounted for in the build report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gateway, output_parser
from .corpus import EmptyCorpusError, Project, truncate_abstract
from .errors import PpaceError, UnwritableDirectoryError
from .prompting import build_finetune_prompt, render_completion
from .taxonomy import DEFAULT_TAXONOMY, Taxonomy, format_categories

AGREE = "agree"
TEACHER_DISAGREES = "teacher_disagrees"
UNPARSEABLE_TEACHER = "unparseable_teacher"
TRANSPORT_ERROR = "transport_error"
INVALID_PROJECT = "invalid_project"

EXPORTED_FLAGS = (AGREE, TEACHER_DISAGREES)

# Training-run settings shipped alongside every export so downstream trainers
# do not have to look them up. The merge below must match the trainer that
# consumes these: it scales the adapter product by rank/alpha, not alpha/rank.
TRAINING_HYPERPARAMETERS = {
    "total_batch_size": 8,
    "gradient_accumulation_steps": 4,
    "learning_rate": "2e-4",
    "lr_scheduler": "linear",
    "epochs": 2,
    "lora_rank": 128,
    "lora_alpha": 256,
    "lora_dropout": 0.05,
}


class ShapeMismatchError(PpaceError):
    pass


@dataclass(frozen=True)
class SFTRecord:
    grant_id: str
    prompt: str
    completion: str
    prompt_end: int
    teacher_model: str
    agreement_flag: str


@dataclass(frozen=True)
class BuildRow:
    grant_id: str
    flag: str
    detail: str = ""


@dataclass
class BuildReport:
    rows: list[BuildRow]

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for row in self.rows:
            out[row.flag] = out.get(row.flag, 0) + 1
        return out


_GOLD_BLOCK = (
    "\n\n    Expert annotators have already assigned this project the "
    "categories: {gold}. Write the reasoning that justifies exactly these "
    "categories, referencing the title and abstract, and do not introduce any "
    "other categories. Respond in the specified format, restating the "
    "assigned categories."
)


def build_teacher_prompt(project: Project, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> str:
    """Rationale-generation prompt: the fine-tune prompt plus the gold labels."""
    base = build_finetune_prompt(project, taxonomy).text
    head, tail = base.rsplit("\n    [/INST]", 1)
    return head + _GOLD_BLOCK.format(gold=format_categories(project.gold)) + "\n    [/INST]" + tail


def build_sft_dataset(
    projects: Sequence[Project],
    teacher: gateway.EndpointConfig,
    abstract_cap: int = 512,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> tuple[list[SFTRecord], BuildReport]:
    """One completion request per project; returns valid records and a full report.

    The report has one row per input project, so exported plus excluded
    always equals the input count.
    """
    if not projects:
        raise EmptyCorpusError("no projects to distill")

    usable: list[tuple[Project, str]] = []
    rows: list[BuildRow] = []
    for project in sorted(projects, key=lambda p: p.grant_id):
        if not project.gold:
            rows.append(BuildRow(project.grant_id, INVALID_PROJECT, "no gold labels"))
            continue
        capped = truncate_abstract(project, cap=abstract_cap)
        try:
            usable.append((capped, build_teacher_prompt(capped, taxonomy)))
        except PpaceError as exc:
            rows.append(BuildRow(project.grant_id, INVALID_PROJECT, exc.code))

    outcomes = gateway.complete_batch([prompt for _, prompt in usable], teacher)

    records: list[SFTRecord] = []
    for (project, _), outcome in zip(usable, outcomes):
        if isinstance(outcome, gateway.GatewayError):
            rows.append(BuildRow(project.grant_id, TRANSPORT_ERROR, outcome.code))
            continue
        try:
            parsed = output_parser.parse(outcome.raw_text, mode=output_parser.LENIENT,
                                         taxonomy=taxonomy)
            completion = render_completion(parsed.rationale, project.gold)
            echo = output_parser.parse(completion, mode=output_parser.STRICT)
            if echo.categories != project.gold:
                raise output_parser.MalformedNumberError("completion does not echo gold labels")
        except PpaceError as exc:
            rows.append(BuildRow(project.grant_id, UNPARSEABLE_TEACHER, exc.code))
            continue
        flag = AGREE if parsed.categories == project.gold else TEACHER_DISAGREES
        prompt_bundle = build_finetune_prompt(project, taxonomy)
        records.append(
            SFTRecord(
                grant_id=project.grant_id,
                prompt=prompt_bundle.text,
                completion=completion,
                prompt_end=prompt_bundle.prompt_end,
                teacher_model=outcome.model_name,
                agreement_flag=flag,
            )
        )
        rows.append(BuildRow(project.grant_id, flag))

    rows.sort(key=lambda r: r.grant_id)
    return records, BuildReport(rows=rows)


FORMAT_PROMPT_COMPLETION = "prompt_completion_lines"
FORMAT_CHAT = "chat_lines"


def export(
    records: Sequence[SFTRecord],
    fmt: str,
    path: str | Path,
    include_flags: Sequence[str] = EXPORTED_FLAGS,
) -> dict:
    """Write the dataset plus a sidecar metadata file; returns a manifest."""
    if fmt not in (FORMAT_PROMPT_COMPLETION, FORMAT_CHAT):
        raise ValueError(f"unknown export format {fmt!r}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = path.open("w", encoding="utf-8")
    except OSError as exc:
        raise UnwritableDirectoryError(str(exc)) from exc

    kept = [r for r in records if r.agreement_flag in include_flags]
    with fh:
        for rec in kept:
            if fmt == FORMAT_PROMPT_COMPLETION:
                row = {
                    "grant_id": rec.grant_id,
                    "prompt": rec.prompt,
                    "completion": rec.completion,
                    "prompt_end": rec.prompt_end,
                    "teacher_model": rec.teacher_model,
                    "agreement_flag": rec.agreement_flag,
                }
            else:
                row = {
                    "grant_id": rec.grant_id,
                    "messages": [
                        {"role": "user", "content": rec.prompt},
                        {"role": "assistant", "content": rec.completion},
                    ],
                    "teacher_model": rec.teacher_model,
                    "agreement_flag": rec.agreement_flag,
                }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(
        json.dumps(
            {
                "format": fmt,
                "record_count": len(kept),
                "loss_mask": "prompt_end is a character offset; train on text after it",
                "training_hyperparameters": TRAINING_HYPERPARAMETERS,
            },
            ensure_ascii=False,
            sort_keys=True,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return {"data": str(path), "sidecar": str(sidecar), "exported": len(kept)}


def read_sft_records(path: str | Path) -> list[SFTRecord]:
    """Read back a prompt_completion_lines export."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        records.append(
            SFTRecord(
                grant_id=row["grant_id"],
                prompt=row["prompt"],
                completion=row["completion"],
                prompt_end=int(row["prompt_end"]),
                teacher_model=row["teacher_model"],
                agreement_flag=row["agreement_flag"],
            )
        )
    return records


@dataclass(frozen=True)
class LowRankSpec:
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    rank: int
    alpha: float

    def __post_init__(self):
        d = self.w.shape[0] if self.w.ndim == 2 else -1
        if self.w.ndim != 2 or self.w.shape != (d, d):
            raise ShapeMismatchError(f"w must be square, got {self.w.shape}")
        if self.a.shape != (d, self.rank) or self.b.shape != (self.rank, d):
            raise ShapeMismatchError(
                f"adapters must be ({d},{self.rank}) and ({self.rank},{d}), "
                f"got {self.a.shape} and {self.b.shape}"
            )
        if not 1 <= self.rank < d:
            raise ShapeMismatchError(f"rank must be in [1, {d}), got {self.rank}")
        if self.alpha <= 0:
            raise ShapeMismatchError("alpha must be positive")


def merge_low_rank(spec: LowRankSpec) -> np.ndarray:
    """Merged weights: original plus the adapter product scaled by rank/alpha."""
    return spec.w + (spec.rank / spec.alpha) * (spec.a @ spec.b)
