"""Pairwise model-selection harness: sample projects, collect two candidates'
outputs for the same few-shot prompt, and ask a judge endpoint to pick a
winner per case given the human labels.

Candidate outputs are anonymized as Response 1 and Response 2 with the slot
order randomized per case from the run seed, a standard position-bias
control; the recorded slot pattern makes every run reproducible. Sampling
and slot draws share one SplitMix64 stream, so a (corpus, n, seed) triple
fully determines the run shape.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import gateway, output_parser
from .corpus import Project
from .errors import PpaceError
from .prng import SplitMix64
from .prompting import build_fewshot_prompt, fill_placeholders, judge_template
from .taxonomy import DEFAULT_TAXONOMY, Taxonomy, format_categories

WINNER_A = "A"
WINNER_B = "B"
TIE = "tie"

_VERDICT_LINE = re.compile(r"#+\s*verdict\s*:\s*(.+)", re.IGNORECASE)
_SLOT_MENTION = re.compile(r"response\s*([12])|\btie\b", re.IGNORECASE)


class InsufficientCorpusError(PpaceError):
    pass


class MissingVerdictError(PpaceError):
    pass


@dataclass
class CandidateOutput:
    raw_text: str
    parsed: output_parser.ParsedOutput | None
    parse_error: str = ""

    @property
    def warning_count(self) -> int:
        return len(self.parsed.warnings) if self.parsed else 0


@dataclass
class AdjudicationCase:
    project: Project
    prompt: str
    model_a: str
    model_b: str
    output_a: CandidateOutput
    output_b: CandidateOutput


@dataclass
class Verdict:
    case_ref: str
    winner: str | None
    judge_rationale: str
    slot_of_a: int
    warnings_a: int
    warnings_b: int
    error: str = ""


@dataclass
class AdjudicationRun:
    seed: int
    sampled_ids: list[str]
    slots_of_a: list[int]
    cases: list[AdjudicationCase]
    verdicts: list[Verdict]


@dataclass
class TallySummary:
    wins_a: int
    wins_b: int
    ties: int
    warnings_a: int
    warnings_b: int
    failures: int


def sample_cases(projects: Sequence[Project], n: int = 10, seed: int = 0) -> list[Project]:
    """Uniform sample without replacement from labeled projects, grant_id order in."""
    labeled = [p for p in sorted(projects, key=lambda p: p.grant_id) if p.gold]
    if len(labeled) < n:
        raise InsufficientCorpusError(f"need {n} labeled projects, have {len(labeled)}")
    return SplitMix64(seed).sample(labeled, n)


def build_judge_prompt(
    project: Project, response_1: str, response_2: str, taxonomy: Taxonomy = DEFAULT_TAXONOMY
) -> str:
    return fill_placeholders(
        judge_template(),
        {
            "gold": format_categories(project.gold),
            "title": project.title,
            "abstract": project.abstract,
            "response_1": response_1,
            "response_2": response_2,
        },
    )


def parse_verdict(text: str) -> str:
    """Slot verdict from judge text: '1', '2', or 'tie'.

    Prefers an explicit verdict line; otherwise the last slot mention wins.
    """
    line = _VERDICT_LINE.search(text)
    scope = line.group(1) if line else text
    matches = list(_SLOT_MENTION.finditer(scope))
    if not matches:
        raise MissingVerdictError(f"no verdict found in {text[:120]!r}")
    last = matches[-1]
    return last.group(1) if last.group(1) else TIE


def _verdict_for_case(
    case: AdjudicationCase,
    judge: gateway.EndpointConfig,
    slot_of_a: int,
    taxonomy: Taxonomy,
) -> Verdict:
    base = dict(
        case_ref=case.project.grant_id,
        slot_of_a=slot_of_a,
        warnings_a=case.output_a.warning_count,
        warnings_b=case.output_b.warning_count,
    )
    if case.output_a.parse_error and not case.output_a.raw_text:
        return Verdict(winner=None, judge_rationale="", error=case.output_a.parse_error, **base)
    if case.output_b.parse_error and not case.output_b.raw_text:
        return Verdict(winner=None, judge_rationale="", error=case.output_b.parse_error, **base)

    first, second = (
        (case.output_a, case.output_b) if slot_of_a == 1 else (case.output_b, case.output_a)
    )
    prompt = build_judge_prompt(case.project, first.raw_text, second.raw_text, taxonomy)
    try:
        result = gateway.complete(prompt, judge)
        slot = parse_verdict(result.raw_text)
    except (gateway.GatewayError, MissingVerdictError) as exc:
        return Verdict(winner=None, judge_rationale="", error=exc.code, **base)
    if slot == TIE:
        winner = TIE
    elif (slot == "1") == (slot_of_a == 1):
        winner = WINNER_A
    else:
        winner = WINNER_B
    return Verdict(winner=winner, judge_rationale=result.raw_text, error="", **base)


def run_adjudication(
    projects: Sequence[Project],
    endpoint_a: gateway.EndpointConfig,
    endpoint_b: gateway.EndpointConfig,
    judge: gateway.EndpointConfig,
    n: int = 10,
    seed: int = 0,
    taxonomy: Taxonomy = DEFAULT_TAXONOMY,
) -> AdjudicationRun:
    rng = SplitMix64(seed)
    labeled = [p for p in sorted(projects, key=lambda p: p.grant_id) if p.gold]
    if len(labeled) < n:
        raise InsufficientCorpusError(f"need {n} labeled projects, have {len(labeled)}")
    sampled = rng.sample(labeled, n)
    slots_of_a = [1 if rng.coin() else 2 for _ in sampled]

    prompts = [build_fewshot_prompt(p, taxonomy).text for p in sampled]

    def collect(cfg: gateway.EndpointConfig) -> list[CandidateOutput]:
        outputs = []
        for outcome in gateway.complete_batch(prompts, cfg):
            if isinstance(outcome, gateway.GatewayError):
                outputs.append(CandidateOutput(raw_text="", parsed=None, parse_error=outcome.code))
                continue
            try:
                parsed = output_parser.parse(
                    outcome.raw_text, mode=output_parser.LENIENT, taxonomy=taxonomy
                )
                outputs.append(CandidateOutput(raw_text=outcome.raw_text, parsed=parsed))
            except output_parser.ParseError as exc:
                outputs.append(
                    CandidateOutput(raw_text=outcome.raw_text, parsed=None, parse_error=exc.code)
                )
        return outputs

    outputs_a = collect(endpoint_a)
    outputs_b = collect(endpoint_b)

    cases = [
        AdjudicationCase(
            project=p,
            prompt=prompt,
            model_a=endpoint_a.model_name,
            model_b=endpoint_b.model_name,
            output_a=oa,
            output_b=ob,
        )
        for p, prompt, oa, ob in zip(sampled, prompts, outputs_a, outputs_b)
    ]
    verdicts = [
        _verdict_for_case(case, judge, slot, taxonomy)
        for case, slot in zip(cases, slots_of_a)
    ]
    return AdjudicationRun(
        seed=seed,
        sampled_ids=[p.grant_id for p in sampled],
        slots_of_a=slots_of_a,
        cases=cases,
        verdicts=verdicts,
    )


def tally(verdicts: Sequence[Verdict]) -> TallySummary:
    return TallySummary(
        wins_a=sum(1 for v in verdicts if v.winner == WINNER_A),
        wins_b=sum(1 for v in verdicts if v.winner == WINNER_B),
        ties=sum(1 for v in verdicts if v.winner == TIE),
        warnings_a=sum(v.warnings_a for v in verdicts),
        warnings_b=sum(v.warnings_b for v in verdicts),
        failures=sum(1 for v in verdicts if v.winner is None),
    )


def write_run_artifact(run: AdjudicationRun, path: str | Path) -> Path:
    """One line-record per case with both raw outputs, slots, and the verdict."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for case, verdict in zip(run.cases, run.verdicts):
            fh.write(
                json.dumps(
                    {
                        "grant_id": case.project.grant_id,
                        "model_a": case.model_a,
                        "model_b": case.model_b,
                        "gold": list(case.project.gold or ()),
                        "raw_a": case.output_a.raw_text,
                        "raw_b": case.output_b.raw_text,
                        "categories_a": list(case.output_a.parsed.categories)
                        if case.output_a.parsed
                        else None,
                        "categories_b": list(case.output_b.parsed.categories)
                        if case.output_b.parsed
                        else None,
                        "slot_of_a": verdict.slot_of_a,
                        "winner": verdict.winner,
                        "judge_rationale": verdict.judge_rationale,
                        "error": verdict.error,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
    return path
