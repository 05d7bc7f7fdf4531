"""Command-line entry point: ingest | stats | classify | distill-build |
evaluate | adjudicate | serve | export.

Every run writes a manifest (config snapshot, seed, input digests) into the
output directory. Failures exit nonzero and print a machine-readable error
class; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import adjudication, distill, gateway, metrics, output_parser, stats
from .config import RunConfig, endpoint_config, load_config, write_manifest
from .corpus import CorpusStore, EmptyCorpusError, ingest, truncate_abstract
from .errors import PpaceError
from .prompting import build_fewshot_prompt, build_finetune_prompt
from .review.app import create_app
from .review.store import ReviewStore
from .taxonomy import DEFAULT_TAXONOMY, load_taxonomy


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file (PPACE_CONFIG also works)")
    parser.add_argument("--store", dest="store_dir", help="store directory")
    parser.add_argument("--out", dest="out_dir", help="output directory")
    parser.add_argument("--taxonomy", dest="taxonomy_path", help="taxonomy override file (JSONL)")
    parser.add_argument("--seed", dest="seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppace")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a CSV/JSONL grant file into the store")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--split", choices=("train", "test", "unassigned"), default="unassigned")
    _add_common(p)

    p = sub.add_parser("stats", help="emit corpus analytics CSVs")
    p.add_argument("--split", default=None)
    _add_common(p)

    p = sub.add_parser("classify", help="run a classification endpoint over a split")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--mode", choices=("strict", "lenient"), default=None, dest="parser_mode")
    p.add_argument("--prompt-variant", choices=("fewshot", "finetune"), default=None,
                   dest="prompt_variant")
    p.add_argument("--cap", type=int, default=None, dest="abstract_cap")
    _add_common(p)

    p = sub.add_parser("distill-build", help="build the rationale SFT dataset")
    p.add_argument("--teacher", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--format", choices=(distill.FORMAT_PROMPT_COMPLETION, distill.FORMAT_CHAT),
                   default=distill.FORMAT_PROMPT_COMPLETION)
    p.add_argument("--cap", type=int, default=None, dest="abstract_cap")
    _add_common(p)

    p = sub.add_parser("evaluate", help="score a predictions file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--baseline", default=None, help="baseline predictions for deltas")
    _add_common(p)

    p = sub.add_parser("adjudicate", help="pairwise judge run over sampled projects")
    p.add_argument("--a", required=True, dest="endpoint_a")
    p.add_argument("--b", required=True, dest="endpoint_b")
    p.add_argument("--judge", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--split", default=None)
    _add_common(p)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--required-reviews", type=int, default=None, dest="required_reviews")
    p.add_argument("--resolvers", default=None, help="comma-separated resolver reviewer ids")
    p.add_argument("--ui", default=None, help="directory of built UI assets to serve at /ui")
    _add_common(p)

    p = sub.add_parser("export", help="export verified review items as labeled records")
    p.add_argument("--out-file", required=True)
    _add_common(p)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        key: getattr(args, key, None)
        for key in ("store_dir", "out_dir", "seed", "parser_mode", "prompt_variant",
                    "abstract_cap", "required_reviews", "taxonomy_path")
        if getattr(args, key, None) is not None
    }
    if getattr(args, "resolvers", None):
        overrides["resolvers"] = tuple(x.strip() for x in args.resolvers.split(",") if x.strip())
    return load_config(getattr(args, "config", None), overrides)


def _taxonomy(cfg: RunConfig):
    return load_taxonomy(cfg.taxonomy_path) if cfg.taxonomy_path else DEFAULT_TAXONOMY


def _labeled_snapshot(cfg: RunConfig, split: str | None):
    projects = CorpusStore(cfg.corpus_path).snapshot(split)
    if not projects:
        raise EmptyCorpusError(f"no projects in split {split!r}")
    return projects


def cmd_ingest(args) -> int:
    cfg = _config_from_args(args)
    result = ingest(CorpusStore(cfg.corpus_path), args.input, args.format, args.split)
    for problem in result.problems:
        print(f"row {problem.ordinal}: {problem.error}({problem.detail})", file=sys.stderr)
    write_manifest(cfg.out_dir, "ingest", cfg, {"input": args.input})
    print(f"ingested {result.count} records into {cfg.corpus_path} "
          f"({len(result.problems)} skipped)")
    return 0


def cmd_stats(args) -> int:
    cfg = _config_from_args(args)
    projects = _labeled_snapshot(cfg, args.split)
    written = stats.emit_analytics(projects, cfg.out_dir)
    write_manifest(cfg.out_dir, "stats", cfg, {"corpus": cfg.corpus_path},
                   {"split": args.split, "n_projects": len(projects)})
    for path in written:
        print(path)
    return 0


def cmd_classify(args) -> int:
    cfg = _config_from_args(args)
    taxonomy = _taxonomy(cfg)
    endpoint = endpoint_config(cfg, args.endpoint)
    projects = _labeled_snapshot(cfg, args.split)

    build = build_fewshot_prompt if cfg.prompt_variant == "fewshot" else build_finetune_prompt
    capped = [truncate_abstract(p, cap=cfg.abstract_cap) for p in projects]
    prompts = [build(p, taxonomy).text for p in capped]
    outcomes = gateway.complete_batch(prompts, endpoint)

    rows = []
    failures = []
    for project, outcome in zip(projects, outcomes):
        if isinstance(outcome, gateway.GatewayError):
            rows.append((project.grant_id, project.gold, (), outcome.code))
            failures.append(output_parser.ParseFailure(project.grant_id, outcome.code,
                                                       str(outcome)[:200]))
            continue
        try:
            parsed = output_parser.parse(outcome.raw_text, mode=cfg.parser_mode,
                                         taxonomy=taxonomy)
            rows.append((project.grant_id, project.gold, parsed.categories, ""))
        except output_parser.ParseError as exc:
            rows.append((project.grant_id, project.gold, (), exc.code))
            failures.append(output_parser.ParseFailure(project.grant_id, exc.code,
                                                       outcome.raw_text[:200]))

    predictions_path = Path(cfg.out_dir) / "predictions.csv"
    metrics.write_predictions(rows, predictions_path)
    output_parser.write_failure_report(failures, Path(cfg.out_dir) / "failures.csv")
    write_manifest(cfg.out_dir, "classify", cfg, {"corpus": cfg.corpus_path},
                   {"split": args.split, "endpoint": args.endpoint, "n_projects": len(projects)})
    print(f"classified {len(projects)} projects -> {predictions_path} "
          f"({len(failures)} failures)")
    return 0


def cmd_distill_build(args) -> int:
    cfg = _config_from_args(args)
    taxonomy = _taxonomy(cfg)
    teacher = endpoint_config(cfg, args.teacher)
    projects = _labeled_snapshot(cfg, args.split)

    records, report = distill.build_sft_dataset(projects, teacher,
                                                abstract_cap=cfg.abstract_cap,
                                                taxonomy=taxonomy)
    data_path = Path(cfg.out_dir) / f"sft_{args.format}.jsonl"
    manifest = distill.export(records, args.format, data_path)

    report_path = Path(cfg.out_dir) / "build_report.csv"
    import csv as _csv

    report_path.parent.mkdir(parents=True, exist_ok=True)
    with report_path.open("w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["grant_id", "flag", "detail"])
        for row in report.rows:
            writer.writerow([row.grant_id, row.flag, row.detail])

    write_manifest(cfg.out_dir, "distill-build", cfg, {"corpus": cfg.corpus_path},
                   {"split": args.split, "teacher": args.teacher, "counts": report.counts()})
    print(f"exported {manifest['exported']} records -> {manifest['data']} "
          f"(report: {report_path})")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    records = metrics.read_predictions(args.predictions)
    report = metrics.evaluate(records)
    report_path = metrics.report_emit(report, Path(cfg.out_dir) / "report.csv")
    inputs = {"predictions": args.predictions}
    if args.baseline:
        base = metrics.evaluate(metrics.read_predictions(args.baseline))
        metrics.improvement_emit(base, report, Path(cfg.out_dir) / "improvement.csv")
        inputs["baseline"] = args.baseline
    write_manifest(cfg.out_dir, "evaluate", cfg, inputs, {"n_records": report.n_records})
    print(f"micro P/R/F1 = {report.micro.precision:.4f}/{report.micro.recall:.4f}/"
          f"{report.micro.f1:.4f} -> {report_path}")
    return 0


def cmd_adjudicate(args) -> int:
    cfg = _config_from_args(args)
    taxonomy = _taxonomy(cfg)
    projects = _labeled_snapshot(cfg, args.split)
    run = adjudication.run_adjudication(
        projects,
        endpoint_config(cfg, args.endpoint_a),
        endpoint_config(cfg, args.endpoint_b),
        endpoint_config(cfg, args.judge),
        n=args.n,
        seed=cfg.seed,
        taxonomy=taxonomy,
    )
    artifact = adjudication.write_run_artifact(run, Path(cfg.out_dir) / "adjudication.jsonl")
    summary = adjudication.tally(run.verdicts)
    write_manifest(cfg.out_dir, "adjudicate", cfg, {"corpus": cfg.corpus_path},
                   {"n": args.n, "a": args.endpoint_a, "b": args.endpoint_b,
                    "judge": args.judge, "sampled": run.sampled_ids})
    print(f"wins_a={summary.wins_a} wins_b={summary.wins_b} ties={summary.ties} "
          f"failures={summary.failures} -> {artifact}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    cfg = _config_from_args(args)
    corpus = CorpusStore(cfg.corpus_path)
    reviews = ReviewStore(cfg.reviews_path, corpus,
                          required_reviews=cfg.required_reviews, resolvers=cfg.resolvers)
    app = create_app(reviews, corpus, taxonomy=_taxonomy(cfg), ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    cfg = _config_from_args(args)
    corpus = CorpusStore(cfg.corpus_path)
    reviews = ReviewStore(cfg.reviews_path, corpus,
                          required_reviews=cfg.required_reviews, resolvers=cfg.resolvers)
    count = reviews.export_verified(args.out_file)
    print(f"exported {count} verified records -> {args.out_file}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "classify": cmd_classify,
    "distill-build": cmd_distill_build,
    "evaluate": cmd_evaluate,
    "adjudicate": cmd_adjudicate,
    "serve": cmd_serve,
    "export": cmd_export,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PpaceError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
