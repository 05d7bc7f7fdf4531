"""Corpus analytics: length statistics, label distributions, correlations,
and conditional probabilities over gold label pairs, with plot-ready CSV export.

Character counts are Unicode scalar counts and word counts split on whitespace
runs; both are computed on untruncated text. The correlation measure is the
Pearson coefficient of the binary indicator vectors (the phi coefficient);
a category whose indicator is constant over the corpus gets 0 by convention
and is flagged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import EmptyCorpusError, Project
from .errors import PpaceError, UnwritableDirectoryError
from .taxonomy import DEFAULT_TAXONOMY, format_categories

CATEGORY_IDS = tuple(range(1, 13))


class UnlabeledProjectError(PpaceError):
    def __init__(self, grant_id: str):
        self.grant_id = grant_id
        super().__init__(f"project {grant_id} has no gold labels")


class EmptyConditionSetError(PpaceError):
    pass


@dataclass(frozen=True)
class LengthStats:
    avg_chars_title: float
    max_chars_title: int
    avg_chars_abstract: float
    max_chars_abstract: int
    avg_words_title: float
    max_words_title: int
    avg_words_abstract: float
    max_words_abstract: int


@dataclass(frozen=True)
class LabelDistribution:
    counts: dict[int, int]


@dataclass(frozen=True)
class ClusterDistribution:
    clusters: dict[tuple[int, ...], int]
    top: list[tuple[tuple[int, ...], int]]


@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    constant_categories: tuple[int, ...]


def _require_nonempty(projects: Sequence[Project]) -> None:
    if not projects:
        raise EmptyCorpusError("no projects in snapshot")


def _gold(project: Project) -> tuple[int, ...]:
    if not project.gold:
        raise UnlabeledProjectError(project.grant_id)
    return project.gold


def length_stats(projects: Sequence[Project]) -> LengthStats:
    _require_nonempty(projects)
    title_chars = [len(p.title) for p in projects]
    abstract_chars = [len(p.abstract) for p in projects]
    title_words = [len(p.title.split()) for p in projects]
    abstract_words = [len(p.abstract.split()) for p in projects]
    n = len(projects)
    return LengthStats(
        avg_chars_title=sum(title_chars) / n,
        max_chars_title=max(title_chars),
        avg_chars_abstract=sum(abstract_chars) / n,
        max_chars_abstract=max(abstract_chars),
        avg_words_title=sum(title_words) / n,
        max_words_title=max(title_words),
        avg_words_abstract=sum(abstract_words) / n,
        max_words_abstract=max(abstract_words),
    )


def label_distribution(projects: Sequence[Project]) -> LabelDistribution:
    _require_nonempty(projects)
    counts = {c: 0 for c in CATEGORY_IDS}
    for p in projects:
        for c in _gold(p):
            counts[c] += 1
    return LabelDistribution(counts=counts)


def cluster_distribution(projects: Sequence[Project], k: int = 12) -> ClusterDistribution:
    """Exact-set frequency table with a top-k view.

    Ties rank by count descending then by the canonical text of the set.
    """
    _require_nonempty(projects)
    clusters: dict[tuple[int, ...], int] = {}
    for p in projects:
        key = _gold(p)
        clusters[key] = clusters.get(key, 0) + 1
    ordered = sorted(clusters.items(), key=lambda kv: (-kv[1], format_categories(kv[0])))
    return ClusterDistribution(clusters=clusters, top=ordered[:k])


def _indicator_matrix(projects: Sequence[Project]) -> np.ndarray:
    matrix = np.zeros((len(projects), len(CATEGORY_IDS)))
    for row, p in enumerate(projects):
        for c in _gold(p):
            matrix[row, c - 1] = 1.0
    return matrix


def correlation_matrix(projects: Sequence[Project]) -> CorrelationMatrix:
    _require_nonempty(projects)
    if len(projects) < 2:
        raise EmptyCorpusError("need at least 2 labeled projects for correlations")
    x = _indicator_matrix(projects)
    centered = x - x.mean(axis=0)
    sumsq = (centered ** 2).sum(axis=0)
    constant = sumsq == 0.0
    values = np.zeros((12, 12))
    for i in range(12):
        if not constant[i]:
            values[i, i] = 1.0
        for j in range(i + 1, 12):
            if constant[i] or constant[j]:
                continue
            r = float(centered[:, i] @ centered[:, j]) / float(np.sqrt(sumsq[i] * sumsq[j]))
            r = min(1.0, max(-1.0, r))
            values[i, j] = r
            values[j, i] = r
    flagged = tuple(c for c, is_const in zip(CATEGORY_IDS, constant) if is_const)
    return CorrelationMatrix(values=values, constant_categories=flagged)


def conditional_probability(
    projects: Sequence[Project], given: Iterable[int], target: int
) -> float:
    """P(target in gold | given subset of gold) as an exact count ratio."""
    given_set = frozenset(given)
    if not given_set:
        raise ValueError("given set must be non-empty")
    if target in given_set:
        raise ValueError("target must not be part of the given set")
    support = joint = 0
    for p in projects:
        gold = set(_gold(p))
        if given_set <= gold:
            support += 1
            if target in gold:
                joint += 1
    if support == 0:
        raise EmptyConditionSetError(f"no project carries all of {sorted(given_set)}")
    return joint / support


def top_conditional(projects: Sequence[Project], given: Iterable[int]) -> tuple[int, float]:
    """Most probable additional category; ties resolve to the smallest id."""
    given_set = frozenset(given)
    best_id, best_p = 0, -1.0
    for target in CATEGORY_IDS:
        if target in given_set:
            continue
        p = conditional_probability(projects, given_set, target)
        if p > best_p:
            best_id, best_p = target, p
    return best_id, best_p


def _pair_counts(projects: Sequence[Project]) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for p in projects:
        for pair in combinations(_gold(p), 2):
            counts[pair] = counts.get(pair, 0) + 1
    return counts


def emit_analytics(
    projects: Sequence[Project], out_dir: str | Path, top_clusters: int = 12, top_pairs: int = 5
) -> list[Path]:
    """Write the analytics CSVs; byte-deterministic for a given snapshot."""
    _require_nonempty(projects)
    for p in projects:
        _gold(p)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UnwritableDirectoryError(str(exc)) from exc

    written: list[Path] = []

    def _write(name: str, header: list[str], rows: Iterable[list]) -> None:
        path = out / name
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    stats = length_stats(projects)
    _write(
        "length_stats.csv",
        ["measure", "title", "abstract"],
        [
            ["avg_chars", f"{stats.avg_chars_title:.6f}", f"{stats.avg_chars_abstract:.6f}"],
            ["max_chars", stats.max_chars_title, stats.max_chars_abstract],
            ["avg_words", f"{stats.avg_words_title:.6f}", f"{stats.avg_words_abstract:.6f}"],
            ["max_words", stats.max_words_title, stats.max_words_abstract],
        ],
    )

    dist = label_distribution(projects)
    _write(
        "label_distribution.csv",
        ["category_id", "name", "count"],
        [[c, DEFAULT_TAXONOMY.name_of(c), dist.counts[c]] for c in CATEGORY_IDS],
    )

    clusters = cluster_distribution(projects, k=top_clusters)
    ordered = sorted(clusters.clusters.items(), key=lambda kv: (-kv[1], format_categories(kv[0])))
    _write(
        "clusters.csv",
        ["rank", "categories", "count"],
        [[rank, format_categories(ids), count] for rank, (ids, count) in enumerate(ordered, 1)],
    )

    corr = correlation_matrix(projects)
    _write(
        "correlation.csv",
        ["category_id"] + [str(c) for c in CATEGORY_IDS] + ["constant"],
        [
            [c]
            + [f"{corr.values[c - 1, j - 1]:.10f}" for j in CATEGORY_IDS]
            + [str(c in corr.constant_categories).lower()]
            for c in CATEGORY_IDS
        ],
    )

    pairs = sorted(_pair_counts(projects).items(), key=lambda kv: (-kv[1], kv[0]))[:top_pairs]
    rows = []
    for (a, b), support in pairs:
        target, prob = top_conditional(projects, (a, b))
        rows.append([format_categories((a, b)), target, f"{prob:.6f}", support])
    _write("conditionals.csv", ["given", "target", "probability", "support"], rows)

    return written
