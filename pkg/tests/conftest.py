from __future__ import annotations

from pathlib import Path

import pytest

from ppace.corpus import CorpusStore, Project, ingest
from ppace.refdata import reference_files

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture()
def fixture_project() -> Project:
    # Matches the project baked into the golden prompt files; do not edit one
    # without the other.
    return Project(
        grant_id="FIX-0001",
        title="Genomic surveillance of henipavirus spillover at the livestock interface",
        abstract=(
            "This project sequences henipavirus isolates collected from pig farms and "
            "nearby bat roosts to map spillover routes into humans. We will develop a "
            "rapid field diagnostic assay and evaluate its sensitivity against "
            "laboratory reference panels."
        ),
        gold=(1, 2),
    )


def make_projects(label_sets: list[tuple[int, ...]], prefix: str = "P") -> list[Project]:
    return [
        Project(
            grant_id=f"{prefix}-{i:03d}",
            title=f"study number {i} on outbreak response",
            abstract=f"abstract text for project {i} covering methods and aims",
            gold=labels,
            split="train",
        )
        for i, labels in enumerate(label_sets, 1)
    ]


@pytest.fixture()
def small_corpus(tmp_path) -> CorpusStore:
    store = CorpusStore(tmp_path / "corpus.jsonl")
    for project in make_projects([(1, 4), (4,), (2,), (9, 10), (1,)]):
        store.append(project)
    return store


@pytest.fixture(scope="session")
def reference_corpus(tmp_path_factory):
    """Store loaded with the reference train/test files (cached across runs)."""
    files = reference_files()
    store = CorpusStore(tmp_path_factory.mktemp("refstore") / "corpus.jsonl")
    train = ingest(store, files.train_csv, "csv", "train")
    test = ingest(store, files.test_csv, "csv", "test")
    assert not train.problems and not test.problems
    return store
