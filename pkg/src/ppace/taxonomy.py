"""The fixed 12-category research taxonomy and the guideline block used in prompts.

The taxonomy is compiled-in static data. An override file (JSONL, one record
per category with fields id, name, definition) can be loaded for future
revisions, but the default set of ids is always exactly 1..12.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import PpaceError


class OutOfRangeCategoryError(PpaceError):
    def __init__(self, category_id: int):
        self.category_id = category_id
        super().__init__(f"category id {category_id} outside the valid range 1..12")


class BadTaxonomyFileError(PpaceError):
    pass


@dataclass(frozen=True)
class Category:
    id: int
    name: str
    definition: str


_CATEGORY_ROWS = [
    (
        1,
        "Pathogen: Natural History, Transmission, and Diagnostics",
        "Development of diagnostic tools, understanding pathogen morphology, "
        "genomics, and genotyping, studying immunity, using disease models, and "
        "assessing the environmental stability of pathogens.",
    ),
    (
        2,
        "Animal and Environmental Research & Research on Diseases Vectors",
        "Animal sources, transmission routes, vector biology, and control "
        "strategies for vectors.",
    ),
    (
        3,
        "Epidemiological Studies",
        "Research on disease transmission dynamics, susceptibility, control "
        "measure effectiveness, and disease mapping through surveillance and "
        "reporting.",
    ),
    (
        4,
        "Clinical Characterisation and Management in Humans",
        "Prognostic factors for disease severity, disease pathogenesis, "
        "supportive care and management, long-term health consequences, and "
        "clinical trials for disease management.",
    ),
    (
        5,
        "Infection Prevention and Control",
        "Research on community restriction measures, barriers and PPE, infection "
        "control in healthcare settings, and measures at the human-animal "
        "interface.",
    ),
    (
        6,
        "Therapeutics Research, Development, and Implementation",
        "Pre-clinical studies for therapeutic development, clinical trials for "
        "therapeutic safety and efficacy, development of prophylactic treatments, "
        "logistics and supply chain management for therapeutics, clinical trial "
        "design for therapeutics, and research on adverse events related to "
        "therapeutic administration.",
    ),
    (
        7,
        "Vaccines Research, Development, and Implementation",
        "Pre-clinical studies for vaccine development, clinical trials for "
        "vaccine safety and efficacy, logistics and distribution strategies for "
        "vaccines, vaccine design and administration, clinical trial design for "
        "vaccines, research on adverse events related to immunisation, and "
        "characterisation of vaccine-induced immunity.",
    ),
    (
        8,
        "Research to Inform Ethical Issues",
        "Ethical considerations in research design, ethical issues in public "
        "health measures, ethical clinical decision-making, ethical resource "
        "allocation, ethical governance, and ethical considerations in social "
        "determinants of health.",
    ),
    (
        9,
        "Policies for Public Health, Disease Control, and Community Resilience",
        "Approaches to public health interventions, community engagement, "
        "communication and infodemic management, vaccine/therapeutic hesitancy, "
        "and policy research and interventions.",
    ),
    (
        10,
        "Secondary Impacts of Disease, Response, and Control Measures",
        "Indirect health impacts, social impacts, economic impacts, and other "
        "secondary impacts such as environmental effects, food security, and "
        "infrastructure.",
    ),
    (
        11,
        "Health Systems Research",
        "Health service delivery, health financing, access to medicines and "
        "technologies, health information systems, health leadership and "
        "governance, and health workforce management.",
    ),
    (
        12,
        "Capacity Strengthening",
        "Individual capacity building, institutional capacity strengthening, "
        "systemic/environmental components, and cross-cutting activities across "
        "all levels of capacity building.",
    ),
]

_GUIDELINE_PREFACE = (
    "We have a project in the area of biomedical research which we want to "
    "classify in terms of the research priorities it relates to. We have 12 "
    "possible research priorities and a project can be mapped to 1 or more of "
    "these priorities. The following is a guide on what each of these 12 "
    "categories are alongside the specific areas that they cover."
)


class Taxonomy:
    """Immutable category registry; safe for unrestricted concurrent reads."""

    def __init__(self, categories: Sequence[Category]):
        ids = [c.id for c in categories]
        if sorted(ids) != list(range(1, 13)):
            raise BadTaxonomyFileError(
                f"taxonomy must define ids 1..12 exactly once, got {sorted(ids)}"
            )
        self._by_id = {c.id: c for c in categories}

    @property
    def categories(self) -> list[Category]:
        return [self._by_id[i] for i in range(1, 13)]

    def category(self, category_id: int) -> Category:
        if category_id not in self._by_id:
            raise OutOfRangeCategoryError(category_id)
        return self._by_id[category_id]

    def name_of(self, category_id: int) -> str:
        return self.category(category_id).name

    def id_by_name(self, name: str) -> int | None:
        """Case-insensitive lookup of a full category name; None if unknown."""
        wanted = " ".join(name.lower().split())
        for cat in self.categories:
            if " ".join(cat.name.lower().split()) == wanted:
                return cat.id
        return None

    def guideline_text(self) -> str:
        """The guideline block substituted into every classification prompt.

        A preface paragraph followed by the 12 numbered category entries with
        their definitions. Byte-deterministic.
        """
        entries = [f"{c.id}. {c.name}: {c.definition}" for c in self.categories]
        return _GUIDELINE_PREFACE + "\n\n" + "\n\n".join(entries)


DEFAULT_TAXONOMY = Taxonomy([Category(i, n, d) for i, n, d in _CATEGORY_ROWS])


def guideline_text(taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> str:
    return taxonomy.guideline_text()


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load an override taxonomy from a JSONL file (fields id, name, definition)."""
    cats = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            cats.append(Category(int(row["id"]), str(row["name"]), str(row["definition"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise BadTaxonomyFileError(f"{path}:{lineno}: {exc}") from exc
    return Taxonomy(cats)


def category_set_from(ids: Iterable[int]) -> tuple[int, ...]:
    """Canonical category set: sorted, deduplicated, every id in 1..12."""
    out = sorted(set(int(i) for i in ids))
    for i in out:
        if i < 1 or i > 12:
            raise OutOfRangeCategoryError(i)
    return tuple(out)


def format_categories(ids: Iterable[int]) -> str:
    """Canonical text form of a category set: ``'1', '7'``."""
    return ", ".join(f"'{i}'" for i in category_set_from(ids))


def parse_categories_field(raw: str) -> tuple[int, ...]:
    """Parse a stored category list: either ``1;4`` or the canonical ``'1', '4'``.

    Raises ValueError on non-integer fragments and OutOfRangeCategoryError on
    ids outside 1..12.
    """
    text = raw.strip()
    if not text:
        return ()
    cleaned = [p.strip().strip("'\"") for p in text.replace(";", ",").split(",")]
    return category_set_from(int(p) for p in cleaned if p)
