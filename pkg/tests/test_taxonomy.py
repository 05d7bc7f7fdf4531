import json
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppace.taxonomy import (
    DEFAULT_TAXONOMY,
    BadTaxonomyFileError,
    OutOfRangeCategoryError,
    category_set_from,
    format_categories,
    guideline_text,
    load_taxonomy,
    parse_categories_field,
)


def test_default_taxonomy_covers_ids_1_to_12():
    assert [c.id for c in DEFAULT_TAXONOMY.categories] == list(range(1, 13))


def test_known_category_names():
    assert DEFAULT_TAXONOMY.name_of(1) == "Pathogen: Natural History, Transmission, and Diagnostics"
    assert DEFAULT_TAXONOMY.name_of(12) == "Capacity Strengthening"


def test_guideline_starts_with_preface():
    assert guideline_text().startswith(
        "We have a project in the area of biomedical research which we want to classify"
    )


def test_guideline_contains_capacity_strengthening_entry():
    assert "12. Capacity Strengthening:" in guideline_text()


def test_guideline_is_deterministic():
    assert guideline_text() == guideline_text()


def test_guideline_has_exactly_12_entries_and_each_name_once():
    text = guideline_text()
    entries = re.findall(r"^\d+\. ", text, flags=re.MULTILINE)
    assert len(entries) == 12
    for category in DEFAULT_TAXONOMY.categories:
        assert text.count(category.name) == 1


def test_category_set_sorts_and_dedups():
    assert category_set_from([7, 1, 7]) == (1, 7)


def test_category_set_empty_is_allowed():
    assert category_set_from([]) == ()


def test_category_set_rejects_out_of_range():
    with pytest.raises(OutOfRangeCategoryError) as err:
        category_set_from([13])
    assert err.value.category_id == 13
    with pytest.raises(OutOfRangeCategoryError):
        category_set_from([0])


@given(st.lists(st.integers(min_value=1, max_value=12)))
def test_category_set_always_ascending_and_unique(ids):
    result = category_set_from(ids)
    assert list(result) == sorted(set(ids))


def test_format_categories_canonical_form():
    assert format_categories([7, 1]) == "'1', '7'"


def test_parse_categories_field_both_forms():
    assert parse_categories_field("1;4") == (1, 4)
    assert parse_categories_field("'1', '4'") == (1, 4)
    assert parse_categories_field("") == ()


def test_name_lookup_is_case_insensitive():
    assert DEFAULT_TAXONOMY.id_by_name("capacity strengthening") == 12
    assert DEFAULT_TAXONOMY.id_by_name("no such category") is None


def test_override_file_roundtrip(tmp_path):
    path = tmp_path / "taxonomy.jsonl"
    rows = [
        {"id": c.id, "name": f"name {c.id}", "definition": f"definition {c.id}"}
        for c in DEFAULT_TAXONOMY.categories
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    taxonomy = load_taxonomy(path)
    assert taxonomy.name_of(3) == "name 3"


def test_override_file_must_cover_all_ids(tmp_path):
    path = tmp_path / "taxonomy.jsonl"
    path.write_text('{"id": 1, "name": "n", "definition": "d"}', encoding="utf-8")
    with pytest.raises(BadTaxonomyFileError):
        load_taxonomy(path)
