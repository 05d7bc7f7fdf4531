import pytest

from ppace.corpus import Project
from ppace.output_parser import STRICT, parse
from ppace.prompting import (
    MODE_FEWSHOT,
    MODE_FINETUNE,
    EmptyCategorySetError,
    EmptyRationaleError,
    MissingAbstractError,
    build_fewshot_prompt,
    build_finetune_prompt,
    render_completion,
)

from conftest import GOLDEN_DIR


def test_fewshot_prompt_matches_golden(fixture_project):
    golden = (GOLDEN_DIR / "fewshot_prompt.txt").read_text(encoding="utf-8")
    bundle = build_fewshot_prompt(fixture_project)
    assert bundle.text == golden
    assert bundle.mode == MODE_FEWSHOT


def test_finetune_prompt_matches_golden(fixture_project):
    golden = (GOLDEN_DIR / "finetune_prompt.txt").read_text(encoding="utf-8")
    bundle = build_finetune_prompt(fixture_project)
    assert bundle.text == golden
    assert bundle.mode == MODE_FINETUNE


def test_finetune_golden_is_mechanical_deletion_of_fewshot_golden():
    fewshot = (GOLDEN_DIR / "fewshot_prompt.txt").read_text(encoding="utf-8")
    finetune = (GOLDEN_DIR / "finetune_prompt.txt").read_text(encoding="utf-8")
    start = fewshot.index("\n\n    Examples:")
    end = fewshot.index("explicit information provided.") + len("explicit information provided.")
    assert fewshot[:start] + fewshot[end:] == finetune


def test_prompt_brackets(fixture_project):
    text = build_fewshot_prompt(fixture_project).text
    assert text.startswith("[INST]") and text.endswith("[/INST]")


def test_fewshot_has_three_examples_and_five_notes(fixture_project):
    text = build_fewshot_prompt(fixture_project).text
    assert text.count("- For a study") == 3
    assert all(f"Note {i}:" in text for i in range(1, 6))
    assert "### Reasoning: ..." in text and "### Categories: ..." in text


def test_finetune_has_no_examples_or_notes(fixture_project):
    text = build_finetune_prompt(fixture_project).text
    assert "- For a study" not in text
    assert "Note 1:" not in text
    assert "We have a project in the area of biomedical research" in text


def test_finetune_is_blockwise_subsequence_of_fewshot(fixture_project):
    fewshot = build_fewshot_prompt(fixture_project).text
    finetune = build_finetune_prompt(fixture_project).text
    remainder = fewshot
    for line in finetune.splitlines():
        idx = remainder.find(line)
        assert idx >= 0, f"line missing from fewshot prompt: {line!r}"
        remainder = remainder[idx + len(line):]


def test_title_substitution():
    p = Project(grant_id="g", title="T", abstract="A")
    assert "\n    Title: T\n" in build_fewshot_prompt(p).text


def test_braces_in_project_text_stay_literal():
    p = Project(grant_id="g", title="Braces {x}", abstract="data {json: 1} here")
    text = build_fewshot_prompt(p).text
    assert "Braces {x}" in text and "data {json: 1} here" in text


def test_prompt_end_is_text_length(fixture_project):
    for build in (build_fewshot_prompt, build_finetune_prompt):
        bundle = build(fixture_project)
        assert bundle.prompt_end == len(bundle.text)
        assert bundle.project_ref == fixture_project.grant_id


def test_missing_abstract_raises():
    p = Project(grant_id="g", title="T", abstract="   ")
    with pytest.raises(MissingAbstractError):
        build_fewshot_prompt(p)


def test_render_completion_canonical():
    text = render_completion("focus on pathogen genomics and vaccine development", (1, 7))
    assert text.endswith("### Categories: '1', '7'")
    assert text.startswith("### Reasoning: focus on pathogen genomics")


def test_render_completion_single_category():
    assert render_completion("r", (12,)) == "### Reasoning: r\n### Categories: '12'"


def test_render_completion_rejects_empty_categories():
    with pytest.raises(EmptyCategorySetError):
        render_completion("r", ())


def test_render_completion_rejects_empty_rationale():
    with pytest.raises(EmptyRationaleError):
        render_completion("   ", (1,))


def test_render_parse_roundtrip():
    out = parse(render_completion("uses disease models", (1, 4, 6)), STRICT)
    assert out.rationale == "uses disease models"
    assert out.categories == (1, 4, 6)
