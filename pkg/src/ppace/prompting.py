"""Prompt rendering for classification, fine-tuning, and rationale generation.

The few-shot classification template lives in ``templates/`` as a versioned
resource with ``{guideline}``, ``{title}`` and ``{abstract}`` placeholders;
tests pin its rendered output byte-for-byte against golden files so the text
cannot drift. The fine-tune variant is derived mechanically by deleting the
worked-examples block and the five note lines; everything else is identical.

Completions place the reasoning before the category list so that category
tokens never condition the explanation that justifies them.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .corpus import Project
from .errors import PpaceError
from .taxonomy import DEFAULT_TAXONOMY, Taxonomy, format_categories

MODE_FEWSHOT = "fewshot_inference"
MODE_FINETUNE = "finetune"

_EXAMPLES_BLOCK_START = "\n\n    Examples:"
_EXAMPLES_BLOCK_END = (
    "Avoid making unnecessary implications or speculative guesses beyond the "
    "explicit information provided."
)


class MissingAbstractError(PpaceError):
    def __init__(self, grant_id: str):
        self.grant_id = grant_id
        super().__init__(f"project {grant_id} has no abstract")


class EmptyRationaleError(PpaceError):
    pass


class EmptyCategorySetError(PpaceError):
    pass


@dataclass(frozen=True)
class PromptBundle:
    text: str
    mode: str
    prompt_end: int
    project_ref: str


def _read_template(name: str) -> str:
    return resources.files("ppace.templates").joinpath(name).read_text(encoding="utf-8")


def fewshot_template() -> str:
    return _read_template("classification_fewshot.txt")


def finetune_template() -> str:
    """Few-shot template minus the examples block and the five notes."""
    template = fewshot_template()
    start = template.index(_EXAMPLES_BLOCK_START)
    end = template.index(_EXAMPLES_BLOCK_END) + len(_EXAMPLES_BLOCK_END)
    return template[:start] + template[end:]


def judge_template() -> str:
    return _read_template("judge_pairwise.txt")


def fill_placeholders(template: str, values: dict[str, str]) -> str:
    """Substitute ``{name}`` placeholders; braces inside values stay literal."""
    for name, value in values.items():
        template = template.replace("{" + name + "}", value)
    return template


def _render(template: str, project: Project, mode: str, taxonomy: Taxonomy) -> PromptBundle:
    if not project.abstract.strip():
        raise MissingAbstractError(project.grant_id)
    text = fill_placeholders(
        template,
        {
            "guideline": taxonomy.guideline_text(),
            "title": project.title,
            "abstract": project.abstract,
        },
    ).strip()
    return PromptBundle(text=text, mode=mode, prompt_end=len(text), project_ref=project.grant_id)


def build_fewshot_prompt(project: Project, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> PromptBundle:
    """Few-shot inference prompt: guideline, three worked examples, five notes."""
    return _render(fewshot_template(), project, MODE_FEWSHOT, taxonomy)


def build_finetune_prompt(project: Project, taxonomy: Taxonomy = DEFAULT_TAXONOMY) -> PromptBundle:
    return _render(finetune_template(), project, MODE_FINETUNE, taxonomy)


def render_completion(rationale: str, categories) -> str:
    """Completion text in reasoning-first order with the canonical category list."""
    if not str(rationale).strip():
        raise EmptyRationaleError("completion needs a non-empty rationale")
    ids = tuple(categories)
    if not ids:
        raise EmptyCategorySetError("completion needs at least one category")
    return f"### Reasoning: {rationale}\n### Categories: {format_categories(ids)}"
