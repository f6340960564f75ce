"""Prompt assembly for the reasoning and generation calls.

Each prompt is an ordered bundle of categorized segments; segment templates
live as text resources under trialgen/templates and are filled with the
intervention name, outcome wording, and (for generation) the five reasons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

from .retrieval import DEFAULT_TOKEN_BUDGET, FewShotSet

TokenCounter = Callable[[str], int]

SEGMENT_CATEGORIES = ("context", "reasoning", "example", "constraint", "generation", "diversity")


class PromptError(Exception):
    pass


class TokenBudgetExceeded(PromptError):
    pass


class WrongReasonCount(PromptError):
    pass


def _load_template(name: str) -> str:
    return resources.files("trialgen.templates").joinpath(f"{name}.txt").read_text("utf-8")


_TEMPLATES = {
    name: _load_template(name)
    for name in (
        "reasoning_context",
        "reasoning_constraint",
        "reasoning_generation",
        "reasoning_diversity",
        "example_header",
        "generation_context",
        "generation_reasoning",
        "generation_constraint",
        "generation_generation",
        "generation_diversity",
    )
}

_PLACEHOLDERS = ("{intervention}", "{outcome_word}", "{reasons}")


@dataclass(frozen=True)
class PromptSegment:
    category: str
    text: str

    def __post_init__(self) -> None:
        if self.category not in SEGMENT_CATEGORIES:
            raise ValueError(f"unknown segment category {self.category!r}")


@dataclass(frozen=True)
class PromptBundle:
    segments: tuple[PromptSegment, ...]
    purpose: str
    estimated_tokens: int


def estimate_tokens(text: str) -> int:
    """Default token estimate: ceil(utf-8 byte length / 4).

    Deliberately crude; pass an exact tokenizer as token_counter wherever a
    tighter bound matters.
    """
    return math.ceil(len(text.encode("utf-8")) / 4)


def _fill(name: str, **values: str) -> str:
    text = _TEMPLATES[name]
    for key, value in values.items():
        text = text.replace("{" + key + "}", value)
    # placeholders live only in templates; trial text is appended verbatim later
    for placeholder in _PLACEHOLDERS:
        if placeholder in text:
            raise PromptError(f"unresolved placeholder {placeholder} in template {name!r}")
    return text


def format_example_segment(trial_text: str, label: int) -> str:
    header = _fill("example_header", outcome_word="Successful" if label == 1 else "Failed")
    return f"{header}\n{trial_text.rstrip()}"


def format_reasons_block(reasons: Sequence[str]) -> str:
    return "\n".join(f"{i}. {reason}" for i, reason in enumerate(reasons, start=1))


def render(bundle: PromptBundle) -> str:
    """Join segments with exactly one blank line between them."""
    return "\n\n".join(segment.text for segment in bundle.segments)


def _finish_bundle(
    segments: list[PromptSegment],
    purpose: str,
    token_budget: int,
    token_counter: TokenCounter,
) -> PromptBundle:
    text = "\n\n".join(segment.text for segment in segments)
    tokens = token_counter(text)
    if tokens > token_budget:
        raise TokenBudgetExceeded(
            f"{purpose} prompt estimated at {tokens} tokens, budget {token_budget}"
        )
    return PromptBundle(segments=tuple(segments), purpose=purpose, estimated_tokens=tokens)


def build_reasoning_prompt(
    fewshot: FewShotSet,
    with_diversity: bool = False,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    token_counter: TokenCounter = estimate_tokens,
) -> PromptBundle:
    """Assemble the prompt asking for 5 outcome-explaining reasons."""
    outcome_word = "succeed" if fewshot.label == 1 else "fail"
    segments = [PromptSegment("context", _fill("reasoning_context"))]
    for example in fewshot.examples:
        segments.append(
            PromptSegment("example", format_example_segment(example.text, fewshot.label))
        )
    segments.append(PromptSegment("constraint", _fill("reasoning_constraint")))
    segments.append(
        PromptSegment(
            "generation",
            _fill(
                "reasoning_generation",
                intervention=fewshot.intervention,
                outcome_word=outcome_word,
            ),
        )
    )
    if with_diversity:
        segments.append(PromptSegment("diversity", _fill("reasoning_diversity")))
    return _finish_bundle(segments, "reasoning", token_budget, token_counter)


def build_generation_prompt(
    fewshot: FewShotSet,
    reasons: Sequence[str],
    with_diversity: bool = False,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    token_counter: TokenCounter = estimate_tokens,
) -> PromptBundle:
    """Assemble the prompt asking for one synthetic trial report."""
    reason_texts = list(getattr(reasons, "reasons", reasons))
    if len(reason_texts) != 5:
        raise WrongReasonCount(f"need exactly 5 reasons, got {len(reason_texts)}")
    outcome_noun = "success" if fewshot.label == 1 else "failure"
    outcome_adj = "successful" if fewshot.label == 1 else "failed"

    segments = [PromptSegment("context", _fill("generation_context"))]
    segments.append(
        PromptSegment(
            "reasoning",
            _fill(
                "generation_reasoning",
                outcome_word=outcome_noun,
                intervention=fewshot.intervention,
                reasons=format_reasons_block(reason_texts),
            ),
        )
    )
    for example in fewshot.examples:
        segments.append(
            PromptSegment("example", format_example_segment(example.text, fewshot.label))
        )
    segments.append(
        PromptSegment(
            "constraint",
            _fill("generation_constraint", intervention=fewshot.intervention),
        )
    )
    segments.append(
        PromptSegment(
            "generation",
            _fill(
                "generation_generation",
                outcome_word=outcome_adj,
                intervention=fewshot.intervention,
            ),
        )
    )
    if with_diversity:
        segments.append(PromptSegment("diversity", _fill("generation_diversity")))
    return _finish_bundle(segments, "generation", token_budget, token_counter)
