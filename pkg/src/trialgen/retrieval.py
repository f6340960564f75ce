"""Drug-vocabulary filtering and label-consistent few-shot sampling.

Only interventions that appear in the drug vocabulary are considered, and an
intervention is eligible for generation only when the corpus holds at least
three success and three failure trials for it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import LabeledCorpus, LabeledTrial, canonical_name

DEFAULT_K = 3
DEFAULT_TOKEN_BUDGET = 128_000


class RetrievalError(Exception):
    pass


class EmptyVocabulary(RetrievalError):
    pass


class NotEnoughExamples(RetrievalError):
    pass


class TokenBudgetExhausted(RetrievalError):
    pass


@dataclass(frozen=True)
class DrugVocabulary:
    names: frozenset[str]

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class InterventionIndex:
    """Per-intervention (successes, failures) trial lists."""

    entries: dict[str, tuple[list[LabeledTrial], list[LabeledTrial]]]

    def successes(self, name: str) -> list[LabeledTrial]:
        return self.entries[name][0]

    def failures(self, name: str) -> list[LabeledTrial]:
        return self.entries[name][1]

    def side(self, name: str, label: int) -> list[LabeledTrial]:
        return self.entries[name][0] if label == 1 else self.entries[name][1]


@dataclass(frozen=True)
class FewShotSet:
    intervention: str
    label: int
    examples: tuple[LabeledTrial, ...]
    total_tokens: int


def load_drug_vocab(file: str | Path) -> DrugVocabulary:
    """Load a one-name-per-line drug vocabulary, canonicalized and deduplicated."""
    names = set()
    with open(file, encoding="utf-8") as handle:
        for line in handle:
            name = canonical_name(line)
            if name:
                names.add(name)
    if not names:
        raise EmptyVocabulary(f"no drug names in {file}")
    return DrugVocabulary(names=frozenset(names))


def index_by_intervention(corpus: LabeledCorpus, vocab: DrugVocabulary) -> InterventionIndex:
    """Index trials under each of their vocabulary interventions.

    A trial listing several vocabulary drugs appears under each of them.
    """
    entries: dict[str, tuple[list[LabeledTrial], list[LabeledTrial]]] = {}
    for trial in corpus:
        for name in trial.intervention_names:
            if name not in vocab:
                continue
            successes, failures = entries.setdefault(name, ([], []))
            (successes if trial.label == 1 else failures).append(trial)
    return InterventionIndex(entries=entries)


def eligible_interventions(
    index: InterventionIndex, min_pos: int = 3, min_neg: int = 3
) -> list[str]:
    """Names with at least min_pos successes and min_neg failures, sorted."""
    return sorted(
        name
        for name, (successes, failures) in index.entries.items()
        if len(successes) >= min_pos and len(failures) >= min_neg
    )


def _example_block_tokens(trials: list[LabeledTrial], label: int, counter) -> int:
    # Estimate the example segments as they will appear in the prompt
    from .prompts import format_example_segment

    block = "\n\n".join(format_example_segment(t.text, label) for t in trials)
    return counter(block)


def sample_few_shot(
    index: InterventionIndex,
    intervention: str,
    label: int,
    k: int = DEFAULT_K,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    seed: int = 0,
    max_attempts: int = 5,
    token_counter=None,
) -> FewShotSet:
    """Sample k distinct same-label trials of one intervention, under a budget.

    Deterministic for a given seed. When the assembled example block exceeds
    the token budget, the draw is retried with the next derived seed, up to
    max_attempts, after which TokenBudgetExhausted is raised.
    """
    if token_counter is None:
        from .prompts import estimate_tokens

        token_counter = estimate_tokens
    side = index.entries.get(intervention, ([], []))[0 if label == 1 else 1]
    if len(side) < k:
        raise NotEnoughExamples(
            f"{intervention!r} has {len(side)} trials with label {label}, need {k}"
        )
    pool = sorted(side, key=lambda t: t.trial_id)
    for attempt in range(max_attempts):
        rng = random.Random(f"fewshot:{seed}:{attempt}")
        chosen = rng.sample(pool, k)
        tokens = _example_block_tokens(chosen, label, token_counter)
        if tokens <= token_budget:
            return FewShotSet(
                intervention=intervention,
                label=label,
                examples=tuple(chosen),
                total_tokens=tokens,
            )
    raise TokenBudgetExhausted(
        f"no {k}-trial sample for {intervention!r} fits {token_budget} tokens "
        f"after {max_attempts} attempts"
    )


def write_eligibility_report(
    index: InterventionIndex, path: str | Path, min_pos: int = 3, min_neg: int = 3
) -> list[str]:
    """Write the eligible-intervention CSV report; returns the eligible names."""
    names = eligible_interventions(index, min_pos, min_neg)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("intervention,success_count,failure_count\n")
        for name in names:
            successes, failures = index.entries[name]
            handle.write(f"{name},{len(successes)},{len(failures)}\n")
    return names
