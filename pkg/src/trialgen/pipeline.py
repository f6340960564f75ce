"""End-to-end retrieval -> reasoning -> generation orchestration.

The unit of work is one (intervention, label) slot in a deterministic
schedule. Reasons are requested once per (intervention, label) pair per run
and reused; the diversity nudge is added from the second generation request
for the same pair onward. A failing unit is logged and skipped, never aborts
the run.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .corpus import LabeledCorpus, canonical_name
from .llm import (
    ChatClient,
    LlmError,
    Provenance,
    ReasonSet,
    SyntheticIdAllocator,
    SyntheticTrial,
    parse_reasons,
    validate_synthetic,
)
from .prompts import (
    PromptError,
    build_generation_prompt,
    build_reasoning_prompt,
    render,
)
from .retrieval import (
    DEFAULT_TOKEN_BUDGET,
    DrugVocabulary,
    RetrievalError,
    eligible_interventions,
    index_by_intervention,
    sample_few_shot,
)

logger = logging.getLogger(__name__)

# Fixed timestamp used when a run must be byte-reproducible (mock mode).
EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"


class PipelineError(Exception):
    pass


class NoEligibleInterventions(PipelineError):
    pass


class AllUnitsFailed(PipelineError):
    pass


class IoError(PipelineError):
    pass


@dataclass(frozen=True)
class GenerationPlan:
    total_trials: int
    per_intervention_cap: int | None = None
    label_policy: str = "alternate"
    seed: int = 0
    fixed_label: int = 1

    def __post_init__(self) -> None:
        if self.total_trials < 1:
            raise ValueError("total_trials must be >= 1")
        if self.label_policy not in ("alternate", "balanced", "fixed"):
            raise ValueError(f"unknown label_policy {self.label_policy!r}")


@dataclass(frozen=True)
class ScheduledUnit:
    index: int
    intervention: str
    label: int


@dataclass(frozen=True)
class SyntheticCorpus:
    trials: tuple[SyntheticTrial, ...]
    intervention_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)


def build_schedule(eligible: list[str], plan: GenerationPlan) -> list[ScheduledUnit]:
    """Round-robin interventions (sorted order) until total_trials units exist.

    Pure function of (eligible, plan); the per-intervention cap may make the
    schedule shorter than requested.
    """
    names = sorted(eligible)
    units: list[ScheduledUnit] = []
    per_name: dict[str, int] = {name: 0 for name in names}
    while len(units) < plan.total_trials:
        progressed = False
        for name in names:
            if len(units) >= plan.total_trials:
                break
            if plan.per_intervention_cap is not None and per_name[name] >= plan.per_intervention_cap:
                continue
            if plan.label_policy == "fixed":
                label = plan.fixed_label
            elif plan.label_policy == "balanced":
                label = 1 if len(units) % 2 == 0 else 0
            else:  # alternate per intervention: success, failure, success, ...
                label = 1 if per_name[name] % 2 == 0 else 0
            units.append(ScheduledUnit(index=len(units), intervention=name, label=label))
            per_name[name] += 1
            progressed = True
        if not progressed:
            break
    return units


def unit_seed(plan_seed: int, unit_index: int) -> int:
    return plan_seed * 1_000_003 + unit_index


def run_generation(
    corpus: LabeledCorpus,
    vocab: DrugVocabulary,
    plan: GenerationPlan,
    client: ChatClient,
    min_pos: int = 3,
    min_neg: int = 3,
    token_budget: int = DEFAULT_TOKEN_BUDGET,
    max_sample_attempts: int = 5,
    clock: Callable[[], str] | None = None,
) -> SyntheticCorpus:
    """Run the full generation pipeline and return the synthetic corpus.

    The schedule, few-shot draws, and prompts are a pure function of
    (corpus, vocab, plan.seed); all LLM nondeterminism sits behind `client`.
    """
    if clock is None:
        clock = lambda: EPOCH_TIMESTAMP  # noqa: E731 - keeps mock runs reproducible
    index = index_by_intervention(corpus, vocab)
    eligible = eligible_interventions(index, min_pos, min_neg)
    if not eligible:
        raise NoEligibleInterventions(
            f"no intervention has >= {min_pos} successes and >= {min_neg} failures"
        )
    schedule = build_schedule(eligible, plan)
    ids = SyntheticIdAllocator()
    reasons_cache: dict[tuple[str, int], ReasonSet] = {}
    generations_sent: dict[tuple[str, int], int] = {}
    trials: list[SyntheticTrial] = []

    for unit in schedule:
        try:
            trial = _run_unit(
                unit,
                index=index,
                plan=plan,
                client=client,
                ids=ids,
                reasons_cache=reasons_cache,
                generations_sent=generations_sent,
                token_budget=token_budget,
                max_sample_attempts=max_sample_attempts,
                clock=clock,
            )
        except (LlmError, PromptError, RetrievalError) as exc:
            logger.warning(
                "unit %d (%s, label %d) skipped: %s",
                unit.index,
                unit.intervention,
                unit.label,
                exc,
            )
            continue
        trials.append(trial)

    if schedule and not trials:
        raise AllUnitsFailed(f"all {len(schedule)} scheduled units failed")
    # final ordering is independent of execution strategy
    trials.sort(key=lambda t: (t.intervention, t.label, t.provenance.unit_index))
    names = sorted({trial.intervention for trial in trials})
    return SyntheticCorpus(trials=tuple(trials), intervention_names=tuple(names))


def _run_unit(
    unit: ScheduledUnit,
    *,
    index,
    plan: GenerationPlan,
    client: ChatClient,
    ids: SyntheticIdAllocator,
    reasons_cache: dict,
    generations_sent: dict,
    token_budget: int,
    max_sample_attempts: int,
    clock: Callable[[], str],
) -> SyntheticTrial:
    seed = unit_seed(plan.seed, unit.index)
    fewshot = sample_few_shot(
        index,
        unit.intervention,
        unit.label,
        token_budget=token_budget,
        seed=seed,
        max_attempts=max_sample_attempts,
        token_counter=client.token_counter,
    )
    pair = (unit.intervention, unit.label)
    reasons = reasons_cache.get(pair)
    if reasons is None:
        bundle = build_reasoning_prompt(
            fewshot, token_budget=client.token_budget, token_counter=client.token_counter
        )
        response = client.complete(client.request_for(render(bundle)))
        reasons = parse_reasons(response, unit.intervention, unit.label)
        reasons_cache[pair] = reasons

    with_diversity = generations_sent.get(pair, 0) >= 1
    bundle = build_generation_prompt(
        fewshot,
        reasons,
        with_diversity=with_diversity,
        token_budget=client.token_budget,
        token_counter=client.token_counter,
    )
    generations_sent[pair] = generations_sent.get(pair, 0) + 1
    response = client.complete(client.request_for(render(bundle)))
    provenance = Provenance(
        example_ids=tuple(example.trial_id for example in fewshot.examples),
        reasons=reasons.reasons,
        model_name=client.model_name,
        temperature=client.temperature,
        seed=seed,
        timestamp=clock(),
        unit_index=unit.index,
    )
    return validate_synthetic(response, unit.intervention, unit.label, provenance, ids)


def export_synthetic(corpus: SyntheticCorpus, path: str | Path) -> None:
    """Write the synthetic corpus as JSON-lines with full provenance."""
    try:
        with open(path, "w", encoding="utf-8") as handle:
            for trial in corpus:
                obj = {
                    "trial_id": trial.trial_id,
                    "text": trial.text,
                    "label": trial.label,
                    "intervention": trial.intervention,
                    "provenance": {
                        "example_ids": list(trial.provenance.example_ids),
                        "reasons": list(trial.provenance.reasons),
                        "model_name": trial.provenance.model_name,
                        "temperature": trial.provenance.temperature,
                        "seed": trial.provenance.seed,
                        "timestamp": trial.provenance.timestamp,
                        "unit_index": trial.provenance.unit_index,
                    },
                }
                handle.write(json.dumps(obj, ensure_ascii=False))
                handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def import_synthetic(path: str | Path) -> SyntheticCorpus:
    """Reload a synthetic corpus exported by export_synthetic (lossless)."""
    trials = []
    try:
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                prov = obj["provenance"]
                trials.append(
                    SyntheticTrial(
                        trial_id=obj["trial_id"],
                        text=obj["text"],
                        label=int(obj["label"]),
                        intervention=obj["intervention"],
                        provenance=Provenance(
                            example_ids=tuple(prov["example_ids"]),
                            reasons=tuple(prov["reasons"]),
                            model_name=prov["model_name"],
                            temperature=prov["temperature"],
                            seed=prov["seed"],
                            timestamp=prov["timestamp"],
                            unit_index=prov.get("unit_index", 0),
                        ),
                    )
                )
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    names = sorted({trial.intervention for trial in trials})
    return SyntheticCorpus(trials=tuple(trials), intervention_names=tuple(names))


def list_synthetic_interventions(corpus: SyntheticCorpus) -> list[str]:
    """Sorted, deduplicated, canonicalized intervention names of the corpus."""
    return sorted({canonical_name(trial.intervention) for trial in corpus})
