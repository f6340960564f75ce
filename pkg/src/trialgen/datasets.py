"""Experimental dataset splits: the A/B intervention partition, 60/20/20
in-distribution splits, fixed-size synthetic/real ratio mixes, and
class-balanced generalization splits.

All builders are pure functions of their inputs and a seed; split manifests
carry ids only ("NCT..." real, "SYN..." synthetic).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .corpus import LabeledCorpus, LabeledTrial, canonical_name
from .pipeline import SyntheticCorpus

DEFAULT_TRAIN_SIZE = 3358
DEFAULT_EVAL_SIZE = 1349
DEFAULT_RATIOS = (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)


class DatasetError(Exception):
    pass


class TooFewItems(DatasetError):
    pass


class PoolTooSmall(DatasetError):
    pass


class SingleClass(DatasetError):
    pass


@dataclass(frozen=True)
class AbPartition:
    """Trials whose interventions overlap the synthetic list (A) vs the rest (B)."""

    set_a: tuple[LabeledTrial, ...]
    set_b: tuple[LabeledTrial, ...]


@dataclass(frozen=True)
class SplitSpec:
    name: str
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    composition: tuple[int, int]  # (synthetic_count, real_count) of train
    seed: int = 0


def partition_ab(corpus: LabeledCorpus, synthetic_names: Sequence[str]) -> AbPartition:
    """A = trials sharing an intervention with the synthetic corpus; B = complement."""
    names = {canonical_name(n) for n in synthetic_names}
    set_a, set_b = [], []
    for trial in corpus:
        if any(name in names for name in trial.intervention_names):
            set_a.append(trial)
        else:
            set_b.append(trial)
    return AbPartition(set_a=tuple(set_a), set_b=tuple(set_b))


def split_60_20_20(items: Sequence, seed: int) -> tuple[list, list, list]:
    """Seeded shuffle then floor(0.6n) / floor(0.2n) / remainder split."""
    n = len(items)
    if n < 5:
        raise TooFewItems(f"need at least 5 items for a 60/20/20 split, got {n}")
    shuffled = list(items)
    random.Random(f"split622:{seed}").shuffle(shuffled)
    n_train = (6 * n) // 10
    n_val = (2 * n) // 10
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


def ratio_counts(train_size: int, ratio: float) -> tuple[int, int]:
    """(synthetic, real) counts for one mix: floor on the synthetic side.

    The fraction is taken through its decimal literal so 0.6 * 3358 floors to
    2014, not to a float artifact.
    """
    synthetic = int(Fraction(str(ratio)) * train_size)
    return synthetic, train_size - synthetic


def build_ratio_mixes(
    synthetic_pool: Sequence[str],
    real_pool: Sequence[str],
    train_size: int = DEFAULT_TRAIN_SIZE,
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> list[tuple[list[str], list[str]]]:
    """Draw one (synthetic ids, real ids) train pair per ratio, without replacement."""
    mixes = []
    for pos, ratio in enumerate(ratios):
        n_syn, n_real = ratio_counts(train_size, ratio)
        if n_syn > len(synthetic_pool):
            raise PoolTooSmall(
                f"ratio {ratio}: need {n_syn} synthetic items, pool has {len(synthetic_pool)}"
            )
        if n_real > len(real_pool):
            raise PoolTooSmall(
                f"ratio {ratio}: need {n_real} real items, pool has {len(real_pool)}"
            )
        rng = random.Random(f"ratio:{seed}:{pos}")
        syn = rng.sample(list(synthetic_pool), n_syn)
        real = rng.sample(list(real_pool), n_real)
        mixes.append((syn, real))
    return mixes


def downsample_balance(items: Sequence[LabeledTrial], seed: int) -> list[LabeledTrial]:
    """Downsample the majority class to the minority size (uniform, seeded)."""
    positives = [t for t in items if t.label == 1]
    negatives = [t for t in items if t.label == 0]
    if not positives or not negatives:
        raise SingleClass("both classes must be present to balance")
    rng = random.Random(f"balance:{seed}")
    if len(positives) > len(negatives):
        keep = set(
            t.trial_id for t in rng.sample(positives, len(negatives))
        )
        kept = [t for t in items if t.label == 0 or t.trial_id in keep]
    elif len(negatives) > len(positives):
        keep = set(
            t.trial_id for t in rng.sample(negatives, len(positives))
        )
        kept = [t for t in items if t.label == 1 or t.trial_id in keep]
    else:
        kept = list(items)
    return kept


def _stratified_take(
    items: list[LabeledTrial], size: int, rng: random.Random
) -> tuple[list[LabeledTrial], list[LabeledTrial]]:
    """Take `size` items preserving label proportions (largest remainder)."""
    if size > len(items):
        raise PoolTooSmall(f"cannot take {size} items from pool of {len(items)}")
    by_label: dict[int, list[LabeledTrial]] = {0: [], 1: []}
    for t in items:
        by_label[t.label].append(t)
    total = len(items)
    quotas = {}
    fracs = []
    allocated = 0
    for label in (0, 1):
        exact = Fraction(size * len(by_label[label]), total)
        quotas[label] = int(exact)
        allocated += quotas[label]
        fracs.append((exact - quotas[label], label))
    for _, label in sorted(fracs, key=lambda x: (-x[0], x[1]))[: size - allocated]:
        quotas[label] += 1
    taken, rest = [], []
    for label in (0, 1):
        group = list(by_label[label])
        rng.shuffle(group)
        taken.extend(group[: quotas[label]])
        rest.extend(group[quotas[label] :])
    taken.sort(key=lambda t: t.trial_id)
    rest.sort(key=lambda t: t.trial_id)
    return taken, rest


def _ids(trials) -> tuple[str, ...]:
    return tuple(t.trial_id for t in trials)


def build_experiment(
    kind: str,
    partition: AbPartition,
    synthetic_corpus: SyntheticCorpus,
    seed: int,
    train_size: int = DEFAULT_TRAIN_SIZE,
    eval_size: int = DEFAULT_EVAL_SIZE,
    ratios: Sequence[float] = DEFAULT_RATIOS,
) -> list[SplitSpec]:
    """Build the split specs for one experiment kind.

    in_distribution: synthetic-only / real-only / hybrid trains over a shared
    60/20/20 val/test from A. ratio: six fixed-size mixes over shared
    stratified val/test from A. generalization: trains from A and/or the
    synthetic corpus, val/test from balanced B halves.
    """
    syn_ids = [t.trial_id for t in synthetic_corpus]

    if kind == "in_distribution":
        a_train, a_val, a_test = split_60_20_20(list(partition.set_a), seed)
        val, test = _ids(a_val), _ids(a_test)
        real_train = _ids(a_train)
        return [
            SplitSpec("synthetic_only", tuple(syn_ids), val, test, (len(syn_ids), 0), seed),
            SplitSpec("real_only", real_train, val, test, (0, len(real_train)), seed),
            SplitSpec(
                "hybrid",
                tuple(syn_ids) + real_train,
                val,
                test,
                (len(syn_ids), len(real_train)),
                seed,
            ),
        ]

    if kind == "ratio":
        rng = random.Random(f"ratio-eval:{seed}")
        a_items = list(partition.set_a)
        if len(a_items) < 2 * eval_size:
            raise PoolTooSmall(
                f"A has {len(a_items)} trials, need {2 * eval_size} for ratio val+test"
            )
        val_items, rest = _stratified_take(a_items, eval_size, rng)
        test_items, train_pool = _stratified_take(rest, eval_size, rng)
        mixes = build_ratio_mixes(syn_ids, _ids(train_pool), train_size, ratios, seed)
        val, test = _ids(val_items), _ids(test_items)
        specs = []
        for ratio, (syn, real) in zip(ratios, mixes):
            pct = round(ratio * 100)
            name = f"syn{pct}_real{100 - pct}"
            specs.append(
                SplitSpec(name, tuple(syn) + tuple(real), val, test, (len(syn), len(real)), seed)
            )
        return specs

    if kind == "generalization":
        balanced = downsample_balance(list(partition.set_b), seed)
        random.Random(f"gen-halves:{seed}").shuffle(balanced)
        half = len(balanced) // 2
        val, test = _ids(balanced[:half]), _ids(balanced[half : 2 * half])
        a_ids = _ids(partition.set_a)
        return [
            SplitSpec("synthetic_only", tuple(syn_ids), val, test, (len(syn_ids), 0), seed),
            SplitSpec("real_only", a_ids, val, test, (0, len(a_ids)), seed),
            SplitSpec(
                "hybrid", tuple(syn_ids) + a_ids, val, test, (len(syn_ids), len(a_ids)), seed
            ),
        ]

    raise ValueError(f"unknown experiment kind {kind!r}")


def write_split_manifest(spec: SplitSpec, path: str | Path) -> None:
    obj = {
        "name": spec.name,
        "train": list(spec.train),
        "val": list(spec.val),
        "test": list(spec.test),
        "composition": {"synthetic": spec.composition[0], "real": spec.composition[1]},
        "seed": spec.seed,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(obj, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def load_split_manifest(path: str | Path) -> SplitSpec:
    with open(path, encoding="utf-8") as handle:
        obj = json.load(handle)
    return SplitSpec(
        name=obj["name"],
        train=tuple(obj["train"]),
        val=tuple(obj["val"]),
        test=tuple(obj["test"]),
        composition=(obj["composition"]["synthetic"], obj["composition"]["real"]),
        seed=obj.get("seed", 0),
    )
