"""Embedding diversity analysis: seeded cosine-similarity pair sampling
(within-real, within-synthetic, real-vs-synthetic) and fixed-range histograms.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PAIR_MODES = ("real_real", "syn_syn", "real_syn")
DEFAULT_PAIR_COUNT = 10_000
DEFAULT_BINS = 80
DEFAULT_RANGE = (-1.0, 1.0)


class AnalysisError(Exception):
    pass


class DimensionMismatch(AnalysisError):
    pass


class NonFiniteValue(AnalysisError):
    pass


class DuplicateId(AnalysisError):
    pass


class ZeroVector(AnalysisError):
    pass


class TooFewItems(AnalysisError):
    pass


@dataclass(frozen=True)
class EmbeddingSet:
    dimension: int
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)

    def ids(self) -> list[str]:
        return sorted(self.vectors)


@dataclass(frozen=True)
class SimilaritySample:
    mode: str
    pairs: tuple[tuple[str, str], ...]
    similarities: tuple[float, ...]


def load_embeddings(file: str | Path) -> EmbeddingSet:
    """Load JSON-lines {id, vector} rows; dimension inferred from the first."""
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(file, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            item_id = str(obj["id"])
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if dimension is None:
                dimension = int(vec.shape[0])
            elif vec.shape[0] != dimension:
                raise DimensionMismatch(
                    f"{item_id!r} has dimension {vec.shape[0]}, expected {dimension}"
                )
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"{item_id!r} has a non-finite component")
            if item_id in vectors:
                raise DuplicateId(f"duplicate id {item_id!r}")
            vectors[item_id] = vec
    if dimension is None:
        raise AnalysisError(f"no embeddings in {file}")
    return EmbeddingSet(dimension=dimension, vectors=vectors)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """dot(u,v) / (|u||v|), clamped to [-1, 1] against rounding overshoot."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv))))


def sample_pairs(
    a: EmbeddingSet,
    b: EmbeddingSet | None = None,
    n: int = DEFAULT_PAIR_COUNT,
    seed: int = 0,
    mode: str | None = None,
) -> SimilaritySample:
    """Sample n id pairs uniformly with replacement, rejecting self-pairs.

    Same-set mode (b is None or b is a) pairs within one set; cross mode draws
    one id from each set. Deterministic for a given seed.
    """
    same_set = b is None or b is a
    ids_a = a.ids()
    rng = random.Random(f"pairs:{seed}")
    pairs: list[tuple[str, str]] = []
    sims: list[float] = []
    if same_set:
        if len(ids_a) < 2:
            raise TooFewItems("need at least 2 items to sample same-set pairs")
        mode = mode or "real_real"
        for _ in range(n):
            while True:
                i = rng.randrange(len(ids_a))
                j = rng.randrange(len(ids_a))
                if i != j:
                    break
            pairs.append((ids_a[i], ids_a[j]))
    else:
        ids_b = b.ids()
        if not ids_a or not ids_b:
            raise TooFewItems("both sets must be non-empty for cross-set pairs")
        if set(ids_a) == set(ids_b) and len(ids_a) < 2:
            raise TooFewItems("cannot avoid self-pairs between identical singleton sets")
        mode = mode or "real_syn"
        for _ in range(n):
            while True:
                left = ids_a[rng.randrange(len(ids_a))]
                right = ids_b[rng.randrange(len(ids_b))]
                if left != right:
                    break
            pairs.append((left, right))
    source_b = a if same_set else b
    for left, right in pairs:
        sims.append(cosine(a.vectors[left], source_b.vectors[right]))
    return SimilaritySample(mode=mode, pairs=tuple(pairs), similarities=tuple(sims))


def histogram(
    sample: SimilaritySample,
    bins: int = DEFAULT_BINS,
    value_range: tuple[float, float] = DEFAULT_RANGE,
) -> list[tuple[float, float, int]]:
    """Equal-width binned counts over a fixed range; last bin right-closed."""
    lo, hi = value_range
    width = (hi - lo) / bins
    counts = [0] * bins
    for value in sample.similarities:
        idx = int((value - lo) // width)
        if idx >= bins:
            idx = bins - 1
        if idx < 0:
            idx = 0
        counts[idx] += 1
    return [(lo + i * width, lo + (i + 1) * width, counts[i]) for i in range(bins)]


def write_pairs_csv(sample: SimilaritySample, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["mode", "id_a", "id_b", "similarity"])
        for (left, right), sim in zip(sample.pairs, sample.similarities):
            writer.writerow([sample.mode, left, right, repr(sim)])


def write_histogram_csv(
    binned: list[tuple[float, float, int]], path: str | Path
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, count in binned:
            writer.writerow([repr(left), repr(right), count])
