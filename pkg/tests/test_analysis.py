"""Tests for embedding loading, cosine similarity, pair sampling, histograms."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trialgen.analysis import (
    DimensionMismatch,
    DuplicateId,
    EmbeddingSet,
    NonFiniteValue,
    SimilaritySample,
    TooFewItems,
    ZeroVector,
    cosine,
    histogram,
    load_embeddings,
    sample_pairs,
    write_histogram_csv,
    write_pairs_csv,
)


def embedding_set(vectors: dict[str, list[float]]) -> EmbeddingSet:
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
    dim = len(next(iter(arrays.values())))
    return EmbeddingSet(dimension=dim, vectors=arrays)


def write_jsonl(path, rows):
    with open(path, "w") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")


class TestLoadEmbeddings:
    def test_basic(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_jsonl(path, [{"id": "a", "vector": [1, 2, 3]}, {"id": "b", "vector": [0, 1, 0]}])
        emb = load_embeddings(path)
        assert emb.dimension == 3
        assert len(emb) == 2

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_jsonl(path, [{"id": "a", "vector": [1, 2, 3]}, {"id": "b", "vector": [1, 2, 3, 4]}])
        with pytest.raises(DimensionMismatch):
            load_embeddings(path)

    def test_non_finite(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_jsonl(path, [{"id": "a", "vector": [1.0, float("nan")]}])
        with pytest.raises(NonFiniteValue):
            load_embeddings(path)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_jsonl(path, [{"id": "a", "vector": [1.0]}, {"id": "a", "vector": [2.0]}])
        with pytest.raises(DuplicateId):
            load_embeddings(path)


class TestCosine:
    def test_identical(self):
        assert cosine([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine([1, 0], [0, 1]) == 0.0

    def test_analytic(self):
        assert cosine([1, 1], [1, 0]) == pytest.approx(math.sqrt(2) / 2, abs=1e-8)

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine([0, 0], [1, 0])

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=2,
            max_size=8,
        ).filter(lambda v: any(abs(x) > 1e-6 for x in v))
    )
    def test_self_similarity_is_one(self, vec):
        assert cosine(vec, vec) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(-50, 50, allow_nan=False), min_size=3, max_size=3).filter(
            lambda v: any(abs(x) > 1e-6 for x in v)
        ),
        st.lists(st.floats(-50, 50, allow_nan=False), min_size=3, max_size=3).filter(
            lambda v: any(abs(x) > 1e-6 for x in v)
        ),
    )
    def test_symmetry_and_range(self, u, v):
        value = cosine(u, v)
        assert value == cosine(v, u)
        assert -1.0 <= value <= 1.0


class TestSamplePairs:
    def test_forced_two_item_set(self):
        emb = embedding_set({"a": [1, 0], "b": [0, 1]})
        sample = sample_pairs(emb, n=5, seed=0)
        assert len(sample.pairs) == 5
        assert all(set(pair) == {"a", "b"} for pair in sample.pairs)

    def test_deterministic(self):
        emb = embedding_set({f"v{i}": [i, 1.0] for i in range(8)})
        first = sample_pairs(emb, n=100, seed=42)
        second = sample_pairs(emb, n=100, seed=42)
        assert first.pairs == second.pairs
        assert first.similarities == second.similarities

    def test_no_self_pairs(self):
        emb = embedding_set({f"v{i}": [i + 1, 2.0] for i in range(5)})
        sample = sample_pairs(emb, n=500, seed=7)
        assert all(left != right for left, right in sample.pairs)

    def test_cross_mode_provenance(self):
        real = embedding_set({f"r{i}": [i + 1.0, 0.5] for i in range(4)})
        syn = embedding_set({f"s{i}": [0.5, i + 1.0] for i in range(4)})
        sample = sample_pairs(real, syn, n=200, seed=3, mode="real_syn")
        assert all(left.startswith("r") and right.startswith("s") for left, right in sample.pairs)

    def test_too_few_same_set(self):
        emb = embedding_set({"only": [1.0]})
        with pytest.raises(TooFewItems):
            sample_pairs(emb, n=3, seed=0)

    def test_similarities_in_range(self):
        emb = embedding_set({f"v{i}": [math.cos(i), math.sin(i)] for i in range(10)})
        sample = sample_pairs(emb, n=300, seed=1)
        assert all(-1.0 <= s <= 1.0 for s in sample.similarities)


class TestHistogram:
    def test_all_mass_in_last_bin(self):
        sample = SimilaritySample("real_real", (("a", "b"),) * 3, (1.0, 1.0, 1.0))
        binned = histogram(sample, bins=4)
        assert [count for _, _, count in binned] == [0, 0, 0, 3]

    def test_empty_sample(self):
        sample = SimilaritySample("real_real", (), ())
        binned = histogram(sample, bins=4)
        assert [count for _, _, count in binned] == [0, 0, 0, 0]

    def test_hand_placement(self):
        sample = SimilaritySample("real_real", (("a", "b"),) * 3, (-1.0, 0.0, 1.0))
        binned = histogram(sample, bins=4)
        assert [count for _, _, count in binned] == [1, 0, 1, 1]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), max_size=200))
    def test_counts_sum_to_sample_size(self, sims):
        sample = SimilaritySample("real_real", tuple(("a", "b") for _ in sims), tuple(sims))
        binned = histogram(sample)
        assert sum(count for _, _, count in binned) == len(sims)


class TestCsvExports:
    def test_pairs_csv(self, tmp_path):
        emb = embedding_set({"a": [1, 0], "b": [0, 1]})
        sample = sample_pairs(emb, n=2, seed=0)
        path = tmp_path / "pairs.csv"
        write_pairs_csv(sample, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "mode,id_a,id_b,similarity"
        assert len(lines) == 3

    def test_histogram_csv(self, tmp_path):
        sample = SimilaritySample("syn_syn", (("a", "b"),), (0.25,))
        path = tmp_path / "hist.csv"
        write_histogram_csv(histogram(sample, bins=8), path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "bin_left,bin_right,count"
        assert len(lines) == 9
        total = sum(int(line.split(",")[2]) for line in lines[1:])
        assert total == 1
