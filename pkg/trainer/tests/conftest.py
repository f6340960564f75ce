"""Fixture builders: a 32-sample corpus file and split manifest, no upstream
package imports (the harness is exercised only through its files and CLI).
"""

from __future__ import annotations

import json
import random

import pytest

CONDITIONS = ["hypertension", "diabetes", "arthritis", "asthma"]
GOOD = ["enrollment met target", "endpoint reached", "well tolerated", "adherence high"]
BAD = ["enrollment lagged", "endpoint missed", "poorly tolerated", "dropout high"]


def trial_text(trial_id: str, label: int, rng: random.Random) -> str:
    phrases = rng.sample(GOOD if label == 1 else BAD, 3)
    condition = rng.choice(CONDITIONS)
    return (
        f"brief_title: Study {trial_id} in {condition}\n"
        f"condition: {condition}\n"
        f"summary: {'; '.join(phrases)}\n"
        "intervention/intervention_name: aspirin\n"
    )


def write_corpus(path, n: int, prefix: str = "NCT", seed: int = 0) -> list[str]:
    rng = random.Random(seed)
    ids = []
    with open(path, "w") as handle:
        for i in range(n):
            trial_id = f"{prefix}{i:08d}"
            label = i % 2
            row = {
                "trial_id": trial_id,
                "text": trial_text(trial_id, label, rng),
                "label": label,
                "interventions": ["aspirin"],
            }
            handle.write(json.dumps(row) + "\n")
            ids.append(trial_id)
    return ids


def write_manifest(path, ids: list[str], n_train: int, n_val: int, seed: int = 40) -> None:
    train = ids[:n_train]
    val = ids[n_train : n_train + n_val]
    test = ids[n_train + n_val :]
    manifest = {
        "name": "fixture",
        "train": train,
        "val": val,
        "test": test,
        "composition": {"synthetic": 0, "real": len(train)},
        "seed": seed,
    }
    with open(path, "w") as handle:
        json.dump(manifest, handle, indent=2)


@pytest.fixture
def split_workspace(tmp_path):
    """32-sample corpus: 20 train / 6 val / 6 test."""
    corpus = tmp_path / "corpus.jsonl"
    ids = write_corpus(corpus, 32)
    manifest = tmp_path / "split.json"
    write_manifest(manifest, ids, n_train=20, n_val=6)
    return tmp_path, corpus, manifest
