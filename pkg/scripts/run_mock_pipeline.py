#!/usr/bin/env python3
"""Drive the whole harness end-to-end on the demo data with a scripted mock
LLM: ingest -> retrieve -> generate -> split -> evaluate -> analyze.

The evaluate step uses score files derived deterministically from trial ids
(a stand-in for trainer output), and the analyze step uses hash-derived
pseudo-embeddings, so the demo exercises every CLI surface without network
access or the trainer component.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from pathlib import Path

from trialgen.cli import main as trialgen_main


def pseudo_embedding(text: str, dim: int = 16) -> list[float]:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    rng = random.Random(digest)
    return [rng.uniform(-1, 1) for _ in range(dim)]


def write_embeddings(jsonl_in: Path, out: Path) -> None:
    with open(jsonl_in) as src, open(out, "w") as dst:
        for line in src:
            obj = json.loads(line)
            row = {"id": obj["trial_id"], "vector": pseudo_embedding(obj["text"])}
            dst.write(json.dumps(row) + "\n")


def write_predictions(manifest: Path, corpus_files: list[Path], out: Path, seed: int) -> None:
    labels = {}
    for path in corpus_files:
        with open(path) as handle:
            for line in handle:
                obj = json.loads(line)
                labels[obj["trial_id"]] = obj["label"]
    spec = json.loads(manifest.read_text())
    rng = random.Random(seed)
    with open(out, "w") as handle:
        handle.write("item_id,label,score\n")
        for item_id in spec["test"]:
            label = labels[item_id]
            # noisy-but-informative scores so every metric is defined
            score = min(1.0, max(0.0, 0.35 + 0.3 * label + rng.uniform(-0.3, 0.3)))
            handle.write(f"{item_id},{label},{score:.4f}\n")


def run(argv: list[str]) -> None:
    code = trialgen_main(argv)
    if code != 0:
        print(f"step failed (exit {code}): trialgen {' '.join(argv)}", file=sys.stderr)
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", type=Path, default=Path("demo_data"))
    parser.add_argument("--out", type=Path, default=Path("demo_run"))
    parser.add_argument("--total", type=int, default=6)
    parser.add_argument("--seed", type=int, default=40)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    corpus = args.out / "corpus.jsonl"
    run(["ingest", "--xml", str(args.data / "xml"), "--labels", str(args.data / "labels.csv"),
         "--out", str(corpus)])
    run(["retrieve", "--corpus", str(corpus), "--vocab", str(args.data / "vocab.txt"),
         "--out", str(args.out / "eligible.csv")])
    run(["generate", "--corpus", str(corpus), "--vocab", str(args.data / "vocab.txt"),
         "--out-dir", str(args.out / "generation"),
         "--mock-fixture", str(args.data / "mock_responses.json"),
         "--total", str(args.total), "--seed", str(args.seed)])
    synthetic = args.out / "generation" / "synthetic.jsonl"
    run(["split", "--corpus", str(corpus), "--synthetic", str(synthetic),
         "--kind", "in_distribution", "--seed", str(args.seed),
         "--out-dir", str(args.out / "splits")])

    pred_files = []
    for seed in (40, 41, 42):
        pred = args.out / f"predictions_{seed}.csv"
        write_predictions(
            args.out / "splits" / "in_distribution_hybrid.json",
            [corpus, synthetic], pred, seed,
        )
        pred_files.append(str(pred))
    run(["evaluate", "--pred", *pred_files, "--out", str(args.out / "report.csv"),
         "--name", "hybrid", "--seeds", "40,41,42"])

    real_emb = args.out / "real_embeddings.jsonl"
    syn_emb = args.out / "synthetic_embeddings.jsonl"
    write_embeddings(corpus, real_emb)
    write_embeddings(synthetic, syn_emb)
    run(["analyze", "--real", str(real_emb), "--synthetic", str(syn_emb),
         "--out-dir", str(args.out / "analysis"), "--pairs", "2000", "--seed", str(args.seed)])

    print(f"\ndemo artifacts under {args.out}/")
    print((args.out / "report.csv").read_text())


if __name__ == "__main__":
    main()
