"""t-SNE projection of real vs synthetic embeddings: coordinates CSV + figure."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from sklearn.manifold import TSNE

logger = logging.getLogger(__name__)


def _load(path: str | Path) -> tuple[list[str], np.ndarray]:
    ids, vectors = [], []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            ids.append(str(obj["id"]))
            vectors.append(obj["vector"])
    if not ids:
        raise ValueError(f"no embeddings in {path}")
    return ids, np.asarray(vectors, dtype=np.float64)


def tsne_plot(
    real_embeddings: str | Path,
    synthetic_embeddings: str | Path,
    seed: int,
    out_coords: str | Path,
    out_png: str | Path,
    perplexity: float | None = None,
) -> tuple[Path, Path]:
    """Project both sets to 2-D; returns (coordinates CSV path, PNG path)."""
    real_ids, real_vecs = _load(real_embeddings)
    syn_ids, syn_vecs = _load(synthetic_embeddings)
    stacked = np.vstack([real_vecs, syn_vecs])
    n = stacked.shape[0]
    if perplexity is None:
        perplexity = max(2.0, min(30.0, (n - 1) / 3.0))
    coords = TSNE(
        n_components=2, random_state=seed, perplexity=perplexity, init="pca"
    ).fit_transform(stacked)

    sources = ["real"] * len(real_ids) + ["synthetic"] * len(syn_ids)
    all_ids = real_ids + syn_ids
    out_coords = Path(out_coords)
    with open(out_coords, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "source", "x", "y"])
        for item_id, source, (x, y) in zip(all_ids, sources, coords):
            writer.writerow([item_id, source, repr(float(x)), repr(float(y))])

    out_png = Path(out_png)
    fig, ax = plt.subplots(figsize=(6, 5))
    for source, color in (("real", "tab:blue"), ("synthetic", "tab:orange")):
        mask = np.array([s == source for s in sources])
        ax.scatter(coords[mask, 0], coords[mask, 1], s=14, alpha=0.7, label=source, c=color)
    ax.set_title("t-SNE of trial embeddings")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    logger.info("wrote %s and %s (%d points)", out_coords, out_png, n)
    return out_coords, out_png
