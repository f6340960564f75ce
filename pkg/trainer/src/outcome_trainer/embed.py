"""Pooled-embedding extraction in the harness {id, vector} JSON-lines contract."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import torch

from .config import TINY_RANDOM_ENCODER
from .data import load_text_rows
from .model import build_tokenizer_and_encoder, encode_texts

logger = logging.getLogger(__name__)


def embed(
    texts_file: str | Path,
    out_file: str | Path,
    encoder: str = TINY_RANDOM_ENCODER,
    max_length: int = 128,
    batch_size: int = 16,
    seed: int = 40,
    num_threads: int = 1,
) -> Path:
    """One first-token pooled vector per input row, id-preserving."""
    torch.set_num_threads(num_threads)
    rows = load_text_rows(texts_file)
    tokenizer, model, _ = build_tokenizer_and_encoder(
        encoder, [text for _, text, _ in rows], max_length, seed
    )
    model.eval()

    out_file = Path(out_file)
    with torch.no_grad(), open(out_file, "w", encoding="utf-8") as handle:
        for start in range(0, len(rows), batch_size):
            batch = rows[start : start + batch_size]
            encoded = encode_texts(tokenizer, [text for _, text, _ in batch], max_length)
            outputs = model(
                input_ids=encoded["input_ids"], attention_mask=encoded["attention_mask"]
            )
            pooled = outputs.last_hidden_state[:, 0]
            for (item_id, _, _), vector in zip(batch, pooled):
                record = {"id": item_id, "vector": [round(float(x), 8) for x in vector]}
                handle.write(json.dumps(record) + "\n")
    logger.info("wrote %d embeddings to %s", len(rows), out_file)
    return out_file
