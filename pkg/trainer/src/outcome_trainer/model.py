"""Encoder resolution and the binary classification head.

encoder="tiny-random" builds a small randomly initialized BERT whose
vocabulary is derived deterministically from the provided texts, so tests and
demos run fully offline. Any other value is treated as a local directory or
hub name for full-scale runs (e.g. a BioBERT checkpoint).
"""

from __future__ import annotations

import collections
import re
from pathlib import Path

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer, BertConfig, BertModel, BertTokenizer

from .config import TINY_RANDOM_ENCODER

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
TINY_HIDDEN = 64
TINY_LAYERS = 2
TINY_HEADS = 2
TINY_VOCAB_CAP = 4000

# lowercase words and single punctuation marks, mirroring BERT's basic
# pre-tokenization closely enough for whole-word vocab entries
_WORDISH_RE = re.compile(r"\w+|[^\w\s]")


def _basic_tokens(text: str) -> list[str]:
    return _WORDISH_RE.findall(text.lower())


def build_vocab(texts: list[str], cap: int = TINY_VOCAB_CAP) -> dict[str, int]:
    """Most frequent tokens of the texts, deterministic order, specials first."""
    counts: collections.Counter[str] = collections.Counter()
    for text in texts:
        counts.update(_basic_tokens(text))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    vocab = {token: index for index, token in enumerate(SPECIAL_TOKENS)}
    for token, _ in ranked[: cap - len(SPECIAL_TOKENS)]:
        vocab[token] = len(vocab)
    return vocab


def build_tokenizer_and_encoder(
    encoder_name: str,
    texts: list[str],
    max_length: int,
    seed: int,
):
    """Return (tokenizer, encoder module, hidden_size)."""
    if encoder_name == TINY_RANDOM_ENCODER:
        vocab = build_vocab(texts)
        tokenizer = BertTokenizer(vocab=vocab, do_lower_case=True)
        torch.manual_seed(seed)
        config = BertConfig(
            vocab_size=len(vocab),
            hidden_size=TINY_HIDDEN,
            num_hidden_layers=TINY_LAYERS,
            num_attention_heads=TINY_HEADS,
            intermediate_size=TINY_HIDDEN * 2,
            max_position_embeddings=max_length,
        )
        encoder = BertModel(config)
        return tokenizer, encoder, config.hidden_size
    source = encoder_name
    if Path(encoder_name).exists():
        source = str(Path(encoder_name))
    tokenizer = AutoTokenizer.from_pretrained(source)
    encoder = AutoModel.from_pretrained(source)
    return tokenizer, encoder, encoder.config.hidden_size


class OutcomeClassifier(nn.Module):
    """Encoder + single-logit head trained with binary cross-entropy."""

    def __init__(self, encoder: nn.Module, hidden_size: int, dropout: float = 0.1):
        super().__init__()
        self.encoder = encoder
        self.dropout = nn.Dropout(dropout)
        self.head = nn.Linear(hidden_size, 1)

    def forward(self, input_ids, attention_mask):
        outputs = self.encoder(input_ids=input_ids, attention_mask=attention_mask)
        pooled = outputs.last_hidden_state[:, 0]  # first-token representation
        return self.head(self.dropout(pooled)).squeeze(-1)


def encode_texts(tokenizer, texts: list[str], max_length: int):
    return tokenizer(
        texts,
        truncation=True,
        max_length=max_length,
        padding="max_length",
        return_tensors="pt",
    )
