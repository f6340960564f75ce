"""Fine-tuning loop: binary cross-entropy training, best-validation-ROC-AUC
checkpoint selection, and test prediction export in the harness CSV contract.
"""

from __future__ import annotations

import copy
import json
import logging
from pathlib import Path

import torch
from sklearn.metrics import roc_auc_score
from torch.utils.data import DataLoader, TensorDataset

from .config import TrainConfig
from .data import Example, load_manifest, resolve_split
from .model import OutcomeClassifier, build_tokenizer_and_encoder, encode_texts

logger = logging.getLogger(__name__)


def _make_loader(tokenizer, examples: list[Example], config: TrainConfig, shuffle: bool):
    encoded = encode_texts(tokenizer, [e.text for e in examples], config.max_length)
    labels = torch.tensor([float(e.label) for e in examples])
    dataset = TensorDataset(encoded["input_ids"], encoded["attention_mask"], labels)
    generator = torch.Generator()
    generator.manual_seed(config.seed)
    return DataLoader(
        dataset, batch_size=config.batch_size, shuffle=shuffle, generator=generator
    )


@torch.no_grad()
def _scores(model, loader, device) -> list[float]:
    model.eval()
    scores: list[float] = []
    for input_ids, attention_mask, _ in loader:
        logits = model(input_ids.to(device), attention_mask.to(device))
        scores.extend(torch.sigmoid(logits).cpu().tolist())
    return scores


def _validation_auc(model, loader, labels, device) -> float:
    if len(set(labels)) < 2:
        return 0.5  # single-class validation cannot rank; keep earliest weights
    return float(roc_auc_score(labels, _scores(model, loader, device)))


def fine_tune(config: TrainConfig) -> tuple[Path, Path]:
    """Train the classifier and return (prediction CSV path, checkpoint path)."""
    torch.set_num_threads(config.num_threads)
    torch.manual_seed(config.seed)

    manifest = load_manifest(config.manifest)
    train, val, test = resolve_split(manifest, config.corpus_files)
    logger.info(
        "split %s: train=%d val=%d test=%d", manifest.get("name"), len(train), len(val), len(test)
    )

    tokenizer, encoder, hidden = build_tokenizer_and_encoder(
        config.encoder, [e.text for e in train], config.max_length, config.seed
    )
    device = torch.device("cpu")
    model = OutcomeClassifier(encoder, hidden).to(device)

    train_loader = _make_loader(tokenizer, train, config, shuffle=True)
    val_loader = _make_loader(tokenizer, val, config, shuffle=False)
    test_loader = _make_loader(tokenizer, test, config, shuffle=False)
    val_labels = [e.label for e in val]

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = torch.nn.BCEWithLogitsLoss()

    best_auc = float("-inf")
    best_state = copy.deepcopy(model.state_dict())
    for epoch in range(1, config.epochs + 1):
        model.train()
        total_loss = 0.0
        for input_ids, attention_mask, labels in train_loader:
            optimizer.zero_grad()
            logits = model(input_ids.to(device), attention_mask.to(device))
            loss = loss_fn(logits, labels.to(device))
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach()) * len(labels)
        val_auc = _validation_auc(model, val_loader, val_labels, device)
        logger.info(
            "epoch %d/%d: train loss %.4f, val ROC-AUC %.4f",
            epoch, config.epochs, total_loss / len(train), val_auc,
        )
        if val_auc > best_auc:
            best_auc = val_auc
            best_state = copy.deepcopy(model.state_dict())

    model.load_state_dict(best_state)
    config.out_dir.mkdir(parents=True, exist_ok=True)

    pred_path = config.out_dir / "predictions.csv"
    test_scores = _scores(model, test_loader, device)
    with open(pred_path, "w", encoding="utf-8") as handle:
        handle.write("item_id,label,score\n")
        for example, score in zip(test, test_scores):
            handle.write(f"{example.item_id},{example.label},{score:.6f}\n")

    checkpoint_path = config.out_dir / "checkpoint.pt"
    torch.save(
        {
            "model_state": best_state,
            "encoder": config.encoder,
            "best_val_roc_auc": best_auc,
            "config": config.as_dict(),
        },
        checkpoint_path,
    )
    with open(config.out_dir / "run.json", "w", encoding="utf-8") as handle:
        json.dump(
            {"config": config.as_dict(), "best_val_roc_auc": best_auc, "n_test": len(test)},
            handle,
            indent=2,
        )
        handle.write("\n")
    logger.info("wrote %s and %s", pred_path, checkpoint_path)
    return pred_path, checkpoint_path
