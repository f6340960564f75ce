"""Classification metrics over prediction files, and cross-seed aggregation.

accuracy/precision/recall use the 0.5 decision threshold; ROC-AUC is the
rank-based pairwise probability with half-credit ties; PR-AUC is average
precision (step-wise, not interpolated). Undefined precision/recall raise
rather than silently reporting 0.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

METRIC_NAMES = ("accuracy", "precision", "recall", "roc_auc", "pr_auc")


class MetricsError(Exception):
    pass


class OutOfRange(MetricsError):
    pass


class UndefinedPrecision(MetricsError):
    pass


class UndefinedRecall(MetricsError):
    pass


class SingleClass(MetricsError):
    pass


class NoPositives(MetricsError):
    pass


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    item_id: str
    label: int
    score: float


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    roc_auc: float
    pr_auc: float
    n: int
    seed: int = 0

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class AggregateReport:
    means: dict[str, float]
    stds: dict[str, float]
    run_count: int


def classify(score: float, threshold: float = 0.5) -> int:
    if not 0.0 <= score <= 1.0:
        raise OutOfRange(f"score {score} outside [0, 1]")
    return 1 if score >= threshold else 0


def threshold_metrics(
    preds: Sequence[PredictionRecord], threshold: float = 0.5
) -> tuple[float, float, float]:
    """(accuracy, precision, recall) at the given threshold."""
    if not preds:
        raise MetricsError("no predictions")
    tp = fp = tn = fn = 0
    for record in preds:
        predicted = classify(record.score, threshold)
        if predicted == 1:
            if record.label == 1:
                tp += 1
            else:
                fp += 1
        else:
            if record.label == 1:
                fn += 1
            else:
                tn += 1
    accuracy = (tp + tn) / len(preds)
    if tp + fp == 0:
        raise UndefinedPrecision("no predicted positives; precision undefined")
    if tp + fn == 0:
        raise UndefinedRecall("no actual positives; recall undefined")
    return accuracy, tp / (tp + fp), tp / (tp + fn)


def roc_auc(preds: Sequence[PredictionRecord]) -> float:
    """P(score_pos > score_neg) + 0.5 P(tie), via average ranks."""
    n = len(preds)
    n_pos = sum(1 for r in preds if r.label == 1)
    if n_pos == 0 or n_pos == n:
        raise SingleClass("ROC-AUC needs both classes present")
    order = sorted(range(n), key=lambda i: preds[i].score)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        score_i = preds[order[i]].score
        while j + 1 < n and preds[order[j + 1]].score == score_i:
            j += 1
        average_rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = average_rank
        i = j + 1
    pos_rank_sum = sum(ranks[i] for i in range(n) if preds[i].label == 1)
    n_neg = n - n_pos
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def pr_auc(preds: Sequence[PredictionRecord]) -> float:
    """Average precision: precision at each positive's rank, times 1/P.

    Ties are broken by descending score then ascending item_id, which makes
    the value deterministic.
    """
    n_pos = sum(1 for r in preds if r.label == 1)
    if n_pos == 0:
        raise NoPositives("PR-AUC needs at least one positive")
    ranked = sorted(preds, key=lambda r: (-r.score, r.item_id))
    seen_pos = 0
    total = 0.0
    for rank, record in enumerate(ranked, start=1):
        if record.label == 1:
            seen_pos += 1
            total += seen_pos / rank
    return total / n_pos


def evaluate(preds: Sequence[PredictionRecord], seed: int = 0) -> EvalReport:
    """Compute the full metric quintet for one prediction set."""
    accuracy, precision, recall = threshold_metrics(preds)
    return EvalReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        roc_auc=roc_auc(preds),
        pr_auc=pr_auc(preds),
        n=len(preds),
        seed=seed,
    )


def aggregate(reports: Sequence[EvalReport]) -> AggregateReport:
    """Per-metric mean and sample (n-1) standard deviation across runs."""
    if not reports:
        raise MetricsError("need at least one report to aggregate")
    means, stds = {}, {}
    for name in METRIC_NAMES:
        values = [report.metric(name) for report in reports]
        means[name] = statistics.fmean(values)
        stds[name] = statistics.stdev(values) if len(values) > 1 else 0.0
    return AggregateReport(means=means, stds=stds, run_count=len(reports))


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    """Read a prediction CSV (header: item_id,label,score)."""
    records = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != [
            "item_id",
            "label",
            "score",
        ]:
            raise MetricsError(f"expected header 'item_id,label,score', got {header!r}")
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            label = int(row[1])
            if label not in (0, 1):
                raise MetricsError(f"label must be 0 or 1, got {row[1]!r}")
            score = float(row[2])
            if not 0.0 <= score <= 1.0:
                raise OutOfRange(f"score {score} outside [0, 1] for {row[0]!r}")
            records.append(PredictionRecord(item_id=row[0], label=label, score=score))
    if not records:
        raise MetricsError(f"no prediction rows in {path}")
    return records


def write_report_csv(
    rows: Sequence[tuple[str, AggregateReport]], path: str | Path
) -> None:
    """Write aggregate rows in the results-table column layout."""
    columns = ["fine_tuning"]
    for name in METRIC_NAMES:
        columns.extend([f"{name}_mean", f"{name}_std"])
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for label, report in rows:
            row = [label]
            for name in METRIC_NAMES:
                row.extend([f"{report.means[name]:.6f}", f"{report.stds[name]:.6f}"])
            writer.writerow(row)
