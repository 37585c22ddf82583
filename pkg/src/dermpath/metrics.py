"""Evaluation suite: accuracy, micro/macro F1, top-k metrics, per-class F1
and confusion matrices.

For single-label multiclass data micro-F1 equals accuracy (pooled TP =
correct, FP = FN = incorrect); the identity is asserted on every
evaluation.  Macro-F1 averages over the classes present in the truth
set only.
"""

from __future__ import annotations

import csv
import json
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MetricsError(Exception):
    pass


@dataclass
class ConfusionMatrix:
    class_names: list[str]  # ordered by descending truth frequency
    counts: np.ndarray  # rows = true, columns = predicted

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\pred"] + self.class_names)
            for name, row in zip(self.class_names, self.counts):
                writer.writerow([name] + [int(c) for c in row])

    def to_dict(self) -> dict:
        return {"class_names": self.class_names, "counts": self.counts.tolist()}


@dataclass
class MetricReport:
    accuracy: float
    micro_f1: float
    macro_f1: float
    topk_accuracy: float
    topk_f1: float
    k: int
    per_class_f1: dict[str, float]
    confusion: ConfusionMatrix
    n_documents: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "topk_accuracy": self.topk_accuracy,
            "topk_f1": self.topk_f1,
            "k": self.k,
            "per_class_f1": self.per_class_f1,
            "confusion": self.confusion.to_dict(),
            "n_documents": self.n_documents,
            "extras": self.extras,
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )


def _as_label_rankings(predictions) -> list[list[str]]:
    rankings = []
    for ranked in predictions:
        labels = []
        for item in ranked:
            labels.append(item[0] if isinstance(item, (tuple, list)) else item)
        rankings.append(labels)
    return rankings


def _class_order(truth: list[str]) -> list[str]:
    counts = Counter(truth)
    return sorted(counts, key=lambda c: (-counts[c], c))


def confusion_matrix(truth: list[str], predicted_top1: list[str]) -> ConfusionMatrix:
    """Counts[i][j] = #(true=i and predicted=j).

    Classes are ordered by descending truth frequency; predicted labels
    absent from the truth set are appended (with a warning) as extra
    all-zero-row classes.
    """
    if not truth:
        raise MetricsError("empty input")
    if len(truth) != len(predicted_top1):
        raise MetricsError("truth and prediction lengths differ")
    names = _class_order(truth)
    unseen = sorted(set(predicted_top1) - set(names))
    if unseen:
        warnings.warn(f"predicted labels not in truth set: {unseen}")
        names = names + unseen
    idx = {c: i for i, c in enumerate(names)}
    counts = np.zeros((len(names), len(names)), dtype=np.int64)
    for t, p in zip(truth, predicted_top1):
        counts[idx[t], idx[p]] += 1
    return ConfusionMatrix(names, counts)


def _per_class_f1(cm: ConfusionMatrix, present: set[str]) -> dict[str, float]:
    scores: dict[str, float] = {}
    for i, name in enumerate(cm.class_names):
        if name not in present:
            continue
        tp = cm.counts[i, i]
        fp = cm.counts[:, i].sum() - tp
        fn = cm.counts[i, :].sum() - tp
        denom = 2 * tp + fp + fn
        scores[name] = float(2 * tp / denom) if denom else 0.0
    return scores


def topk_metrics(truth: list[str], ranked_predictions, k: int) -> tuple[float, float]:
    """Top-k accuracy and set-based top-k F1.

    A document is a TP for its true class when the class appears in its
    top-k; every other predicted class in the top-k counts one FP; a miss
    counts one FN for the true class.  F1 is pooled micro-style, so at
    k=1 it collapses to plain accuracy/micro-F1.
    """
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")
    rankings = _as_label_rankings(ranked_predictions)
    if len(truth) != len(rankings) or not truth:
        raise MetricsError("truth and prediction sequences must be same non-empty length")
    hits = 0
    tp = fp = fn = 0
    for t, ranked in zip(truth, rankings):
        top = ranked[:k]
        if t in top:
            hits += 1
            tp += 1
        else:
            fn += 1
        fp += sum(1 for c in top if c != t)
    topk_acc = hits / len(truth)
    denom = 2 * tp + fp + fn
    topk_f1 = (2 * tp / denom) if denom else 0.0
    return topk_acc, float(topk_f1)


def evaluate_single_label(truth: list[str], predictions, k: int = 2) -> MetricReport:
    """Full metric report for single-label multiclass rankings."""
    if k < 1:
        raise MetricsError(f"k must be >= 1, got {k}")
    rankings = _as_label_rankings(predictions)
    if len(truth) != len(rankings) or not truth:
        raise MetricsError("truth and prediction sequences must be same non-empty length")
    if any(not r for r in rankings):
        raise MetricsError("every document needs at least one ranked prediction")
    top1 = [r[0] for r in rankings]
    cm = confusion_matrix(truth, top1)
    n = len(truth)
    correct = sum(1 for t, p in zip(truth, top1) if t == p)
    accuracy = correct / n
    # pooled single-label counts: TP = correct, FP = FN = incorrect
    micro_f1 = (2 * correct) / (2 * correct + 2 * (n - correct))
    assert abs(micro_f1 - accuracy) < 1e-12, "single-label micro-F1 must equal accuracy"
    present = set(truth)
    per_class = _per_class_f1(cm, present)
    macro_f1 = float(np.mean([per_class[c] for c in sorted(present)]))
    topk_acc, topk_f1 = topk_metrics(truth, rankings, k)
    return MetricReport(
        accuracy=accuracy,
        micro_f1=micro_f1,
        macro_f1=macro_f1,
        topk_accuracy=topk_acc,
        topk_f1=topk_f1,
        k=k,
        per_class_f1=per_class,
        confusion=cm,
        n_documents=n,
    )
