"""Accuracy, macro-F1 and interest-F1 over a binary confusion matrix."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..errors import DataError

METRIC_NAMES = ("accuracy", "macro_f1", "interest_f1")
INTEREST_CLASS = 1


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def _harmonic(precision: float, recall: float) -> float:
    return _ratio(2.0 * precision * recall, precision + recall)


@dataclass(frozen=True)
class MetricsReport:
    """One evaluation; class 1 is the class of interest."""

    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    interest_precision: float
    interest_recall: float
    interest_f1: float

    @classmethod
    def from_counts(cls, tp: int, tn: int, fp: int, fn: int) -> MetricsReport:
        total = tp + tn + fp + fn
        if total == 0:
            raise DataError("Cannot compute metrics over an empty evaluation set")
        precision = (_ratio(tn, tn + fn), _ratio(tp, tp + fp))
        recall = (_ratio(tn, tn + fp), _ratio(tp, tp + fn))
        macro_precision = sum(precision) / 2.0
        macro_recall = sum(recall) / 2.0
        return cls(
            tp=int(tp),
            tn=int(tn),
            fp=int(fp),
            fn=int(fn),
            accuracy=(tp + tn) / total,
            macro_precision=macro_precision,
            macro_recall=macro_recall,
            # harmonic mean of the macro averages, not the mean of per-class F1
            macro_f1=_harmonic(macro_precision, macro_recall),
            interest_precision=precision[INTEREST_CLASS],
            interest_recall=recall[INTEREST_CLASS],
            interest_f1=_harmonic(precision[INTEREST_CLASS], recall[INTEREST_CLASS]),
        )

    @property
    def support(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def confusion(self) -> Dict[str, int]:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def compute_metrics(predicted: np.ndarray, truth: np.ndarray, eval_mask: np.ndarray) -> MetricsReport:
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    mask = np.asarray(eval_mask, dtype=bool)
    if predicted.shape != truth.shape or mask.shape != truth.shape:
        raise DataError(f"Shapes differ: predicted {predicted.shape}, truth {truth.shape}, mask {mask.shape}")
    if not mask.any():
        raise DataError("Evaluation mask selects no nodes")
    p = predicted[mask]
    t = truth[mask]
    if not (np.isin(p, (0, 1)).all() and np.isin(t, (0, 1)).all()):
        raise DataError("Predictions and truth must be 0/1 labels")
    tp = int(np.sum((p == 1) & (t == 1)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fp = int(np.sum((p == 1) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    return MetricsReport.from_counts(tp, tn, fp, fn)


@dataclass(frozen=True)
class MetricsSummary:
    """Per-run values with their mean and population standard deviation."""

    runs: List[MetricsReport] = field(default_factory=list)

    def values(self, metric: str) -> List[float]:
        return [float(getattr(report, metric)) for report in self.runs]

    def mean(self, metric: str) -> float:
        values = self.values(metric)
        return float(np.mean(values)) if values else 0.0

    def std(self, metric: str) -> float:
        values = self.values(metric)
        return float(np.std(values)) if values else 0.0

    def to_dict(self) -> Dict[str, Dict[str, float]]:
        return {metric: {"mean": self.mean(metric), "std": self.std(metric)} for metric in METRIC_NAMES}


def summarize(reports: Sequence[MetricsReport]) -> MetricsSummary:
    return MetricsSummary(runs=list(reports))


__all__ = ["INTEREST_CLASS", "METRIC_NAMES", "MetricsReport", "MetricsSummary", "compute_metrics", "summarize"]
