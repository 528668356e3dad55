"""Confusion matrices, run reports and the four summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, EmptyReportError


def predict(logits):
    """Argmax over classes; exact ties go to the lowest class index."""
    return np.argmax(np.asarray(logits), axis=1)


def confusion_matrix(y_true, y_pred, class_count):
    """Rows are true classes, columns predictions."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DataError("label and prediction vectors differ in length")
    if y_true.size and (min(y_true.min(), y_pred.min()) < 0
                        or max(y_true.max(), y_pred.max()) >= class_count):
        raise DataError(f"labels outside 0..{class_count - 1}")
    cm = np.zeros((class_count, class_count), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def overall_accuracy(cm):
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise DataError("empty confusion matrix")
    return np.trace(cm) / total


def average_accuracy(cm):
    """Mean per-class recall over classes that occur in the test set."""
    cm = np.asarray(cm)
    support = cm.sum(axis=1)
    present = support > 0
    if not present.any():
        raise DataError("empty confusion matrix")
    return float(np.mean(np.diag(cm)[present] / support[present]))


@dataclass
class RepeatResult:
    seed: int
    trace: np.ndarray                    # test accuracy after each epoch
    confusion: np.ndarray | None = None  # after the last epoch
    train_trace: np.ndarray | None = None
    failed: bool = False
    failed_epoch: int | None = None      # 1-based epoch of the divergence
    error: str = ""


@dataclass
class RunReport:
    repeats: list = field(default_factory=list)
    epochs: int = 100
    warnings: list = field(default_factory=list)

    @property
    def seeds(self):
        return [r.seed for r in self.repeats]

    @property
    def successful(self):
        return [r for r in self.repeats if not r.failed]

    @property
    def failures(self):
        return [r for r in self.repeats if r.failed]


def _mean(values):
    """Correctly rounded sum over n, kept inside [min, max] as the exact mean is.

    fsum is monotone, so elementwise dominance carries over to the means.
    """
    m = math.fsum(values) / len(values)
    return float(min(max(m, np.min(values)), np.max(values)))


def summarize(report):
    ok = report.successful
    if not ok:
        raise EmptyReportError("no successful repeat to summarize")
    last = np.array([r.trace[-1] for r in ok])
    best = np.array([np.max(r.trace) for r in ok])
    confusion = sum(r.confusion for r in ok)
    return {
        "last_mean": _mean(last),
        "last_max": float(last.max()),
        "best_mean": _mean(best),
        "best_max": float(best.max()),
        "average_accuracy": float(np.mean([average_accuracy(r.confusion) for r in ok])),
        "overall_accuracy": float(overall_accuracy(confusion)),
        "confusion": confusion,
        "repeats_ok": len(ok),
        "repeats_failed": len(report.failures),
    }
