"""CSV serialization of run reports.

``trace.csv`` columns:
    repeat          0-based repeat index (seed order)
    seed            seed of that repeat
    epoch           1-based epoch
    test_accuracy   overall test accuracy after the epoch
Failed repeats contribute the epochs they completed.

``summary.csv`` columns: ``metric, value``, one row per summary statistic.
"""

from __future__ import annotations

import csv

import numpy as np

SUMMARY_KEYS = ("last_mean", "last_max", "best_mean", "best_max", "average_accuracy",
                "overall_accuracy", "repeats_ok", "repeats_failed")


def fmt(value):
    """Shortest round-trip decimal; identical floats give identical text."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_trace_csv(report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["repeat", "seed", "epoch", "test_accuracy"])
        for i, rep in enumerate(report.repeats):
            for epoch, acc in enumerate(rep.trace, 1):
                w.writerow([i, rep.seed, epoch, fmt(acc)])


def read_trace_csv(path):
    """Return ``{repeat: np.ndarray of accuracies}``."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(int(row["repeat"]), []).append(float(row["test_accuracy"]))
    return {k: np.array(v) for k, v in out.items()}


def write_summary_csv(summary, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        for key in SUMMARY_KEYS:
            if key in summary:
                w.writerow([key, fmt(summary[key])])


def read_summary_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return {row["metric"]: float(row["value"]) for row in csv.DictReader(fh)}
