"""Data splits, the train/test loop and the summary metrics."""

from .metrics import (
    RepeatResult,
    RunReport,
    average_accuracy,
    confusion_matrix,
    overall_accuracy,
    predict,
    summarize,
)
from .reports import read_summary_csv, read_trace_csv, write_summary_csv, write_trace_csv
from .splits import SplitPlan, SplitResult, random_indices, split, take_per_class
from .training import RunTask, TrainConfig, batch_indices, evaluate, repeat_runs, train_run

__all__ = [
    "RepeatResult", "RunReport", "RunTask", "SplitPlan", "SplitResult", "TrainConfig",
    "average_accuracy", "batch_indices", "confusion_matrix", "evaluate", "overall_accuracy",
    "predict", "random_indices", "read_summary_csv", "read_trace_csv", "repeat_runs",
    "split", "summarize", "take_per_class", "train_run", "write_summary_csv",
    "write_trace_csv",
]
