"""Train/test partitioning of windowed records.

``random`` windows each record first and then shuffles the windows.
``order`` cuts each raw record at the train fraction and windows the two
segments separately, so no window straddles the cut. ``kfold_time`` cuts
each record into ``fold_count`` contiguous blocks and holds one out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datasets.records import WindowedDataset, window_records
from ..errors import ConfigurationError, EmptyDatasetError
from ..transforms import WINDOW_LENGTH

STRATEGIES = ("random", "order", "kfold_time")


@dataclass(frozen=True)
class SplitPlan:
    strategy: str = "random"
    train_fraction: float = 0.8
    fold_count: int = 4
    fold: int | None = None  # held-out fold for kfold_time; last fold by default
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown split strategy {self.strategy!r}; choose from {STRATEGIES}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.fold_count < 2:
            raise ConfigurationError(f"fold_count must be >= 2, got {self.fold_count}")
        if self.fold is not None and not 0 <= self.fold < self.fold_count:
            raise ConfigurationError(f"fold {self.fold} outside 0..{self.fold_count - 1}")


@dataclass
class SplitResult:
    dataset: WindowedDataset
    train: np.ndarray
    test: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def train_set(self):
        return self.dataset.subset(self.train)

    @property
    def test_set(self):
        return self.dataset.subset(self.test)


def _count(fraction, n):
    # tolerate float round-off such as 0.29 * 100 = 28.999...
    return int(np.floor(fraction * n + 1e-9))


def _class_warnings(ds, train, test):
    out = []
    present_train = set(np.unique(ds.labels[train]).tolist())
    present_test = set(np.unique(ds.labels[test]).tolist())
    for c in sorted(set(ds.labels.tolist())):
        name = ds.class_names[c] if c < len(ds.class_names) else str(c)
        if c not in present_train:
            out.append(f"class {name} has no training windows")
        if c not in present_test:
            out.append(f"class {name} has no test windows")
    return out


def random_indices(n, fraction, seed):
    perm = np.random.default_rng(seed).permutation(n)
    k = _count(fraction, n)
    return np.sort(perm[:k]), np.sort(perm[k:])


def split(records, plan, length=WINDOW_LENGTH, class_count=None, class_names=()):
    """Partition ``records`` (a list of SignalRecord) according to ``plan``.

    Returns a :class:`SplitResult` whose ``train`` and ``test`` index into
    ``result.dataset``. A :class:`WindowedDataset` is also accepted for the
    random strategy.
    """
    if isinstance(records, WindowedDataset):
        if plan.strategy != "random":
            raise ConfigurationError("order and kfold_time splits need raw records, not windows")
        ds = records
    else:
        records = list(records)
        if not records:
            raise EmptyDatasetError("no records to split")
        if class_count is None:
            class_count = max(r.class_id for r in records) + 1
        if plan.strategy == "random":
            ds = window_records(records, length, class_count=class_count, class_names=class_names)
        elif plan.strategy == "order":
            cuts = [_count(plan.train_fraction, len(r)) for r in records]
            train_part = _window_or_none(records, length, 0, cuts, class_count, class_names)
            test_part = _window_or_none(records, length, cuts, None, class_count, class_names)
            return _combine(train_part, test_part, class_count, class_names)
        else:
            fold = plan.fold_count - 1 if plan.fold is None else plan.fold
            bounds = [np.linspace(0, len(r), plan.fold_count + 1).astype(np.int64) for r in records]
            train_parts, test_part = [], None
            for k in range(plan.fold_count):
                lo = [b[k] for b in bounds]
                hi = [b[k + 1] for b in bounds]
                part = _window_or_none(records, length, lo, hi, class_count, class_names)
                if k == fold:
                    test_part = part
                elif part is not None:
                    train_parts.append(part)
            train_part = WindowedDataset.concat(train_parts) if train_parts else None
            return _combine(train_part, test_part, class_count, class_names)

    counts = np.bincount(ds.labels, minlength=ds.class_count)
    short = [c for c in np.flatnonzero(counts) if counts[c] < 2]
    if short:
        raise EmptyDatasetError(f"classes {short} have fewer than 2 windows")
    train, test = random_indices(len(ds), plan.train_fraction, plan.seed)
    return SplitResult(ds, train, test, _class_warnings(ds, train, test))


def _window_or_none(records, length, start, stop, class_count, class_names):
    try:
        return window_records(records, length, start, stop, class_count, class_names)
    except EmptyDatasetError:
        return None


def _combine(train_part, test_part, class_count, class_names):
    if train_part is None or test_part is None:
        side = "training" if train_part is None else "test"
        raise EmptyDatasetError(f"the {side} side of the split has no complete window")
    ds = WindowedDataset.concat([train_part, test_part])
    n_train = len(train_part)
    train = np.arange(n_train)
    test = np.arange(n_train, len(ds))
    return SplitResult(ds, train, test, _class_warnings(ds, train, test))


def take_per_class(labels, candidates, counts, order=None, what="training"):
    """Pick ``counts[c]`` indices of class ``c`` from ``candidates``.

    ``order`` (``None`` keeps the candidates' order) decides which windows
    come first, e.g. record offsets for earliest-first selection.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if order is not None:
        candidates = candidates[np.argsort(np.asarray(order)[candidates], kind="stable")]
    picked = []
    for c, n in enumerate(counts):
        pool = candidates[labels[candidates] == c]
        if len(pool) < n:
            raise EmptyDatasetError(f"class {c}: need {n} {what} windows, only {len(pool)} available")
        picked.append(pool[:n])
    return np.sort(np.concatenate(picked)) if picked else np.empty(0, dtype=np.int64)
