"""Raw signal records and their windowed view."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, EmptyDatasetError
from ..transforms import WINDOW_LENGTH


@dataclass
class SignalRecord:
    samples: np.ndarray
    sampling_rate_hz: float
    dataset_id: str
    file_path: str
    channel_name: str
    condition: dict = field(default_factory=dict)
    class_id: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).ravel()
        if self.samples.size == 0:
            raise DataError(f"record {self.file_path}:{self.channel_name} has no samples")
        if not self.sampling_rate_hz > 0:
            raise DataError(f"record {self.file_path}: sampling rate must be positive")
        if self.class_id < 0:
            raise DataError(f"record {self.file_path}: negative class id {self.class_id}")

    def __len__(self):
        return self.samples.size


@dataclass
class WindowedDataset:
    """Non-overlapping windows with provenance back to their records."""

    windows: np.ndarray        # [n, length]
    labels: np.ndarray         # [n]
    record_index: np.ndarray   # [n] index into the source record list
    offsets: np.ndarray        # [n] start sample within the record
    class_count: int
    class_names: tuple = ()

    def __post_init__(self):
        n = len(self.windows)
        if not (len(self.labels) == len(self.record_index) == len(self.offsets) == n):
            raise DataError("windowed dataset arrays disagree in length")

    def __len__(self):
        return len(self.labels)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return WindowedDataset(self.windows[idx], self.labels[idx], self.record_index[idx],
                               self.offsets[idx], self.class_count, self.class_names)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.class_count)

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            raise EmptyDatasetError("nothing to concatenate")
        first = parts[0]
        return cls(
            np.concatenate([p.windows for p in parts]),
            np.concatenate([p.labels for p in parts]),
            np.concatenate([p.record_index for p in parts]),
            np.concatenate([p.offsets for p in parts]),
            first.class_count,
            first.class_names,
        )


def window_records(records, length=WINDOW_LENGTH, start=0, stop=None, class_count=None,
                   class_names=(), record_ids=None):
    """Cut ``records[i].samples[start:stop]`` into non-overlapping windows.

    ``start``/``stop`` may be per-record sequences. Offsets are reported
    relative to the full record, so segments cut from the same record stay
    comparable.
    """
    records = list(records)
    if not records:
        raise EmptyDatasetError("no records to window")
    n_rec = len(records)
    starts = np.broadcast_to(np.asarray(start, dtype=object), (n_rec,))
    stops = np.broadcast_to(np.asarray(stop, dtype=object), (n_rec,))
    ids = range(n_rec) if record_ids is None else record_ids
    windows, labels, rec_idx, offsets = [], [], [], []
    for rid, rec, lo, hi in zip(ids, records, starts, stops):
        x = rec.samples
        lo = int(lo or 0)
        hi = len(x) if hi is None else int(hi)
        count = max(0, (hi - lo) // length)
        if count == 0:
            continue
        block = x[lo : lo + count * length].reshape(count, length)
        windows.append(block)
        labels.append(np.full(count, rec.class_id, dtype=np.int64))
        rec_idx.append(np.full(count, rid, dtype=np.int64))
        offsets.append(lo + length * np.arange(count, dtype=np.int64))
    if not windows:
        raise EmptyDatasetError(f"no record is long enough for one window of {length} samples")
    if class_count is None:
        class_count = max(r.class_id for r in records) + 1
    return WindowedDataset(np.concatenate(windows), np.concatenate(labels),
                           np.concatenate(rec_idx), np.concatenate(offsets),
                           int(class_count), tuple(class_names))
