"""Load registered corpora from disk into :class:`SignalRecord` lists."""

from __future__ import annotations

import hashlib
import os
import re
from pathlib import Path

import numpy as np

from ..errors import CorruptFileError, DataError, ManifestError, UnsupportedFormatError
from .matfile import load_mat_v5
from .records import SignalRecord
from .registry import DATA_ROOT_ENV, get_registry, select_mat, select_table


def data_root(root_dir=None):
    """Resolve the dataset root from the argument or the environment."""
    root = root_dir or os.environ.get(DATA_ROOT_ENV)
    if not root:
        raise ManifestError(
            f"no dataset root given; pass root_dir or set {DATA_ROOT_ENV}"
        )
    return Path(root)


def _split_numeric(line):
    return [t for t in re.split(r"[,;\t ]+", line.strip()) if t]


def read_table(path):
    """Read a numeric text table, skipping leading non-numeric header lines.

    The delimiter (tab, comma, semicolon or whitespace) is detected from the
    first numeric line; empty trailing fields are dropped.
    """
    rows = []
    width = None
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            tokens = _split_numeric(line)
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                if rows:
                    raise DataError(f"{path}:{lineno}: non-numeric value after data began")
                continue
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(values)}")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no numeric rows found")
    return np.asarray(rows, dtype=np.float64)


def _read_entry(path, selector, cache):
    key = str(path)
    suffix = path.suffix.lower()
    if key not in cache:
        if suffix == ".mat":
            cache.clear()  # one parsed file at a time keeps memory flat
            cache[key] = load_mat_v5(path)
        elif suffix in (".csv", ".txt", ".tsv"):
            cache.clear()
            cache[key] = read_table(path)
        else:
            raise UnsupportedFormatError(f"{path}: unsupported file type {suffix!r}")
    if suffix == ".mat":
        return select_mat(cache[key], selector, path.name)
    return select_table(cache[key], selector, path.name)


def missing_files(dataset_id, root_dir=None, condition=None, labels=None):
    reg = get_registry(dataset_id)
    base = data_root(root_dir) / reg.subdir
    return [e.path for e in reg.select(condition, labels) if not (base / e.path).is_file()]


def load_dataset(dataset_id, root_dir=None, condition=None, labels=None):
    """Load every manifest entry of ``dataset_id`` (after filtering).

    ``condition`` filters on the registry's condition metadata (defaults to
    the manifest's ``default_condition``); ``labels`` restricts classes.
    Class ids always come from the full registry, so they are stable across
    filters.
    """
    reg = get_registry(dataset_id)
    base = data_root(root_dir) / reg.subdir
    entries = reg.select(condition, labels)
    if not entries:
        raise ManifestError(f"{dataset_id}: no manifest entries match the filter")
    absent = [e.path for e in entries if not (base / e.path).is_file()]
    if absent:
        shown = "\n  ".join(absent[:20])
        more = f"\n  ... and {len(absent) - 20} more" if len(absent) > 20 else ""
        raise ManifestError(
            f"{dataset_id}: {len(absent)} file(s) missing under {base}:\n  {shown}{more}",
            missing=absent,
        )
    cache = {}
    records = []
    for e in entries:
        channel, samples = _read_entry(base / e.path, e.selector, cache)
        records.append(SignalRecord(
            samples=samples,
            sampling_rate_hz=reg.rate_for(e.path),
            dataset_id=reg.dataset_id,
            file_path=e.path,
            channel_name=channel,
            condition=reg.condition_for(e),
            class_id=reg.class_id(e.label),
        ))
    return records


def sha256_file(path, chunk=1 << 20):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while block := fh.read(chunk):
            h.update(block)
    return h.hexdigest()


def verify_dataset(dataset_id, root_dir=None):
    """Check presence (and checksums where known) of every manifest entry.

    Returns ``(ok, problems)`` where ``problems`` lists human-readable lines.
    Unlike :func:`load_dataset`, no condition filter is applied.
    """
    reg = get_registry(dataset_id)
    base = data_root(root_dir) / reg.subdir
    problems = []
    for e in reg.entries:
        p = base / e.path
        if not p.is_file():
            problems.append(f"missing  {e.path}")
        elif e.checksum and sha256_file(p) != e.checksum.lower():
            problems.append(f"checksum {e.path}")
    return not problems, problems


def try_parse(path):
    """Open a data file and report a readable error string (or None)."""
    try:
        if Path(path).suffix.lower() == ".mat":
            load_mat_v5(path)
        else:
            read_table(path)
    except (UnsupportedFormatError, CorruptFileError, DataError) as exc:
        return str(exc)
    return None
