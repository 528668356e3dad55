"""Corpus ingestion: MAT/CSV parsing, manifest registries, synthetic signals."""

from .loaders import data_root, load_dataset, missing_files, read_table, verify_dataset
from .matfile import load_mat_v5
from .records import SignalRecord, WindowedDataset, window_records
from .registry import DATA_ROOT_ENV, DatasetRegistry, available_datasets, get_registry
from .synthetic import SYNTHETIC_ID, SynthSpec, burst_train, generate_synthetic

__all__ = [
    "DATA_ROOT_ENV", "DatasetRegistry", "SYNTHETIC_ID", "SignalRecord", "SynthSpec",
    "WindowedDataset", "available_datasets", "burst_train", "data_root",
    "generate_synthetic", "get_registry", "load_dataset", "load_mat_v5",
    "missing_files", "read_table", "verify_dataset", "window_records",
]
