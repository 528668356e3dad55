"""Config-driven experiment matrices, named presets and the CLI."""

from .cli import main, run_cli
from .config import DatasetSource, ExperimentConfig, Sampling, load_config, parse_config
from .presets import (
    FEWSHOT_SHOTS,
    PRESETS,
    expand_preset,
    list_presets,
    preset_fewshot,
    preset_generalization,
    preset_imbalance,
    preset_interpretability,
)
from .runner import build_split, report_table, run_experiment, run_variant

__all__ = [
    "DatasetSource", "ExperimentConfig", "FEWSHOT_SHOTS", "PRESETS", "Sampling",
    "build_split", "expand_preset", "list_presets", "load_config", "main",
    "parse_config", "preset_fewshot", "preset_generalization", "preset_imbalance",
    "preset_interpretability", "report_table", "run_cli", "run_experiment", "run_variant",
]
