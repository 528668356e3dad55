"""Experiment configuration: an INI-style file with five sections.

Grammar (``configparser`` syntax; lists are comma separated)::

    [experiment]
    name = my-run              ; used in report headings
    preset = smoke             ; optional named study or setup
    repeats = 5
    seed = 0                   ; repeat seeds are seed, seed+1, ...
    output_dir = runs/my-run
    workers = 1                ; processes per cell for the repeats
    plot = false               ; write trace.png per cell

    [dataset]
    id = CWRU                  ; a registry id or "synthetic"
    root =                     ; data root (else $FAULTBENCH_DATA_ROOT)
    condition = setting=N15_M07_F10   ; optional key=value filter
    labels =                   ; optional class subset
    ; synthetic only:
    class_count = 5
    noise_std = 0.3
    drift_slope = 0
    record_length = 122880
    records_per_class = 1
    decay = 800
    sampling_rate_hz = 12000
    impulse_hz =               ; optional per-class lists
    resonance_hz =

    [pipeline]
    input_types = fft
    normalizations = zscore
    augment = false
    augment_probability = 0.5
    fft_mode = magnitude
    image_size =               ; e.g. 64x64; default depends on model family

    [model]
    archs = mlp
    epochs = 100
    batch_size = 64
    lr = 0.001
    ; any other key is a model hyperparameter override, e.g. mlp_widths = 256, 128

    [split]
    strategy = random
    train_fraction = 0.8
    fold_count = 4
    fold =

The matrix of cells is ``input_types x normalizations x archs``.
"""

from __future__ import annotations

import ast
import configparser
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..datasets.synthetic import SYNTHETIC_ID, SynthSpec
from ..errors import ConfigurationError
from ..evaluation.splits import SplitPlan
from ..evaluation.training import TrainConfig
from ..models import ARCHS
from ..models.defaults import MODEL_DEFAULTS
from ..preprocessing import NORMALIZATIONS
from ..transforms import INPUT_TYPES

SECTIONS = ("experiment", "dataset", "pipeline", "model", "split")


@dataclass(frozen=True)
class DatasetSource:
    dataset_id: str = SYNTHETIC_ID
    root: str | None = None
    condition: dict | None = None
    labels: tuple | None = None
    synth: SynthSpec | None = None

    @property
    def is_synthetic(self):
        return self.dataset_id == SYNTHETIC_ID


@dataclass(frozen=True)
class Sampling:
    """Per-class window budgets applied after the split (presets set these)."""

    train_counts: tuple | None = None
    test_counts: tuple | None = None
    order: str = "random"              # random | earliest
    train_condition: dict | None = None
    test_condition: dict | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    dataset: DatasetSource = field(default_factory=DatasetSource)
    input_types: tuple = ("fft",)
    normalizations: tuple = ("zscore",)
    augment: bool = False
    augment_probability: float = 0.5
    fft_mode: str = "magnitude"
    image_size: tuple | None = None
    archs: tuple = ("mlp",)
    overrides: dict = field(default_factory=dict)
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitPlan = field(default_factory=SplitPlan)
    sampling: Sampling = field(default_factory=Sampling)
    repeats: int = 5
    seed: int = 0
    workers: int = 1
    output_dir: str = "runs"
    preset: str | None = None
    variant: str = ""
    plot: bool = False
    explicit: frozenset = frozenset()  # fields set by the user; presets leave them alone

    def __post_init__(self):
        for t in self.input_types:
            if t not in INPUT_TYPES:
                raise ConfigurationError(f"unknown input type {t!r}; choose from {INPUT_TYPES}")
        for n in self.normalizations:
            if n not in NORMALIZATIONS:
                raise ConfigurationError(f"unknown normalization {n!r}; choose from {NORMALIZATIONS}")
        for a in self.archs:
            if a not in ARCHS:
                raise ConfigurationError(f"unknown model {a!r}; choose from {ARCHS}")
        for key in self.overrides:
            if key not in MODEL_DEFAULTS:
                raise ConfigurationError(f"unknown model hyperparameter {key!r}")
        if not (self.input_types and self.normalizations and self.archs):
            raise ConfigurationError("input_types, normalizations and archs must be non-empty")
        if self.repeats < 1 or self.workers < 1:
            raise ConfigurationError("repeats and workers must be positive")

    def with_(self, **kwargs):
        return replace(self, **kwargs)

    def to_dict(self):
        d = asdict(self)
        d.pop("explicit")
        d["train"] = asdict(self.train)
        d["split"] = asdict(self.split)
        if self.dataset.synth is not None:
            d["dataset"]["synth"] = self.dataset.synth.to_dict()
        return _jsonable(d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _list(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"expected a boolean, got {value!r}")


def _literal(value):
    """Parse ``1``, ``0.5``, ``a``, ``1, 2`` into Python values (lists become tuples)."""
    text = value.strip()
    if "," in text and not text.startswith(("(", "[")):
        return tuple(_literal(v) for v in text.split(",") if v.strip())
    try:
        out = ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text
    return tuple(out) if isinstance(out, list) else out


def _condition(value):
    if not value.strip():
        return None
    out = {}
    for pair in value.split(","):
        k, sep, v = pair.partition("=")
        if not sep:
            raise ConfigurationError(f"condition entries look like key=value, got {pair!r}")
        out[k.strip()] = v.strip()
    return out


def _size(value):
    if not value.strip():
        return None
    parts = value.lower().replace("x", ",").split(",")
    try:
        h, w = (int(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"image_size looks like 64x64, got {value!r}") from None
    return (h, w)


def _get(section, key, cast, default):
    if key not in section or not section[key].strip():
        return default
    try:
        return cast(section[key])
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section.name}] {key}: {exc}") from None


def parse_config(text, base_dir="."):
    """Parse config text into an :class:`ExperimentConfig` (presets not applied)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config syntax: {exc}") from None
    unknown = [s for s in cp.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigurationError(f"unknown config section(s) {unknown}; expected {SECTIONS}")
    for s in SECTIONS:
        if not cp.has_section(s):
            cp.add_section(s)
    ex, ds, pl, md, sp = (cp[s] for s in SECTIONS)

    dataset_id = _get(ds, "id", str.strip, SYNTHETIC_ID)
    synth = None
    if dataset_id == SYNTHETIC_ID:
        kwargs = {}
        for key, cast in (("noise_std", float), ("drift_slope", float), ("record_length", int),
                          ("records_per_class", int), ("decay", float),
                          ("sampling_rate_hz", float), ("impulse_hz", _literal),
                          ("resonance_hz", _literal)):
            value = _get(ds, key, cast, None)
            if value is not None:
                kwargs[key] = value
        kwargs["seed"] = _get(ds, "seed", int, 0)
        synth = SynthSpec.default(_get(ds, "class_count", int, 5), **kwargs)
    root = _get(ds, "root", str.strip, None)
    if root and not Path(root).is_absolute():
        root = str(Path(base_dir) / root)
    source = DatasetSource(dataset_id, root, _get(ds, "condition", _condition, None),
                           _get(ds, "labels", _list, None), synth)

    reserved = {"archs", "epochs", "batch_size", "lr"}
    overrides = {k: _literal(v) for k, v in md.items() if k not in reserved}
    train = TrainConfig(_get(md, "epochs", int, 100), _get(md, "batch_size", int, 64),
                        _get(md, "lr", float, 1e-3))
    split = SplitPlan(_get(sp, "strategy", str.strip, "random"),
                      _get(sp, "train_fraction", float, 0.8),
                      _get(sp, "fold_count", int, 4), _get(sp, "fold", int, None))
    explicit = set()
    for sec, keys in ((pl, ("input_types", "normalizations", "augment", "image_size")),
                      (md, ("archs",)), (ex, ("repeats",))):
        explicit.update(k for k in keys if sec.get(k, "").strip())
    if any(sp.get(k, "").strip() for k in ("strategy", "train_fraction", "fold_count", "fold")):
        explicit.add("split")
    if any(md.get(k, "").strip() for k in ("epochs", "batch_size", "lr")):
        explicit.add("train")
    if ds.get("id", "").strip():
        explicit.add("dataset")
    out_dir = _get(ex, "output_dir", str.strip, "runs")
    if not Path(out_dir).is_absolute():
        out_dir = str(Path(base_dir) / out_dir)
    return ExperimentConfig(
        name=_get(ex, "name", str.strip, "experiment"),
        dataset=source,
        input_types=_get(pl, "input_types", _list, ("fft",)),
        normalizations=_get(pl, "normalizations", _list, ("zscore",)),
        augment=_get(pl, "augment", _bool, False),
        augment_probability=_get(pl, "augment_probability", float, 0.5),
        fft_mode=_get(pl, "fft_mode", str.strip, "magnitude"),
        image_size=_get(pl, "image_size", _size, None),
        archs=_get(md, "archs", _list, ("mlp",)),
        overrides=overrides,
        train=train,
        split=split,
        repeats=_get(ex, "repeats", int, 5),
        seed=_get(ex, "seed", int, 0),
        workers=_get(ex, "workers", int, 1),
        output_dir=out_dir,
        preset=_get(ex, "preset", str.strip, None),
        plot=_get(ex, "plot", _bool, False),
        explicit=frozenset(explicit),
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)
