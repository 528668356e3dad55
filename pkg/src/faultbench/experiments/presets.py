"""Named experiment presets.

Each preset turns a base :class:`ExperimentConfig` into one or more
variants. Presets never touch fields the user set explicitly in the config
file, and building a preset twice gives equal configs.
"""

from __future__ import annotations

from dataclasses import replace

from ..datasets.synthetic import SynthSpec
from ..errors import ConfigurationError, PresetError
from ..evaluation.splits import SplitPlan
from ..evaluation.training import TrainConfig
from ..preprocessing import NORMALIZATIONS
from ..transforms import INPUT_TYPES
from .config import DatasetSource, ExperimentConfig, Sampling

PU_REAL_CODES = ("KA04", "KA15", "KA16", "KA22", "KA30", "KB23", "KB24", "KB27",
                 "KI14", "KI16", "KI17", "KI18", "KI21")

IMBALANCE_TRAIN = {
    1: (125,) * 13,
    2: (125, 75, 75, 75, 37, 37, 37, 25, 25, 25, 12, 12, 12),
    3: (125, 50, 50, 50, 25, 25, 25, 6, 6, 6, 2, 2, 2),
}
IMBALANCE_TEST = 125

GENERALIZATION = {
    1: ("N15_M07_F10", "N09_M07_F10"),
    2: ("N15_M07_F10", "N15_M01_F10"),
    3: ("N09_M07_F10", "N15_M07_F10"),
    4: ("N09_M07_F10", "N15_M01_F10"),
    5: ("N15_M01_F10", "N15_M07_F10"),
    6: ("N15_M01_F10", "N09_M07_F10"),
}

INTERPRETABILITY = {1: ("KA03", "KA06"), 2: ("KA08", "KA09"), 3: ("KI07", "KI08")}
INTERPRETABILITY_TRAIN = 200
INTERPRETABILITY_TEST = 50

FEWSHOT_SHOTS = (100, 50, 20, 10, 5, 1)

ALL_MODELS = ("mlp", "ae", "dae", "sae", "cnn5", "lenet", "alexnet", "resnet18", "bilstm")
STUDY_NORMALIZATIONS = tuple(n for n in NORMALIZATIONS if n != "none")


def _group(table, group, what):
    if group not in table:
        raise PresetError(f"{what} group must be one of {sorted(table)}, got {group!r}")
    return table[group]


def preset_imbalance(group):
    """``{bearing code: (train windows, test windows)}`` for one group."""
    counts = _group(IMBALANCE_TRAIN, group, "imbalance")
    return {code: (n, IMBALANCE_TEST) for code, n in zip(PU_REAL_CODES, counts)}


def preset_generalization(group):
    """``(training condition, testing condition)``."""
    return _group(GENERALIZATION, group, "generalization")


def preset_interpretability(group):
    """``(classes, train windows per class, test windows per class)``."""
    return _group(INTERPRETABILITY, group, "interpretability"), INTERPRETABILITY_TRAIN, \
        INTERPRETABILITY_TEST


def preset_fewshot(base, shots=FEWSHOT_SHOTS):
    """One config per shot count; the test set is shared across the series."""
    classes = _class_count(base)
    out = []
    for n in shots:
        if n < 1:
            raise PresetError(f"shot counts must be positive, got {n}")
        out.append(replace(base, variant=f"shots{n:03d}",
                           sampling=Sampling(train_counts=(n,) * classes, order="earliest")))
    return out


def _class_count(cfg):
    src = cfg.dataset
    if src.labels:
        return len(src.labels)
    if src.is_synthetic:
        if src.synth is None:
            raise ConfigurationError("synthetic dataset selected without a synthetic spec")
        return src.synth.class_count
    from ..datasets.registry import get_registry

    return get_registry(src.dataset_id).class_count


def _default(cfg, **fields):
    """Set fields the user did not set explicitly."""
    return replace(cfg, **{k: v for k, v in fields.items() if k not in cfg.explicit})


def _smoke(base):
    fields = dict(input_types=("fft",), normalizations=("zscore",), archs=("mlp",),
                  train=TrainConfig(epochs=2), repeats=2)
    if base.dataset.is_synthetic:
        fields["dataset"] = DatasetSource(synth=SynthSpec.default(3, noise_std=0.1,
                                                                  record_length=1024 * 40))
    return [_default(base, **fields)]


def _setup(number):
    def build(base):
        cfg = _default(base, input_types=INPUT_TYPES, normalizations=STUDY_NORMALIZATIONS,
                       archs=ALL_MODELS)
        if number == 1:
            return [_default(cfg, augment=False, split=SplitPlan("random", seed=base.seed))]
        if number == 2:
            return [_default(cfg, augment=True, split=SplitPlan("random", seed=base.seed))]
        return [_default(cfg, augment=True, split=SplitPlan("order", seed=base.seed))]
    return build


def _imbalance(base):
    cfg = _default(base, archs=("resnet18",), normalizations=("zscore",),
                   input_types=("time", "fft"), augment=True,
                   split=SplitPlan("random", seed=base.seed),
                   dataset=DatasetSource("PU"))
    classes = _class_count(cfg)
    if classes != 13:
        raise PresetError(f"imbalance preset needs 13 classes, dataset has {classes}")
    return [replace(cfg, variant=f"group{g}",
                    sampling=Sampling(IMBALANCE_TRAIN[g], (IMBALANCE_TEST,) * 13))
            for g in sorted(IMBALANCE_TRAIN)]


def _generalization(base):
    cfg = _default(base, dataset=DatasetSource("PU"), input_types=("time", "fft"))
    if cfg.dataset.is_synthetic:
        raise PresetError("generalization preset needs working-condition metadata; "
                          "the synthetic dataset has none")
    return [replace(cfg, variant=f"group{g}",
                    sampling=Sampling(train_condition={"setting": a},
                                      test_condition={"setting": b}))
            for g, (a, b) in sorted(GENERALIZATION.items())]


def _interpretability(base):
    cfg = _default(base, dataset=DatasetSource("PU_ARTIFICIAL"), input_types=("time", "fft"))
    out = []
    for g, (a, b) in sorted(INTERPRETABILITY.items()):
        labels = (a, b)
        if cfg.dataset.is_synthetic:
            labels = ("class00", "class01")
        src = replace(cfg.dataset, labels=labels)
        out.append(replace(cfg, variant=f"group{g}", dataset=src,
                           sampling=Sampling((INTERPRETABILITY_TRAIN,) * 2,
                                             (INTERPRETABILITY_TEST,) * 2)))
    return out


def _fewshot(base):
    cfg = _default(base, input_types=("time", "fft"))
    return preset_fewshot(cfg)


PRESETS = {
    "smoke": ("tiny synthetic run (2 epochs, 2 repeats) to check the install", _smoke),
    "setup1": ("all inputs x normalizations x models, random split, no augmentation",
               _setup(1)),
    "setup2": ("as setup1 with data augmentation", _setup(2)),
    "setup3": ("as setup2 with order split", _setup(3)),
    "imbalance": ("PU real damage, shrinking training counts in groups 1-3, test 125 per "
                  "class", _imbalance),
    "generalization": ("PU, train on one working condition, test on another (6 pairs)",
                       _generalization),
    "interpretability": ("PU artificial damage, same-fault binary pairs, 200 train / 50 test",
                         _interpretability),
    "fewshot": ("training windows per class 100, 50, 20, 10, 5, 1 (earliest first)",
                _fewshot),
}


def expand_preset(base):
    """Return the list of config variants for ``base.preset`` (or ``[base]``)."""
    if not base.preset:
        return [base]
    if base.preset not in PRESETS:
        raise PresetError(f"unknown preset {base.preset!r}; known: {', '.join(PRESETS)}")
    return PRESETS[base.preset][1](base)


def list_presets():
    return [(name, desc) for name, (desc, _) in PRESETS.items()]


__all__ = [
    "ExperimentConfig", "FEWSHOT_SHOTS", "GENERALIZATION", "IMBALANCE_TEST",
    "IMBALANCE_TRAIN", "INTERPRETABILITY", "PRESETS", "PU_REAL_CODES", "expand_preset",
    "list_presets", "preset_fewshot", "preset_generalization", "preset_imbalance",
    "preset_interpretability",
]
