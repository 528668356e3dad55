"""Per-sample normalization, augmentation and the composed input pipeline.

Pipeline order is fixed: transform -> augment (train phase only) ->
normalize. Normalization statistics come from the single sample, never from
the dataset.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import transforms as T
from .errors import ConfigurationError

NORMALIZATIONS = ("maxmin", "pm1", "zscore", "none")
OPS_1D = ("add_gaussian", "scale", "stretch", "crop")
OPS_2D = ("scale", "crop")

NOISE_STD = 0.1  # N(0, 0.01) read as variance 0.01
SCALE_STD = 0.1
STRETCH_RANGE = (0.8, 1.2)
CROP_1D = 10
CROP_2D = 20


def normalize(x, method, axis=None):
    """Normalize one sample (or each sample along the non-``axis`` dims).

    ``axis`` names the axes that make up one sample; ``None`` means the whole
    array is a single sample. Constant samples map to zeros.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ConfigurationError("cannot normalize an empty sample")
    if method == "none":
        return x.copy()
    if method in ("maxmin", "pm1"):
        lo = x.min(axis=axis, keepdims=True)
        span = x.max(axis=axis, keepdims=True) - lo
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (x - lo) / safe, 0.0)
        if method == "pm1":
            out = np.where(span > 0, 2.0 * out - 1.0, 0.0)
        return out
    if method == "zscore":
        mean = x.mean(axis=axis, keepdims=True)
        std = x.std(axis=axis, keepdims=True)
        safe = np.where(std > 0, std, 1.0)
        return np.where(std > 0, (x - mean) / safe, 0.0)
    raise ConfigurationError(f"unknown normalization {method!r}; choose from {NORMALIZATIONS}")


def augment_1d(x, op, rng):
    """Return an augmented copy of a 1-D sample (same length)."""
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    n = x.shape[-1]
    if op == "add_gaussian":
        return x + rng.normal(0.0, NOISE_STD, size=x.shape)
    if op == "scale":
        return x * rng.normal(1.0, SCALE_STD)
    if op == "stretch":
        factor = rng.uniform(*STRETCH_RANGE)
        m = max(2, int(round(n * factor)))
        resampled = np.interp(np.linspace(0, n - 1, m), np.arange(n), x)
        out = np.zeros(n)
        out[: min(n, m)] = resampled[:n]
        return out
    if op == "crop":
        if n < CROP_1D:
            raise ConfigurationError(f"crop needs at least {CROP_1D} samples, got {n}")
        start = rng.integers(0, n - CROP_1D + 1)
        out = x.copy()
        out[start : start + CROP_1D] = 0.0
        return out
    raise ConfigurationError(f"unknown 1-D augmentation {op!r}; choose from {OPS_1D}")


def augment_2d(img, op, rng):
    """Return an augmented copy of an image (same shape)."""
    img = np.asarray(getattr(img, "pixels", img), dtype=np.float64)
    if op == "scale":
        return img * rng.normal(1.0, SCALE_STD)
    if op == "crop":
        if img.size < CROP_2D:
            raise ConfigurationError(f"crop needs at least {CROP_2D} pixels, got {img.size}")
        flat = img.ravel().copy()
        start = rng.integers(0, flat.size - CROP_2D + 1)
        flat[start : start + CROP_2D] = 0.0
        return flat.reshape(img.shape)
    raise ConfigurationError(f"unknown 2-D augmentation {op!r}; choose from {OPS_2D}")


@dataclass(frozen=True)
class Augmentation:
    op: str
    probability: float = 0.5
    train_only: bool = True


@dataclass(frozen=True)
class PipelineSpec:
    input_type: str = "time"
    normalization: str = "zscore"
    augmentations: tuple = ()
    image_size: tuple | None = None
    fft_mode: str = "magnitude"

    def __post_init__(self):
        if self.input_type not in T.INPUT_TYPES:
            raise ConfigurationError(f"unknown input type {self.input_type!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigurationError(f"unknown normalization {self.normalization!r}")
        augs = tuple(a if isinstance(a, Augmentation) else Augmentation(*a)
                     for a in self.augmentations)
        object.__setattr__(self, "augmentations", augs)
        if self.image_size is not None:
            object.__setattr__(self, "image_size", tuple(int(v) for v in self.image_size))
        valid = OPS_2D if self.is_image else OPS_1D
        for a in augs:
            if a.op not in valid:
                raise ConfigurationError(
                    f"augmentation {a.op!r} not valid for {self.input_type} input"
                )
            if not 0.0 <= a.probability <= 1.0:
                raise ConfigurationError(f"probability {a.probability} outside [0, 1]")

    @property
    def is_image(self):
        return self.input_type in T.IMAGE_INPUTS

    def with_default_augmentations(self, probability=0.5):
        ops = OPS_2D if self.is_image else OPS_1D
        return PipelineSpec(self.input_type, self.normalization,
                            tuple(Augmentation(op, probability) for op in ops),
                            self.image_size, self.fft_mode)

    def to_dict(self):
        d = asdict(self)
        d["augmentations"] = [asdict(a) for a in self.augmentations]
        d["image_size"] = list(self.image_size) if self.image_size else None
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["augmentations"] = tuple(Augmentation(**a) for a in d.get("augmentations", ()))
        if d.get("image_size"):
            d["image_size"] = tuple(d["image_size"])
        return cls(**d)


def transform_batch(windows, spec, resize=True):
    """Apply the deterministic transform stage to ``[n, 1024]`` windows.

    With ``resize=False`` images keep their native size; :class:`PreparedData`
    uses that to resize lazily per batch.
    """
    size = spec.image_size if resize else None
    return T.transform(windows, spec.input_type, size, spec.fft_mode)


def resize_to_spec(features, spec):
    if spec.is_image and spec.image_size and tuple(features.shape[-2:]) != spec.image_size:
        return T.resize_image(features, *spec.image_size)
    return features


def augment_normalize(features, spec, phase, rng):
    """Augment (if training) then normalize a single transformed sample."""
    out = np.asarray(features, dtype=np.float64)
    augment = augment_2d if spec.is_image else augment_1d
    for aug in spec.augmentations:
        if phase != "train" and aug.train_only:
            continue
        if rng.random() < aug.probability:
            out = augment(out, aug.op, rng)
    return normalize(out, spec.normalization)


def finish_batch(features, spec, phase, rng=None):
    """Augment + normalize every sample of a transformed batch."""
    features = np.asarray(features, dtype=np.float64)
    active = [a for a in spec.augmentations if phase == "train" or not a.train_only]
    if not active:
        axes = tuple(range(1, features.ndim))
        return normalize(features, spec.normalization, axis=axes)
    return np.stack([augment_normalize(f, spec, phase, rng) for f in features])


def apply_pipeline(sample, spec, phase="eval", rng=None):
    """Turn one raw window into a model-ready array (no channel axis)."""
    if phase not in ("train", "eval"):
        raise ConfigurationError(f"phase must be 'train' or 'eval', got {phase!r}")
    if phase == "train" and spec.augmentations and rng is None:
        raise ConfigurationError("train-phase augmentation needs an rng")
    features = transform_batch(np.asarray(getattr(sample, "values", sample)), spec)
    return augment_normalize(features, spec, phase, rng)


@dataclass
class PreparedData:
    """Transformed features plus labels, ready for batching.

    Image features may be stored at native size; they are resized to
    ``spec.image_size`` batch by batch, before augmentation.
    """

    features: np.ndarray
    labels: np.ndarray
    spec: PipelineSpec = field(default_factory=PipelineSpec)

    def __len__(self):
        return len(self.labels)

    @classmethod
    def from_windows(cls, windows, labels, spec):
        feats = transform_batch(np.asarray(windows, dtype=np.float64), spec, resize=False)
        return cls(feats, np.asarray(labels, dtype=np.int64), spec)

    def subset(self, idx):
        return PreparedData(self.features[idx], self.labels[idx], self.spec)

    def batch(self, idx, phase, rng=None):
        feats = resize_to_spec(self.features[idx], self.spec)
        x = finish_batch(feats, self.spec, phase, rng)
        return x[:, None, ...], self.labels[idx]

    @property
    def sample_shape(self):
        spatial = self.features.shape[1:]
        if self.spec.is_image and self.spec.image_size:
            spatial = self.spec.image_size
        return (1,) + tuple(spatial)
