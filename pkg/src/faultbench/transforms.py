"""Windowing and the five model-input constructors.

Every transform here is a pure function of its input array.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, EmptyDatasetError

WINDOW_LENGTH = 1024
STFT_WINDOW = 64
STFT_HOP = 32
CWT_LENGTH = 100
CWT_SCALES = 100
MORLET_W0 = 6.0
SLICE_SIDE = 32

INPUT_TYPES = ("time", "fft", "stft", "cwt", "slice")
IMAGE_INPUTS = ("stft", "cwt", "slice")

# image sizes by model family (AE vs CNN); others keep the native size
AE_IMAGE_SIZE = (32, 32)
CNN_IMAGE_SIZES = {"cwt": (300, 300), "stft": (330, 330), "slice": (320, 320)}


@dataclass(frozen=True)
class Window1D:
    values: np.ndarray
    source_offset: int
    label: int


@dataclass(frozen=True)
class ImageSample:
    pixels: np.ndarray
    label: int

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


def window_slice(record, length=WINDOW_LENGTH):
    """Cut a record into ``floor(L / length)`` non-overlapping windows.

    ``record`` is a :class:`~faultbench.datasets.SignalRecord` or a bare
    array. The trailing remainder is discarded.
    """
    samples = np.asarray(getattr(record, "samples", record), dtype=np.float64)
    label = getattr(record, "class_id", -1)
    n = len(samples) // length
    if n == 0:
        name = getattr(record, "file_path", None) or "<array>"
        raise EmptyDatasetError(
            f"record {name} has {len(samples)} samples, shorter than one window of {length}"
        )
    return [
        Window1D(samples[i * length : (i + 1) * length].copy(), i * length, label)
        for i in range(n)
    ]


def _values(x):
    return np.asarray(getattr(x, "values", x), dtype=np.float64)


def fft_halfspectrum(x, mode="magnitude"):
    """First half of the DFT; ``mode`` is ``magnitude`` (default) or ``real``."""
    x = _values(x)
    n = x.shape[-1]
    if n % 2:
        raise ConfigurationError(f"fft_halfspectrum needs an even length, got {n}")
    spec = np.fft.fft(x, axis=-1)[..., : n // 2]
    if mode == "magnitude":
        return np.abs(spec)
    if mode == "real":
        return spec.real.copy()
    raise ConfigurationError(f"unknown spectrum mode {mode!r}")


@lru_cache(maxsize=None)
def _hann(n):
    # periodic Hann, as used for spectral analysis
    return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)


def stft_image(x):
    """33x33 STFT magnitude: Hann window 64, hop 32, centred reflect padding.

    Rows are the 33 one-sided frequency bins, columns the 33 frames.
    """
    x = _values(x)
    if x.shape[-1] != WINDOW_LENGTH:
        raise ConfigurationError(f"stft_image needs {WINDOW_LENGTH} samples, got {x.shape[-1]}")
    pad = STFT_WINDOW // 2
    pad_width = [(0, 0)] * (x.ndim - 1) + [(pad, pad)]
    padded = np.pad(x, pad_width, mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, STFT_WINDOW, axis=-1)[
        ..., ::STFT_HOP, :
    ]
    spec = np.abs(np.fft.rfft(frames * _hann(STFT_WINDOW), axis=-1))
    return np.swapaxes(spec, -1, -2).copy()


@lru_cache(maxsize=None)
def _cwt_kernel(length, scales, w0):
    """Conjugated Morlet atoms, shape [scale, shift, sample]."""
    n = np.arange(length)
    t = (n[None, None, :] - n[None, :, None]) / np.arange(1, scales + 1)[:, None, None]
    atoms = np.pi**-0.25 * np.exp(1j * w0 * t) * np.exp(-0.5 * t * t)
    kernel = np.conj(atoms) / np.sqrt(np.arange(1, scales + 1))[:, None, None]
    kernel.setflags(write=False)
    return kernel


def morlet(t, w0=MORLET_W0):
    return np.pi**-0.25 * np.exp(1j * w0 * t) * np.exp(-0.5 * t * t)


def cwt_image(x):
    """100x100 Morlet CWT magnitude over scales 1..100 of a 100-sample input.

    ``|W(a, b)| = |sum_n x[n] conj(psi((n - b) / a))| / sqrt(a)`` with rows
    indexed by scale and columns by shift ``b``.
    """
    x = _values(x)
    if x.shape[-1] != CWT_LENGTH:
        raise ConfigurationError(f"cwt_image needs {CWT_LENGTH} samples, got {x.shape[-1]}")
    kernel = _cwt_kernel(CWT_LENGTH, CWT_SCALES, MORLET_W0)
    return np.abs(np.einsum("sbn,...n->...sb", kernel, x))


def cwt_input(x):
    """Keep the first 100 samples of a window for the CWT path."""
    return _values(x)[..., :CWT_LENGTH]


def slice_image(x):
    """Row-major reshape of 1024 samples into 32x32."""
    x = _values(x)
    if x.shape[-1] != SLICE_SIDE * SLICE_SIDE:
        raise ConfigurationError(f"slice_image needs {SLICE_SIDE**2} samples, got {x.shape[-1]}")
    return x.reshape(x.shape[:-1] + (SLICE_SIDE, SLICE_SIDE)).copy()


def _interp_matrix(n_src, n_dst):
    """Linear interpolation weights with corners aligned."""
    m = np.zeros((n_dst, n_src))
    if n_src == 1 or n_dst == 1:
        m[:, 0] = 1.0
        return m
    pos = np.arange(n_dst) * (n_src - 1) / (n_dst - 1)
    lo = np.minimum(np.floor(pos).astype(int), n_src - 2)
    frac = pos - lo
    m[np.arange(n_dst), lo] = 1 - frac
    m[np.arange(n_dst), lo + 1] += frac
    return m


def resize_image(img, target_h, target_w):
    """Bilinear, corner-aligned resize of the last two axes."""
    img = np.asarray(getattr(img, "pixels", img), dtype=np.float64)
    if target_h < 1 or target_w < 1:
        raise ConfigurationError("resize targets must be positive")
    h, w = img.shape[-2:]
    if (h, w) == (target_h, target_w):
        return img.copy()
    rows = _interp_matrix(h, target_h)
    cols = _interp_matrix(w, target_w)
    return np.einsum("ih,...hw,jw->...ij", rows, img, cols)


def transform(x, input_type, image_size=None, fft_mode="magnitude"):
    """Map windows (``[..., 1024]``) to the requested model input.

    ``image_size`` resizes 2-D outputs; ``None`` keeps the native size.
    """
    if input_type == "time":
        return _values(x).copy()
    if input_type == "fft":
        return fft_halfspectrum(x, fft_mode)
    if input_type == "stft":
        out = stft_image(x)
    elif input_type == "cwt":
        out = cwt_image(cwt_input(x))
    elif input_type == "slice":
        out = slice_image(x)
    else:
        raise ConfigurationError(f"unknown input type {input_type!r}; choose from {INPUT_TYPES}")
    if image_size is not None:
        out = resize_image(out, *image_size)
    return out


def image_size_for(input_type, family):
    """Image size rule: 32x32 for auto-encoders, per-transform sizes for CNNs."""
    if input_type not in IMAGE_INPUTS:
        return None
    if family == "ae":
        return AE_IMAGE_SIZE
    if family == "cnn":
        return CNN_IMAGE_SIZES[input_type]
    return None
