"""Synthetic bearing-like vibration records.

Each class is a train of decaying resonance bursts (an impact excites a
structural mode that rings down) at a class-specific repetition rate and
resonance frequency, plus an optional linear trend and white noise::

    x(t) = sum_k exp(-d (t - t_k)) sin(2 pi f_res (t - t_k)) [t >= t_k]
           + drift * n + noise

where ``n`` is the sample index and ``t_k = t_0 + k / f_imp``. The phase
``t_0`` is drawn per record.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError
from .records import SignalRecord

SYNTHETIC_ID = "synthetic"
# ignore a burst's tail once its envelope falls below this
_TAIL = 1e-12


@dataclass(frozen=True)
class SynthSpec:
    class_count: int
    impulse_hz: tuple
    resonance_hz: tuple
    decay: float = 800.0
    noise_std: float = 0.0
    drift_slope: float = 0.0
    record_length: int = 122_880
    sampling_rate_hz: float = 12_000.0
    seed: int = 0
    records_per_class: int = 1
    random_phase: bool = True

    def __post_init__(self):
        object.__setattr__(self, "impulse_hz", tuple(float(f) for f in self.impulse_hz))
        object.__setattr__(self, "resonance_hz", tuple(float(f) for f in self.resonance_hz))
        if self.class_count < 1:
            raise ConfigurationError("class_count must be positive")
        if len(self.impulse_hz) != self.class_count or len(self.resonance_hz) != self.class_count:
            raise ConfigurationError("need one impulse and one resonance frequency per class")
        pairs = list(zip(self.impulse_hz, self.resonance_hz))
        if len(set(pairs)) != len(pairs):
            raise ConfigurationError("classes must have distinct (impulse, resonance) pairs")
        if min(self.impulse_hz) <= 0 or min(self.resonance_hz) <= 0:
            raise ConfigurationError("frequencies must be positive")
        if max(self.resonance_hz) >= self.sampling_rate_hz / 2:
            raise ConfigurationError("resonance frequencies must lie below Nyquist")
        if self.decay <= 0 or self.noise_std < 0:
            raise ConfigurationError("decay must be positive and noise_std non-negative")
        if self.record_length < 1 or self.records_per_class < 1:
            raise ConfigurationError("record_length and records_per_class must be positive")

    @classmethod
    def default(cls, class_count=5, **kwargs):
        """Evenly spaced impulse rates (30 Hz + 7 Hz steps) and resonances
        (800 Hz + 350 Hz steps)."""
        k = np.arange(class_count)
        impulse = kwargs.pop("impulse_hz", tuple(30.0 + 7.0 * k))
        resonance = kwargs.pop("resonance_hz", tuple(800.0 + 350.0 * k))
        return cls(class_count, impulse, resonance, **kwargs)

    def to_dict(self):
        d = asdict(self)
        d["impulse_hz"] = list(self.impulse_hz)
        d["resonance_hz"] = list(self.resonance_hz)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def burst_train(n_samples, fs, impulse_hz, resonance_hz, decay, t0=0.0, n_impulses=None):
    """Noise-free sum of decaying bursts starting at ``t0 + k / impulse_hz``."""
    duration = n_samples / fs
    period = 1.0 / impulse_hz
    count = int(np.floor((duration - t0) / period)) + 1 if t0 < duration else 0
    if n_impulses is not None:
        count = min(count, n_impulses)
    out = np.zeros(n_samples)
    if count <= 0:
        return out
    support = int(np.ceil(fs * -np.log(_TAIL) / decay)) + 1
    t_k = t0 + period * np.arange(count)
    first = np.ceil(t_k * fs - 1e-9).astype(np.int64)     # first sample with t >= t_k
    idx = first[:, None] + np.arange(support)[None, :]
    tau = idx / fs - t_k[:, None]
    burst = np.exp(-decay * tau) * np.sin(2 * np.pi * resonance_hz * tau)
    keep = idx < n_samples
    np.add.at(out, idx[keep], burst[keep])
    return out


def generate_synthetic(spec):
    """Emit ``records_per_class`` records per class, deterministic in ``spec.seed``."""
    streams = np.random.SeedSequence(spec.seed).spawn(spec.class_count * spec.records_per_class)
    n = np.arange(spec.record_length, dtype=np.float64)
    records = []
    for c in range(spec.class_count):
        f_imp, f_res = spec.impulse_hz[c], spec.resonance_hz[c]
        for r in range(spec.records_per_class):
            rng = np.random.default_rng(streams[c * spec.records_per_class + r])
            t0 = rng.uniform(0.0, 1.0 / f_imp) if spec.random_phase else 0.0
            x = burst_train(spec.record_length, spec.sampling_rate_hz, f_imp, f_res,
                            spec.decay, t0)
            if spec.drift_slope:
                x = x + spec.drift_slope * n
            if spec.noise_std:
                x = x + rng.normal(0.0, spec.noise_std, spec.record_length)
            records.append(SignalRecord(
                samples=x,
                sampling_rate_hz=spec.sampling_rate_hz,
                dataset_id=SYNTHETIC_ID,
                file_path=f"synthetic/class{c:02d}_rec{r:02d}",
                channel_name="synthetic",
                condition={"impulse_hz": f_imp, "resonance_hz": f_res, "t0": t0},
                class_id=c,
            ))
    return records


def class_names(spec):
    return tuple(f"class{c:02d}" for c in range(spec.class_count))
