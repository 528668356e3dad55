"""Auto-encoder family (plain, denoising, sparse) with a classifier head.

Training runs in two phases: encoder+decoder on reconstruction, then
encoder+classifier on cross-entropy. The three variants share the network
and differ only in the phase-one input and loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autograd import functional as F
from ..autograd.tensor import Tensor
from ..errors import ConfigurationError, DimensionError
from .defaults import resolve
from .layers import (
    Activation,
    BatchNorm,
    Conv,
    ConvTranspose,
    Dense,
    Flatten,
    Module,
    Reshape,
    Sequential,
)

VARIANTS = ("plain", "denoising", "sparse")


@dataclass(frozen=True)
class AETrainPlan:
    variant: str
    phase1_epochs: int
    phase2_epochs: int
    corruption_std: float | None = None
    rho: float | None = None
    sparsity_weight: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown AE variant {self.variant!r}")
        if (self.corruption_std is not None) != (self.variant == "denoising"):
            raise ConfigurationError("corruption_std belongs to the denoising variant only")
        sparse_fields = (self.rho is not None, self.sparsity_weight is not None)
        if any(sparse_fields) != (self.variant == "sparse") or len(set(sparse_fields)) > 1:
            raise ConfigurationError("rho and sparsity_weight belong to the sparse variant only")

    @property
    def epochs(self):
        return self.phase1_epochs + self.phase2_epochs


def make_plan(variant, epochs=100, cfg=None):
    cfg = cfg or resolve()
    phase1 = int(round(epochs * cfg["ae_phase1_fraction"]))
    kwargs = {}
    if variant == "denoising":
        kwargs["corruption_std"] = cfg["dae_noise_std"]
    elif variant == "sparse":
        kwargs["rho"] = cfg["sae_rho"]
        kwargs["sparsity_weight"] = cfg["sae_weight"]
    return AETrainPlan(variant, phase1, epochs - phase1, **kwargs)


class AutoEncoderModel(Module):
    """Bundles encoder, decoder and classifier; ``forward`` yields logits."""

    def __init__(self, encoder, decoder, classifier, plan, input_shape, class_count, name):
        super().__init__()
        self.encoder = encoder
        self.decoder = decoder
        self.classifier = classifier
        self.plan = plan
        self.input_shape = tuple(input_shape)
        self.class_count = class_count
        self.name = name
        self.assign_names()

    def check_input(self, x):
        if tuple(x.shape[1:]) != self.input_shape:
            raise DimensionError(f"{self.name}: input does not match {self.input_shape}", x.shape)

    @property
    def parts(self):
        return self.encoder, self.decoder, self.classifier, self.plan

    def forward(self, x):
        x = x if isinstance(x, Tensor) else Tensor(x)
        self.check_input(x)
        return self.classifier(self.encoder(x))

    def reconstruct(self, x):
        x = x if isinstance(x, Tensor) else Tensor(x)
        self.check_input(x)
        return self.decoder(self.encoder(x))

    def reconstruction_loss(self, clean, rng, corrupt=None):
        """Phase-one loss for this variant.

        ``corrupt`` maps the clean batch to the encoder input (denoising
        only); it defaults to additive Gaussian noise and exists so tests can
        stub the corruption.
        """
        clean = np.asarray(clean, dtype=np.float64)
        plan = self.plan
        if plan.variant == "denoising":
            if corrupt is None:
                noisy = clean + rng.normal(0.0, plan.corruption_std, size=clean.shape)
            else:
                noisy = corrupt(clean)
            code = self.encoder(Tensor(noisy))
        else:
            code = self.encoder(Tensor(clean))
        recon = self.decoder(code)
        loss = F.mse_loss(Tensor(clean), recon)
        if plan.variant == "sparse":
            mean_act = code.flatten(1).mean(axis=0)
            loss = loss + plan.sparsity_weight * F.kl_sparsity_loss(mean_act, plan.rho)
        return loss

    def phase_parameters(self, phase):
        if phase == 1:
            return self.encoder.parameters() + self.decoder.parameters()
        return self.encoder.parameters() + self.classifier.parameters()


def _ae1d(length, class_count, rng, cfg):
    widths = cfg["ae1d_widths"]
    enc = [Flatten()]
    w_in = length
    for w in widths:
        enc += [Dense(w_in, w, rng), BatchNorm(w), Activation("relu")]
        w_in = w
    dec = []
    for w in list(reversed(widths[:-1])):
        dec += [Dense(w_in, w, rng), BatchNorm(w), Activation("relu")]
        w_in = w
    # linear output: normalized inputs can be negative
    dec += [Dense(w_in, length, rng), Reshape(1, length)]
    return Sequential(*enc), Sequential(*dec), widths[-1]


def _ae2d(class_count, rng, cfg):
    c1, c2, c3 = cfg["ae2d_channels"]
    code = cfg["ae2d_code"]
    enc = Sequential(
        Conv(1, c1, (3, 3), rng, padding=1), BatchNorm(c1), Activation("relu"),
        Conv(c1, c2, (3, 3), rng, stride=2, padding=1), BatchNorm(c2), Activation("relu"),
        Conv(c2, c3, (3, 3), rng, stride=2, padding=1), BatchNorm(c3), Activation("relu"),
        Flatten(),
        Dense(c3 * 8 * 8, code, rng), Activation("relu"),
    )
    dec = Sequential(
        Dense(code, c3 * 8 * 8, rng), Activation("relu"),
        Reshape(c3, 8, 8),
        ConvTranspose(c3, c2, (3, 3), rng, stride=2, padding=1, output_padding=1),
        BatchNorm(c2), Activation("relu"),
        ConvTranspose(c2, c1, (3, 3), rng, stride=2, padding=1, output_padding=1),
        BatchNorm(c1), Activation("relu"),
        ConvTranspose(c1, 1, (3, 3), rng, padding=1),
    )
    return enc, dec, code


def build_ae(variant, input_kind, class_count, input_size=None, epochs=100, seed=0,
             **overrides):
    """Build an auto-encoder classifier.

    ``input_kind='1d'`` takes ``[batch, 1, input_size]`` with input_size 512
    or 1024 (default 1024); ``'2d'`` takes ``[batch, 1, 32, 32]``. Returns an
    :class:`AutoEncoderModel`; ``model.parts`` gives
    ``(encoder, decoder, classifier, plan)``.
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown AE variant {variant!r}; choose from {VARIANTS}")
    cfg = resolve(overrides)
    rng = np.random.default_rng(seed)
    if input_kind == "1d":
        length = 1024 if input_size is None else input_size
        if length not in (512, 1024):
            raise DimensionError(f"1d AE input length must be 512 or 1024, got {length}")
        encoder, decoder, code = _ae1d(length, class_count, rng, cfg)
        input_shape = (1, length)
    elif input_kind == "2d":
        if input_size is not None and tuple(np.atleast_1d(input_size)) != (32, 32):
            raise DimensionError(f"2d AE input must be 32x32, got {input_size}")
        encoder, decoder, code = _ae2d(class_count, rng, cfg)
        input_shape = (1, 32, 32)
    else:
        raise ConfigurationError(f"input_kind must be '1d' or '2d', got {input_kind!r}")
    hidden = cfg["ae_classifier_hidden"]
    classifier = Sequential(Dense(code, hidden, rng), Activation("relu"), Dense(hidden, class_count, rng))
    plan = make_plan(variant, epochs, cfg)
    short = {"plain": "ae", "denoising": "dae", "sparse": "sae"}[variant]
    return AutoEncoderModel(encoder, decoder, classifier, plan, input_shape, class_count,
                            name=f"{short}_{input_kind}")
