"""Model zoo: MLP, auto-encoders, CNN families and BiLSTM."""

from __future__ import annotations

from ..errors import ConfigurationError
from .ae import AETrainPlan, AutoEncoderModel, build_ae
from .cnn import build_cnn
from .layers import ModelGraph, Module, export_parameters, import_parameters
from .lstm import LSTMCell, LSTMCellState, build_bilstm, lstm_cell
from .mlp import build_mlp

AE_ARCHS = {"ae": "plain", "dae": "denoising", "sae": "sparse"}
CNN_ARCHS = ("cnn5", "lenet", "alexnet", "resnet18")
ARCHS = ("mlp",) + tuple(AE_ARCHS) + CNN_ARCHS + ("bilstm",)


def model_family(arch):
    if arch in AE_ARCHS:
        return "ae"
    if arch in CNN_ARCHS:
        return "cnn"
    if arch in ("mlp", "bilstm"):
        return arch
    raise ConfigurationError(f"unknown model {arch!r}; choose from {ARCHS}")


def build_model(arch, input_shape, class_count, seed=0, epochs=100, **overrides):
    """Build any zoo model for a per-sample ``input_shape`` of ``(1, L)`` or ``(1, H, W)``."""
    family = model_family(arch)
    spatial = tuple(input_shape[1:])
    kind = "1d" if len(spatial) == 1 else "2d"
    if family == "mlp":
        size = 1
        for n in spatial:
            size *= n
        if kind == "2d":
            raise ConfigurationError("mlp takes 1d inputs only")
        return build_mlp(size, class_count, seed=seed, **overrides)
    if family == "ae":
        size = spatial[0] if kind == "1d" else spatial
        return build_ae(AE_ARCHS[arch], kind, class_count, input_size=size, epochs=epochs,
                        seed=seed, **overrides)
    if family == "cnn":
        return build_cnn(arch, kind, class_count, seed=seed, **overrides)
    size = spatial[0] if kind == "1d" else spatial
    return build_bilstm(kind, class_count, input_size=size, seed=seed, **overrides)


__all__ = [
    "AETrainPlan",
    "ARCHS",
    "AutoEncoderModel",
    "LSTMCell",
    "LSTMCellState",
    "ModelGraph",
    "Module",
    "build_ae",
    "build_bilstm",
    "build_cnn",
    "build_mlp",
    "build_model",
    "export_parameters",
    "import_parameters",
    "lstm_cell",
    "model_family",
]
