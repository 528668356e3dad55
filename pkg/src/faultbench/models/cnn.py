"""Convolutional model families in 1-D and 2-D flavours.

The 1-D variants replace every 2-D op by its 1-D analogue and keep the
channel schedule; all variants take a single input channel and end in a
``class_count``-wide dense layer.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, DimensionError
from .defaults import resolve
from .layers import (
    Activation,
    AdaptiveMaxPool,
    BatchNorm,
    Conv,
    Dense,
    Dropout,
    Flatten,
    GlobalAvgPool,
    MaxPool,
    ModelGraph,
    Module,
    Sequential,
)

ARCHS = ("cnn5", "lenet", "alexnet", "resnet18")


def _rank(input_kind):
    if input_kind not in ("1d", "2d"):
        raise ConfigurationError(f"input_kind must be '1d' or '2d', got {input_kind!r}")
    return 1 if input_kind == "1d" else 2


def _k(size, rank):
    return (size,) * rank


class CNNGraph(ModelGraph):
    """ModelGraph with free spatial extents no smaller than the first kernel.

    Deeper layers still raise :class:`DimensionError` if an input is too
    small to survive the downsampling schedule.
    """

    def __init__(self, layers, rank, class_count, min_extent, name):
        super().__init__(layers, (1,) + (None,) * rank, class_count, name=name)
        self.min_extent = min_extent

    def check_input(self, x):
        super().check_input(x)
        if min(x.shape[2:]) < self.min_extent:
            raise DimensionError(
                f"{self.name}: spatial extent below the minimum {self.min_extent}", x.shape
            )


def _cnn5(rank, class_count, rng, cfg):
    k = cfg["cnn5_kernel"]
    layers = []
    c_in = 1
    channels = cfg["cnn5_channels"]
    for i, c_out in enumerate(channels):
        layers += [
            Conv(c_in, c_out, _k(k, rank), rng, padding=k // 2),
            BatchNorm(c_out),
            Activation("relu"),
        ]
        if i < len(channels) - 1:
            layers.append(MaxPool(_k(2, rank)))
        c_in = c_out
    target = cfg["cnn5_pool_target"]
    layers += [
        AdaptiveMaxPool(_k(target, rank)),
        Flatten(),
        Dense(c_in * target**rank, cfg["cnn5_hidden"], rng),
        Activation("relu"),
        Dropout(cfg["dropout"], rng),
        Dense(cfg["cnn5_hidden"], class_count, rng),
    ]
    # every pool halves the extent; the head still needs ``target`` cells
    return layers, max(k, target * 2 ** (len(channels) - 1))


def _lenet(rank, class_count, rng, cfg):
    t = cfg["lenet_pool_target"]
    layers = [
        Conv(1, 6, _k(5, rank), rng), Activation("relu"), MaxPool(_k(2, rank)),
        Conv(6, 16, _k(5, rank), rng), Activation("relu"),
        AdaptiveMaxPool(_k(t, rank)),
        Flatten(),
        Dense(16 * t**rank, 120, rng), Activation("relu"),
        Dense(120, 84, rng), Activation("relu"),
        Dense(84, class_count, rng),
    ]
    # conv5 -> pool2 -> conv5 must leave ``t`` cells for the adaptive pool
    return layers, 2 * (t + 4) + 4


def _alexnet(rank, class_count, rng, cfg):
    fc = cfg["alexnet_fc_width"]
    p = cfg["dropout"]
    layers = [
        Conv(1, 64, _k(11, rank), rng, stride=4, padding=2), Activation("relu"),
        MaxPool(_k(3, rank), _k(2, rank)),
        Conv(64, 192, _k(5, rank), rng, padding=2), Activation("relu"),
        MaxPool(_k(3, rank), _k(2, rank)),
        Conv(192, 384, _k(3, rank), rng, padding=1), Activation("relu"),
        Conv(384, 256, _k(3, rank), rng, padding=1), Activation("relu"),
        Conv(256, 256, _k(3, rank), rng, padding=1), Activation("relu"),
        AdaptiveMaxPool(_k(6, rank)),
        Flatten(),
        Dropout(p, rng), Dense(256 * 6**rank, fc, rng), Activation("relu"),
        Dropout(p, rng), Dense(fc, fc, rng), Activation("relu"),
        Dense(fc, class_count, rng),
    ]
    # smallest extent that still leaves 6 cells after the two strided pools
    return layers, 111


class BasicBlock(Module):
    """Two 3-wide convs on the residual branch plus an identity/projection skip."""

    def __init__(self, c_in, c_out, stride, rank, rng):
        super().__init__()
        self.branch = Sequential(
            Conv(c_in, c_out, _k(3, rank), rng, stride=stride, padding=1, bias=False),
            BatchNorm(c_out),
            Activation("relu"),
            Conv(c_out, c_out, _k(3, rank), rng, padding=1, bias=False),
            BatchNorm(c_out),
        )
        if stride != 1 or c_in != c_out:
            self.shortcut = Sequential(
                Conv(c_in, c_out, _k(1, rank), rng, stride=stride, bias=False),
                BatchNorm(c_out),
            )
        else:
            self.shortcut = None

    def skip(self, x):
        return x if self.shortcut is None else self.shortcut(x)

    def forward(self, x):
        from ..autograd.functional import relu

        return relu(self.branch(x) + self.skip(x))


def _resnet18(rank, class_count, rng, cfg):
    layers = [
        Conv(1, 64, _k(7, rank), rng, stride=2, padding=3, bias=False),
        BatchNorm(64),
        Activation("relu"),
        MaxPool(_k(3, rank), _k(2, rank), padding=1),
    ]
    c_in = 64
    for stage, c_out in enumerate(cfg["resnet_channels"]):
        stride = 1 if stage == 0 else 2
        layers += [BasicBlock(c_in, c_out, stride, rank, rng), BasicBlock(c_out, c_out, 1, rank, rng)]
        c_in = c_out
    layers += [GlobalAvgPool(), Dense(c_in, class_count, rng)]
    return layers, 7


_BUILDERS = {"cnn5": _cnn5, "lenet": _lenet, "alexnet": _alexnet, "resnet18": _resnet18}


def build_cnn(arch, input_kind, class_count, seed=0, **overrides):
    """Build one of ``cnn5``, ``lenet``, ``alexnet`` or ``resnet18``.

    Inputs are ``[batch, 1, L]`` (1d) or ``[batch, 1, H, W]`` (2d); adaptive
    pooling heads let the spatial extents vary above a per-arch minimum.
    """
    if arch not in _BUILDERS:
        raise ConfigurationError(f"unknown CNN architecture {arch!r}; choose from {ARCHS}")
    rank = _rank(input_kind)
    cfg = resolve(overrides)
    rng = np.random.default_rng(seed)
    layers, min_extent = _BUILDERS[arch](rank, class_count, rng, cfg)
    return CNNGraph(layers, rank, class_count, min_extent, name=f"{arch}_{input_kind}")
