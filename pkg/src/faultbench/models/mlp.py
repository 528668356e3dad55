from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from .defaults import resolve
from .layers import Activation, BatchNorm, Dense, Flatten, ModelGraph


def build_mlp(input_len, class_count, seed=0, **overrides):
    """Five (dense -> batchnorm -> relu) blocks followed by a dense head.

    Input contract is ``[batch, 1, input_len]``.
    """
    if input_len <= 0:
        raise ConfigurationError(f"input_len must be positive, got {input_len}")
    cfg = resolve(overrides)
    rng = np.random.default_rng(seed)
    layers = [Flatten()]
    width_in = input_len
    for width in cfg["mlp_widths"]:
        layers += [Dense(width_in, width, rng), BatchNorm(width), Activation("relu")]
        width_in = width
    layers.append(Dense(width_in, class_count, rng))
    return ModelGraph(layers, (1, input_len), class_count, name="mlp")
