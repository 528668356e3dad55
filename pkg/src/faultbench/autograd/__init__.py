"""Minimal float64 tensor library with reverse-mode differentiation."""

from .functional import (
    activation,
    adaptive_maxpool,
    batchnorm,
    conv,
    conv_transpose,
    cross_entropy_loss,
    dense,
    dropout,
    kl_sparsity_loss,
    maxpool,
    mse_loss,
    relu,
    sigmoid,
    tanh,
)
from .optim import Adam, adam_step
from .tensor import Parameter, Tensor, as_tensor, concat, no_grad, stack

__all__ = [
    "Adam",
    "Parameter",
    "Tensor",
    "activation",
    "adam_step",
    "adaptive_maxpool",
    "as_tensor",
    "batchnorm",
    "concat",
    "conv",
    "conv_transpose",
    "cross_entropy_loss",
    "dense",
    "dropout",
    "kl_sparsity_loss",
    "maxpool",
    "mse_loss",
    "no_grad",
    "relu",
    "sigmoid",
    "stack",
    "tanh",
]
