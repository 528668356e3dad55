"""Stateful layer wrappers and the ModelGraph container."""

from __future__ import annotations

import math
import struct

import numpy as np

from ..autograd import functional as F
from ..autograd.tensor import Parameter, Tensor
from ..errors import DimensionError, UsageError


class Module:
    """Base class: tracks child modules and parameters by attribute name."""

    def __init__(self):
        self.training = True

    def __call__(self, x):
        return self.forward(x)

    def forward(self, x):
        raise NotImplementedError

    def children(self):
        for key, value in vars(self).items():
            if isinstance(value, Module):
                yield key, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{key}.{i}", item

    def named_parameters(self, prefix=""):
        for key, value in vars(self).items():
            if isinstance(value, Parameter):
                yield prefix + key, value
        for key, child in self.children():
            yield from child.named_parameters(prefix + key + ".")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def assign_names(self, prefix=""):
        for name, p in self.named_parameters(prefix):
            p.name = name
        return self

    def train(self, mode=True):
        self.training = mode
        for _, child in self.children():
            child.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def parameter_count(self):
        return sum(p.size for p in self.parameters())


def kaiming_uniform(rng, shape, fan_in):
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def fan_in_uniform(rng, shape, fan_in):
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Dense(Module):
    def __init__(self, n_in, n_out, rng):
        super().__init__()
        self.weight = Parameter(kaiming_uniform(rng, (n_in, n_out), n_in))
        self.bias = Parameter(fan_in_uniform(rng, (n_out,), n_in))

    def forward(self, x):
        return F.dense(x, self.weight, self.bias)


class Conv(Module):
    """Convolution over 1 or 2 spatial axes (rank taken from ``kernel``)."""

    def __init__(self, c_in, c_out, kernel, rng, stride=1, padding=0, bias=True):
        super().__init__()
        kernel = (kernel,) if np.isscalar(kernel) else tuple(kernel)
        fan_in = c_in * int(np.prod(kernel))
        self.weight = Parameter(kaiming_uniform(rng, (c_out, c_in) + kernel, fan_in))
        self.bias = Parameter(fan_in_uniform(rng, (c_out,), fan_in)) if bias else None
        self.stride = stride
        self.padding = padding
        self.kernel = kernel

    def forward(self, x):
        return F.conv(x, self.weight, self.bias, self.stride, self.padding)


class ConvTranspose(Module):
    def __init__(self, c_in, c_out, kernel, rng, stride=1, padding=0, output_padding=0):
        super().__init__()
        kernel = (kernel,) if np.isscalar(kernel) else tuple(kernel)
        fan_in = c_out * int(np.prod(kernel))
        self.weight = Parameter(kaiming_uniform(rng, (c_in, c_out) + kernel, fan_in))
        self.bias = Parameter(fan_in_uniform(rng, (c_out,), fan_in))
        self.stride = stride
        self.padding = padding
        self.output_padding = output_padding

    def forward(self, x):
        return F.conv_transpose(
            x, self.weight, self.bias, self.stride, self.padding, self.output_padding
        )


class BatchNorm(Module):
    def __init__(self, n_features, momentum=0.1, eps=1e-5):
        super().__init__()
        self.weight = Parameter(np.ones(n_features))
        self.bias = Parameter(np.zeros(n_features))
        self.running_mean = np.zeros(n_features)
        self.running_var = np.ones(n_features)
        self.momentum = momentum
        self.eps = eps

    def forward(self, x):
        return F.batchnorm(x, self.weight, self.bias, self.running_mean,
                           self.running_var, self.training, self.momentum, self.eps)


class Activation(Module):
    def __init__(self, kind="relu"):
        super().__init__()
        self.kind = kind

    def forward(self, x):
        return F.activation(x, self.kind)


class MaxPool(Module):
    def __init__(self, size, stride=None, padding=0):
        super().__init__()
        self.size = size
        self.stride = stride
        self.padding = padding

    def forward(self, x):
        return F.maxpool(x, self.size, self.stride, self.padding)


class AdaptiveMaxPool(Module):
    def __init__(self, target):
        super().__init__()
        self.target = target

    def forward(self, x):
        return F.adaptive_maxpool(x, self.target)


class GlobalAvgPool(Module):
    def forward(self, x):
        return x.mean(axis=tuple(range(2, x.ndim)))


class Dropout(Module):
    def __init__(self, p, rng):
        super().__init__()
        self.p = p
        self.rng = rng

    def forward(self, x):
        return F.dropout(x, self.p, self.training, self.rng)


class Flatten(Module):
    def forward(self, x):
        return x.flatten(1)


class Reshape(Module):
    def __init__(self, *shape):
        super().__init__()
        self.shape = shape

    def forward(self, x):
        return x.reshape((x.shape[0],) + self.shape)


class Sequential(Module):
    def __init__(self, *layers):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x):
        for layer in self.layers:
            x = layer(x)
        return x


class ModelGraph(Sequential):
    """An ordered layer stack producing ``[batch, class_count]`` logits.

    ``input_shape`` is the per-sample contract, e.g. ``(1, 1024)`` or
    ``(1, None, None)`` when adaptive pooling lets spatial extents vary.
    """

    def __init__(self, layers, input_shape, class_count, name="model"):
        super().__init__(*layers)
        self.input_shape = tuple(input_shape)
        self.class_count = class_count
        self.name = name
        self.assign_names()
        names = [p.name for p in self.parameters()]
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate parameter names in {name}")

    def check_input(self, x):
        shape = tuple(x.shape[1:])
        want = self.input_shape
        ok = len(shape) == len(want) and all(w is None or w == s for w, s in zip(want, shape))
        if not ok:
            raise DimensionError(f"{self.name}: input does not match contract {want}", x.shape)

    def forward(self, x):
        x = x if isinstance(x, Tensor) else Tensor(x)
        self.check_input(x)
        return super().forward(x)


def state_dict(module):
    return {name: p.data.copy() for name, p in module.named_parameters()}


def load_state_dict(module, state):
    for name, p in module.named_parameters():
        p.data[...] = state[name]


def export_parameters(module, path):
    """Write parameters as ``<u32 name length><name><u32 ndim><u64 dims...><f64 data>`` records."""
    with open(path, "wb") as fh:
        for name, p in module.named_parameters():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", p.ndim))
            fh.write(struct.pack(f"<{p.ndim}Q", *p.shape))
            fh.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def import_parameters(path):
    out = {}
    with open(path, "rb") as fh:
        blob = fh.read()
    pos = 0
    while pos < len(blob):
        (n,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        name = blob[pos : pos + n].decode("utf-8")
        pos += n
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}Q", blob, pos)
        pos += 8 * ndim
        count = int(np.prod(shape))
        out[name] = np.frombuffer(blob, "<f8", count, pos).reshape(shape).copy()
        pos += 8 * count
    return out
