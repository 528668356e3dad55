"""Layer primitives and losses on top of :class:`Tensor`.

Convolutions and pooling accept one or two spatial axes. One-dimensional
inputs are lifted to a height-1 image internally, so a single 2-D kernel
implementation serves both model families.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigurationError, DataError, DimensionError
from .tensor import Tensor, as_tensor

# -- helpers -----------------------------------------------------------------


def _pair(value, rank):
    if np.isscalar(value):
        return (int(value),) * rank
    value = tuple(int(v) for v in value)
    if len(value) != rank:
        raise ConfigurationError(f"expected {rank} values, got {value}")
    return value


def _lift(arr, rank):
    """View a rank-1 spatial array as rank-2 with height 1."""
    if rank == 1:
        return arr.reshape(arr.shape[:-1] + (1, arr.shape[-1]))
    return arr


def _out_extent(size, kernel, stride, pad):
    return (size + 2 * pad - kernel) // stride + 1


# -- dense -------------------------------------------------------------------


def dense(x, w, b=None):
    """Affine map ``x @ w + b`` for ``x`` of shape [batch, in]."""
    x, w = as_tensor(x), as_tensor(w)
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise DimensionError("dense: inner extents disagree", x.shape, w.shape)
    if b is not None and b.shape != (w.shape[1],):
        raise DimensionError("dense: bias must match output width", b.shape, w.shape)
    xd, wd = x.data, w.data
    out = xd @ wd
    if b is not None:
        out = out + b.data
        parents = (x, w, b)
    else:
        parents = (x, w)

    def backward(g):
        grads = (g @ wd.T, xd.T @ g)
        if b is not None:
            grads += (g.sum(axis=0),)
        return grads

    return Tensor._result(out, parents, backward, "dense")


# -- convolution -------------------------------------------------------------


def conv(x, w, b=None, stride=1, padding=0):
    """Cross-correlation over one or two spatial axes plus per-channel bias.

    ``x`` is [batch, ch_in, *spatial]; ``w`` is [ch_out, ch_in, *kernel].
    """
    x, w = as_tensor(x), as_tensor(w)
    rank = x.ndim - 2
    if rank not in (1, 2) or w.ndim != x.ndim:
        raise DimensionError("conv: need rank-1 or rank-2 spatial input", x.shape, w.shape)
    if w.shape[1] != x.shape[1]:
        raise DimensionError("conv: input channels disagree", x.shape, w.shape)
    stride, padding = _pair(stride, rank), _pair(padding, rank)
    out_sp = tuple(
        _out_extent(n, k, s, p)
        for n, k, s, p in zip(x.shape[2:], w.shape[2:], stride, padding)
    )
    if min(out_sp) < 1:
        raise DimensionError("conv: non-positive output extent", x.shape, w.shape)

    xd = _lift(x.data, rank)
    wd = _lift(w.data, rank)
    sh, sw = (1,) + stride if rank == 1 else stride
    ph, pw = (0,) + padding if rank == 1 else padding
    kh, kw = wd.shape[2:]
    xp = np.pad(xd, ((0, 0), (0, 0), (ph, ph), (pw, pw))) if ph or pw else xd
    cols = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    oh, ow = cols.shape[2:4]
    # [B, OH, OW, O] -> [B, O, OH, OW]
    out = np.tensordot(cols, wd, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if b is not None:
        out = out + b.data[None, :, None, None]
        parents = (x, w, b)
    else:
        parents = (x, w)
    out = np.ascontiguousarray(out)

    def backward(g):
        g4 = _lift(g, rank)
        gw = np.tensordot(g4, cols, axes=([0, 2, 3], [0, 2, 3]))
        gx = np.zeros(xp.shape)
        # [B, OH, OW, C, KH, KW]
        gcols = np.tensordot(g4, wd, axes=([1], [0]))
        for i in range(kh):
            for j in range(kw):
                gx[:, :, i : i + sh * oh : sh, j : j + sw * ow : sw] += gcols[
                    :, :, :, :, i, j
                ].transpose(0, 3, 1, 2)
        gx = gx[:, :, ph : gx.shape[2] - ph, pw : gx.shape[3] - pw]
        grads = (gx.reshape(x.shape), gw.reshape(w.shape))
        if b is not None:
            grads += (g4.sum(axis=(0, 2, 3)),)
        return grads

    return Tensor._result(out.reshape(out.shape[:2] + out_sp), parents, backward, "conv")


def conv_transpose(x, w, b=None, stride=1, padding=0, output_padding=0):
    """Transposed convolution (the adjoint of :func:`conv` w.r.t. its input).

    ``w`` is [ch_in, ch_out, *kernel]. Output extent per axis is
    ``(n - 1) * stride - 2 * padding + kernel + output_padding``.
    """
    x, w = as_tensor(x), as_tensor(w)
    rank = x.ndim - 2
    if rank not in (1, 2) or w.ndim != x.ndim or w.shape[0] != x.shape[1]:
        raise DimensionError("conv_transpose: shape mismatch", x.shape, w.shape)
    stride = _pair(stride, rank)
    padding = _pair(padding, rank)
    output_padding = _pair(output_padding, rank)
    out_sp = tuple(
        (n - 1) * s - 2 * p + k + op
        for n, k, s, p, op in zip(x.shape[2:], w.shape[2:], stride, padding, output_padding)
    )
    if min(out_sp) < 1:
        raise DimensionError("conv_transpose: non-positive output extent", x.shape, w.shape)

    xd = _lift(x.data, rank)
    wd = _lift(w.data, rank)
    sh, sw = (1,) + stride if rank == 1 else stride
    ph, pw = (0,) + padding if rank == 1 else padding
    oph, opw = (0,) + output_padding if rank == 1 else output_padding
    kh, kw = wd.shape[2:]
    B, _, H, W = xd.shape
    cout = wd.shape[1]
    full_h = (H - 1) * sh + kh + oph
    full_w = (W - 1) * sw + kw + opw
    full = np.zeros((B, cout, full_h, full_w))
    # [B, H, W, Cout, KH, KW]
    contrib = np.tensordot(xd, wd, axes=([1], [0]))
    for i in range(kh):
        for j in range(kw):
            full[:, :, i : i + sh * H : sh, j : j + sw * W : sw] += contrib[
                :, :, :, :, i, j
            ].transpose(0, 3, 1, 2)
    out = full[:, :, ph : full_h - ph, pw : full_w - pw]
    if b is not None:
        out = out + b.data[None, :, None, None]
        parents = (x, w, b)
    else:
        parents = (x, w)
    out = np.ascontiguousarray(out)

    def backward(g):
        g4 = _lift(g, rank)
        gfull = np.zeros((B, cout, full_h, full_w))
        gfull[:, :, ph : full_h - ph, pw : full_w - pw] = g4
        cols = sliding_window_view(gfull, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw][
            :, :, :H, :W
        ]
        # cols: [B, Cout, H, W, KH, KW]
        gx = np.tensordot(cols, wd, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        gw = np.tensordot(xd, cols, axes=([0, 2, 3], [0, 2, 3]))
        grads = (gx.reshape(x.shape), gw.reshape(w.shape))
        if b is not None:
            grads += (g4.sum(axis=(0, 2, 3)),)
        return grads

    return Tensor._result(
        out.reshape(out.shape[:2] + out_sp), parents, backward, "conv_transpose"
    )


# -- pooling -----------------------------------------------------------------


def maxpool(x, size, stride=None, padding=0):
    """Max pooling; gradient goes to the first (lowest flat index) maximum.

    ``padding`` pads with -inf, so padded cells never win a window.
    """
    x = as_tensor(x)
    rank = x.ndim - 2
    if rank not in (1, 2):
        raise DimensionError("maxpool: need rank-1 or rank-2 spatial input", x.shape)
    size = _pair(size, rank)
    stride = size if stride is None else _pair(stride, rank)
    padding = _pair(padding, rank)
    if any(n + 2 * p < k for n, k, p in zip(x.shape[2:], size, padding)):
        raise DimensionError(f"maxpool: pool {size} larger than input", x.shape)
    if any(2 * p > k for k, p in zip(size, padding)):
        raise ConfigurationError("maxpool: padding must be at most half the pool size")
    xd = _lift(x.data, rank)
    kh, kw = (1,) + size if rank == 1 else size
    sh, sw = (1,) + stride if rank == 1 else stride
    ph, pw = (0,) + padding if rank == 1 else padding
    if ph or pw:
        xd = np.pad(xd, ((0, 0), (0, 0), (ph, ph), (pw, pw)), constant_values=-np.inf)
    win = sliding_window_view(xd, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    B, C, oh, ow = win.shape[:4]
    flat = win.reshape(B, C, oh, ow, kh * kw)
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]
    out_sp = out.shape[2:] if rank == 2 else out.shape[3:]

    def backward(g):
        g4 = _lift(g, rank)
        gx = np.zeros(xd.shape)
        for k in range(kh * kw):
            i, j = divmod(k, kw)
            hit = arg == k
            if hit.any():
                gx[:, :, i : i + sh * oh : sh, j : j + sw * ow : sw] += g4 * hit
        gx = gx[:, :, ph : gx.shape[2] - ph, pw : gx.shape[3] - pw]
        return (gx.reshape(x.shape),)

    return Tensor._result(out.reshape(out.shape[:2] + out_sp), (x,), backward, "maxpool")


def _adaptive_bounds(n, target):
    return [((i * n) // target, -((-(i + 1) * n) // target)) for i in range(target)]


def adaptive_maxpool(x, target):
    """Max pooling to a fixed output extent, whatever the input extent.

    Output cell ``i`` along an axis of length ``L`` covers
    ``[floor(i*L/T), ceil((i+1)*L/T))``.
    """
    x = as_tensor(x)
    rank = x.ndim - 2
    if rank not in (1, 2):
        raise DimensionError("adaptive_maxpool: need rank-1 or rank-2 spatial input", x.shape)
    target = _pair(target, rank)
    if min(target) < 1:
        raise DimensionError(f"adaptive_maxpool: target {target} must be positive", x.shape)
    if any(t > n for t, n in zip(target, x.shape[2:])):
        raise DimensionError(f"adaptive_maxpool: target {target} exceeds input", x.shape)
    xd = _lift(x.data, rank)
    th, tw = (1,) + target if rank == 1 else target
    H, W = xd.shape[2:]
    rows, cols = _adaptive_bounds(H, th), _adaptive_bounds(W, tw)
    B, C = xd.shape[:2]
    out = np.empty((B, C, th, tw))
    argmaxes = {}
    for r, (r0, r1) in enumerate(rows):
        for c, (c0, c1) in enumerate(cols):
            block = xd[:, :, r0:r1, c0:c1].reshape(B, C, -1)
            a = block.argmax(axis=-1)
            argmaxes[r, c] = a
            out[:, :, r, c] = np.take_along_axis(block, a[..., None], axis=-1)[..., 0]

    def backward(g):
        g4 = _lift(g, rank)
        gx = np.zeros(xd.shape)
        bi, ci = np.meshgrid(np.arange(B), np.arange(C), indexing="ij")
        for r, (r0, r1) in enumerate(rows):
            for c, (c0, c1) in enumerate(cols):
                width = c1 - c0
                a = argmaxes[r, c]
                np.add.at(gx, (bi, ci, r0 + a // width, c0 + a % width), g4[:, :, r, c])
        return (gx.reshape(x.shape),)

    out_sp = (th, tw) if rank == 2 else (tw,)
    return Tensor._result(out.reshape((B, C) + out_sp), (x,), backward, "adaptive_maxpool")


# -- normalization and regularization ----------------------------------------


def batchnorm(x, gamma, beta, running_mean, running_var, training,
              momentum=0.1, eps=1e-5):
    """Batch normalization over every axis except the channel/feature axis 1.

    ``running_mean`` and ``running_var`` are numpy buffers updated in place
    during training (variance buffer uses the unbiased batch estimate).
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise DimensionError("batchnorm: need [batch, features, ...]", x.shape)
    axes = (0,) + tuple(range(2, x.ndim))
    bshape = (1, x.shape[1]) + (1,) * (x.ndim - 2)
    xd = x.data
    if training:
        if x.shape[0] < 2:
            raise ConfigurationError("batchnorm: training mode needs batch >= 2")
        n = xd.size // x.shape[1]
        mean = xd.mean(axis=axes)
        var = xd.var(axis=axes)
        running_mean *= 1 - momentum
        running_mean += momentum * mean
        running_var *= 1 - momentum
        running_var += momentum * var * n / (n - 1)
    else:
        mean, var = running_mean.copy(), running_var.copy()
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mean.reshape(bshape)) * inv_std.reshape(bshape)
    gd = gamma.data.reshape(bshape)
    out = gd * xhat + beta.data.reshape(bshape)

    def backward(g):
        ggamma = (g * xhat).sum(axis=axes)
        gbeta = g.sum(axis=axes)
        dxhat = g * gd
        if training:
            m = xd.size // x.shape[1]
            gx = (inv_std.reshape(bshape) / m) * (
                m * dxhat
                - dxhat.sum(axis=axes, keepdims=True)
                - xhat * (dxhat * xhat).sum(axis=axes, keepdims=True)
            )
        else:
            gx = dxhat * inv_std.reshape(bshape)
        return gx, ggamma, gbeta

    return Tensor._result(out, (x, gamma, beta), backward, "batchnorm")


def dropout(x, p, training, rng):
    if not 0 <= p < 1:
        raise ConfigurationError(f"dropout probability must be in [0, 1), got {p}")
    x = as_tensor(x)
    if not training or p == 0:
        return x
    keep = (rng.random(x.shape) >= p) / (1.0 - p)
    return Tensor._result(x.data * keep, (x,), lambda g: (g * keep,), "dropout")


# -- activations -------------------------------------------------------------


def relu(x):
    x = as_tensor(x)
    mask = x.data > 0
    return Tensor._result(x.data * mask, (x,), lambda g: (g * mask,), "relu")


def sigmoid(x):
    x = as_tensor(x)
    out = _stable_sigmoid(x.data)
    return Tensor._result(out, (x,), lambda g: (g * out * (1 - out),), "sigmoid")


def _stable_sigmoid(a):
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def tanh(x):
    x = as_tensor(x)
    out = np.tanh(x.data)
    return Tensor._result(out, (x,), lambda g: (g * (1 - out * out),), "tanh")


ACTIVATIONS = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh}


def activation(x, kind):
    try:
        fn = ACTIVATIONS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown activation {kind!r}") from None
    return fn(x)


# -- losses ------------------------------------------------------------------


def log_softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def cross_entropy_loss(logits, labels):
    """Mean softmax cross-entropy over the batch."""
    logits = as_tensor(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError("cross_entropy: need [batch, classes] and [batch]",
                             logits.shape, labels.shape)
    n, classes = logits.shape
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise DataError(f"labels must lie in [0, {classes}), got range "
                        f"[{labels.min()}, {labels.max()}]")
    labels = labels.astype(np.int64)
    logp = log_softmax(logits.data)
    loss = -logp[np.arange(n), labels].mean()

    def backward(g):
        grad = np.exp(logp)
        grad[np.arange(n), labels] -= 1.0
        return (grad * (g / n),)

    return Tensor._result(np.asarray(loss), (logits,), backward, "cross_entropy")


def mse_loss(x, x_hat):
    """Squared reconstruction error summed per sample, averaged over the batch."""
    x, x_hat = as_tensor(x), as_tensor(x_hat)
    if x.shape != x_hat.shape:
        raise DimensionError("mse_loss: shapes differ", x.shape, x_hat.shape)
    n = x.shape[0] if x.ndim else 1
    diff = x.data - x_hat.data
    loss = (diff * diff).sum() / n

    def backward(g):
        gd = 2.0 * diff * (g / n)
        return gd, -gd

    return Tensor._result(np.asarray(loss), (x, x_hat), backward, "mse")


def kl_sparsity_loss(mean_activations, rho):
    """Summed KL divergence between target rate ``rho`` and mean activations."""
    a = as_tensor(mean_activations).clip(1e-7, 1 - 1e-7)
    return (rho * (rho / a).log() + (1 - rho) * ((1 - rho) / (1 - a)).log()).sum()
