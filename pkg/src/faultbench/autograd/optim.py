"""Adam optimizer with per-parameter moment buffers."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError


def adam_step(params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """Apply one bias-corrected Adam update to every parameter in ``params``.

    Moments and step counts live on the :class:`Parameter` objects, so the
    same parameter may be driven by different optimizer instances.
    """
    params = list(params)
    for p in params:
        if p.grad is None:
            raise UsageError(f"parameter {p.name or '<unnamed>'} has no gradient")
    for p in params:
        g = p.grad
        p.step_count += 1
        t = p.step_count
        p.adam_m *= beta1
        p.adam_m += (1 - beta1) * g
        p.adam_v *= beta2
        p.adam_v += (1 - beta2) * g * g
        m_hat = p.adam_m / (1 - beta1**t)
        v_hat = p.adam_v / (1 - beta2**t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        adam_step(self.params, self.lr, self.beta1, self.beta2, self.eps)
