"""LSTM cell and the bidirectional LSTM classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autograd import functional as F
from ..autograd.tensor import Parameter, Tensor, concat
from ..errors import ConfigurationError, DimensionError
from .defaults import resolve
from .layers import Dense, Module, fan_in_uniform

GATES = ("forget", "input", "output", "candidate")


@dataclass
class LSTMCellState:
    h: Tensor
    c: Tensor

    def __post_init__(self):
        if self.h.shape != self.c.shape:
            raise DimensionError("LSTM state: h and c differ", self.h.shape, self.c.shape)

    @classmethod
    def zeros(cls, batch, hidden):
        return cls(Tensor(np.zeros((batch, hidden))), Tensor(np.zeros((batch, hidden))))


class LSTMCell(Module):
    """Holds one weight matrix over ``[h_prev, x_t]`` and one bias per gate."""

    def __init__(self, input_size, hidden_size, rng):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        fan = hidden_size
        for gate in GATES:
            setattr(self, f"w_{gate}",
                    Parameter(fan_in_uniform(rng, (hidden_size + input_size, hidden_size), fan)))
            setattr(self, f"b_{gate}", Parameter(fan_in_uniform(rng, (hidden_size,), fan)))

    def forward(self, x):
        raise TypeError("call lstm_cell(x_t, state, cell) instead")


def lstm_cell(x_t, state, cell):
    """One LSTM step: forget/input/output sigmoid gates and a tanh candidate
    over the concatenation ``[h_prev, x_t]``.

    ``c_t = f * c_prev + i * g`` and ``h_t = o * tanh(c_t)``.
    """
    x_t = x_t if isinstance(x_t, Tensor) else Tensor(x_t)
    if x_t.ndim != 2 or x_t.shape[1] != cell.input_size or x_t.shape[0] != state.h.shape[0]:
        raise DimensionError("lstm_cell: input does not match cell/state", x_t.shape, state.h.shape)
    hx = concat([state.h, x_t], axis=1)
    f = F.sigmoid(F.dense(hx, cell.w_forget, cell.b_forget))
    i = F.sigmoid(F.dense(hx, cell.w_input, cell.b_input))
    o = F.sigmoid(F.dense(hx, cell.w_output, cell.b_output))
    g = F.tanh(F.dense(hx, cell.w_candidate, cell.b_candidate))
    c = f * state.c + i * g
    h = o * F.tanh(c)
    return LSTMCellState(h, c)


def run_direction(seq, cell, reverse=False):
    """Unroll ``cell`` over ``seq`` ([batch, steps, features]); return final state."""
    batch, steps = seq.shape[:2]
    state = LSTMCellState.zeros(batch, cell.hidden_size)
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    for t in order:
        state = lstm_cell(seq[:, t, :], state, cell)
    return state


class BiLSTMGraph(Module):
    """Bidirectional LSTM over a sequence view of the input, dense head on
    the concatenated final hidden states.

    1-D inputs ``[batch, 1, L]`` are framed into ``steps`` consecutive
    segments of ``L / steps`` samples; 2-D inputs ``[batch, 1, H, W]`` are
    read row by row (``H`` steps of ``W`` features).
    """

    def __init__(self, input_kind, input_size, class_count, hidden, steps, rng):
        super().__init__()
        self.input_kind = input_kind
        if input_kind == "1d":
            length = int(input_size)
            if steps < 2 or length % steps:
                raise DimensionError(
                    f"bilstm: length {length} must split into >= 2 equal steps (steps={steps})"
                )
            self.steps, self.features = steps, length // steps
            self.input_shape = (1, length)
        elif input_kind == "2d":
            h, w = input_size
            if h < 2:
                raise DimensionError(f"bilstm: need at least 2 rows, got {h}")
            self.steps, self.features = h, w
            self.input_shape = (1, h, w)
        else:
            raise ConfigurationError(f"input_kind must be '1d' or '2d', got {input_kind!r}")
        self.class_count = class_count
        self.forward_cell = LSTMCell(self.features, hidden, rng)
        self.backward_cell = LSTMCell(self.features, hidden, rng)
        self.head = Dense(2 * hidden, class_count, rng)
        self.name = f"bilstm_{input_kind}"
        self.assign_names()

    def sequence(self, x):
        x = x if isinstance(x, Tensor) else Tensor(x)
        if tuple(x.shape[1:]) != self.input_shape:
            raise DimensionError(f"{self.name}: input does not match {self.input_shape}", x.shape)
        return x.reshape(x.shape[0], self.steps, self.features)

    def final_states(self, x):
        seq = self.sequence(x)
        return run_direction(seq, self.forward_cell), run_direction(seq, self.backward_cell, True)

    def forward(self, x):
        fwd, bwd = self.final_states(x)
        return self.head(concat([fwd.h, bwd.h], axis=1))


def build_bilstm(input_kind, class_count, input_size=1024, seed=0, **overrides):
    """``input_size`` is the length (1d) or ``(H, W)`` (2d)."""
    cfg = resolve(overrides)
    rng = np.random.default_rng(seed)
    steps = cfg["lstm_steps_1d"]
    return BiLSTMGraph(input_kind, input_size, class_count, cfg["lstm_hidden"], steps, rng)
