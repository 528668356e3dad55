import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from faultbench.autograd import Parameter, Tensor, concat, no_grad, stack
from faultbench.errors import DimensionError, NonFiniteError, UsageError

finite = st.floats(-10, 10, allow_nan=False)


def test_sum_gradient_is_all_ones():
    x = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
    x.sum().backward()
    np.testing.assert_array_equal(x.grad, np.ones((2, 3)))


def test_square_gradient():
    x = Tensor([1.0, 2.0], requires_grad=True)
    (x * x).sum().backward()
    np.testing.assert_array_equal(x.grad, [2.0, 4.0])


def test_repeated_backward_accumulates():
    x = Tensor([1.0, 2.0], requires_grad=True)
    (x * x).sum().backward()
    (x * x).sum().backward()
    np.testing.assert_array_equal(x.grad, [4.0, 8.0])
    x.zero_grad()
    assert x.grad is None


def test_non_scalar_backward_is_usage_error():
    x = Tensor([1.0, 2.0], requires_grad=True)
    with pytest.raises(UsageError):
        (x * 2).backward()


def test_backward_without_tracking_is_usage_error():
    with pytest.raises(UsageError):
        Tensor([1.0]).sum().backward()


def test_non_finite_forward_raises():
    with pytest.raises(NonFiniteError):
        Tensor([0.0]).log()
    with pytest.raises(NonFiniteError):
        Tensor([1.0]) / Tensor([0.0])


def test_shared_subexpression_visited_once():
    # y = a * a where a = 3x; dy/dx = 18x
    x = Tensor([2.0], requires_grad=True)
    a = x * 3
    y = (a * a).sum()
    y.backward()
    np.testing.assert_allclose(x.grad, [36.0])


def test_every_reachable_tensor_gets_grad():
    x = Tensor(np.ones(3), requires_grad=True)
    w = Parameter(np.full(3, 2.0), name="w")
    h = x * w
    out = (h + 1).sum()
    out.backward()
    assert x.grad.shape == x.shape and w.grad.shape == w.shape
    assert h.grad is not None


def test_no_grad_stops_recording():
    x = Tensor([1.0], requires_grad=True)
    with no_grad():
        y = x * 2
    assert not y.requires_grad


def test_deep_chain_does_not_recurse():
    x = Tensor([1.0], requires_grad=True)
    y = x
    for _ in range(5000):
        y = y * 1.0
    y.sum().backward()
    assert x.grad[0] == 1.0


def test_matmul_shape_error_names_shapes():
    with pytest.raises(DimensionError) as err:
        Tensor(np.ones((2, 3))) @ Tensor(np.ones((2, 3)))
    assert "(2, 3)" in str(err.value)


def test_broadcast_gradients_reduce_to_operand_shape():
    a = Tensor(np.ones((4, 3)), requires_grad=True)
    b = Tensor(np.ones(3), requires_grad=True)
    (a * b + b).sum().backward()
    assert b.grad.shape == (3,)
    np.testing.assert_array_equal(b.grad, [8.0, 8.0, 8.0])


def test_concat_and_stack_route_gradients():
    a = Tensor(np.ones((2, 2)), requires_grad=True)
    b = Tensor(np.ones((2, 3)), requires_grad=True)
    (concat([a, b], axis=1) * np.arange(5.0)).sum().backward()
    np.testing.assert_array_equal(a.grad, [[0, 1], [0, 1]])
    np.testing.assert_array_equal(b.grad, [[2, 3, 4], [2, 3, 4]])
    s = stack([a, a], axis=0)
    assert s.shape == (2, 2, 2)


def test_getitem_fancy_index_accumulates():
    x = Tensor(np.zeros(3), requires_grad=True)
    x[np.array([0, 0, 2])].sum().backward()
    np.testing.assert_array_equal(x.grad, [2.0, 0.0, 1.0])


def test_parameter_buffers():
    p = Parameter(np.zeros((2, 3)), name="layer.weight")
    assert p.requires_grad and p.adam_m.shape == p.shape and p.adam_v.shape == p.shape
    assert p.step_count == 0


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=1, max_dims=3, max_side=4), elements=finite))
def test_grad_shape_matches_data(arr):
    x = Tensor(arr, requires_grad=True)
    (x * x).mean().backward()
    assert x.grad.shape == x.shape
    assert x.data.size == int(np.prod(x.shape))


def test_determinism_bitwise():
    rng1, rng2 = np.random.default_rng(3), np.random.default_rng(3)
    outs = []
    for rng in (rng1, rng2):
        x = Tensor(rng.normal(size=(5, 4)), requires_grad=True)
        w = Tensor(rng.normal(size=(4, 2)), requires_grad=True)
        loss = ((x @ w).exp() / 7).sum()
        loss.backward()
        outs.append((loss.data.tobytes(), x.grad.tobytes(), w.grad.tobytes()))
    assert outs[0] == outs[1]
