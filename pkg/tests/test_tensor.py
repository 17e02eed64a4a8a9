import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tssnet.errors import InvalidShape, OutOfBounds, ShapeMismatch
from tssnet.tensor import elementwise, matmul, reduce, reshape, tensor_new


def test_tensor_new_row_major():
    t = tensor_new([2, 2], [1, 2, 3, 4])
    assert t[1, 0] == 3
    assert t.dtype == np.float64 and t.flags["C_CONTIGUOUS"]


def test_tensor_new_zero_vector_and_copy():
    values = [0.0, 0.0, 0.0]
    t = tensor_new([3], values)
    values[0] = 9.0
    np.testing.assert_array_equal(t, np.zeros(3))


def test_tensor_new_errors():
    with pytest.raises(ShapeMismatch):
        tensor_new([2, 3], range(5))
    with pytest.raises(InvalidShape):
        tensor_new([0, 3], [])
    with pytest.raises(InvalidShape):
        tensor_new([-1], [1.0])


def test_reshape_flatten_and_round_trip():
    t = tensor_new([2, 3], range(6))
    flat = reshape(t, [6])
    np.testing.assert_array_equal(flat, np.arange(6.0))
    back = reshape(reshape(flat, [2, 3]), [6])
    np.testing.assert_array_equal(back, flat)
    with pytest.raises(ShapeMismatch):
        reshape(t, [4])


def test_matmul_fixtures():
    np.testing.assert_array_equal(matmul(np.eye(2), np.array([[5.0], [7.0]])), [[5], [7]])
    np.testing.assert_array_equal(matmul(np.array([[1.0, 2], [3, 4]]), np.ones((2, 1))), [[3], [7]])
    with pytest.raises(ShapeMismatch):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_elementwise():
    t = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(elementwise("add", t, np.zeros(3)), t)
    np.testing.assert_array_equal(elementwise("scale", t, 2), [2, 4, 6])
    np.testing.assert_array_equal(elementwise("sub", t, t), np.zeros(3))
    with pytest.raises(ShapeMismatch):
        elementwise("mul", t, np.ones(2))


def test_reduce():
    assert reduce("sum", np.array([1.0, 2.0, 3.0])) == 6
    t = np.array([[1.0, 5.0], [5.0, 2.0]])
    assert reduce("max", t) == 5
    assert reduce("argmax", t) == 1
    # sub-region index is reported in full-tensor coordinates
    assert reduce("argmax", t, (slice(1, 2), slice(0, 2))) == 2
    with pytest.raises(OutOfBounds):
        reduce("sum", t, (slice(1, 1), slice(0, 2)))
    with pytest.raises(OutOfBounds):
        reduce("sum", t, (slice(0, 3), slice(0, 2)))


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=24))
def test_row_major_read_back(values):
    t = tensor_new([len(values)], values)
    assert t.tolist() == [float(v) for v in values]


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
def test_argmax_deterministic_first(values):
    t = np.array(values, dtype=float)
    i = reduce("argmax", t)
    assert i == reduce("argmax", t)
    assert i == values.index(max(values))


@settings(max_examples=50)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31))
def test_matmul_associative(a, b, c, d, seed):
    rng = np.random.default_rng(seed)
    A, B, C = rng.normal(size=(a, b)), rng.normal(size=(b, c)), rng.normal(size=(c, d))
    np.testing.assert_allclose(matmul(matmul(A, B), C), matmul(A, matmul(B, C)), atol=1e-9)
