"""Minimal dense-array helpers.

Tensors are plain ``numpy.ndarray`` objects with dtype float64 in C (row-major)
order. The functions here add the explicit shape checks and the deterministic
argmax tie-break the rest of the package relies on; none of them broadcast.
"""
import numpy as np

from .errors import InvalidShape, OutOfBounds, ShapeMismatch

DTYPE = np.float64

_ELEMENTWISE = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
}


def _check_shape(shape):
    shape = tuple(int(d) for d in shape)
    if len(shape) == 0 or any(d < 1 for d in shape):
        raise InvalidShape(f"dimensions must be positive, got {shape}")
    return shape


def tensor_new(shape, values):
    """Copy ``values`` into a new row-major float64 array of ``shape``."""
    shape = _check_shape(shape)
    flat = np.array(values, dtype=DTYPE).ravel()
    if flat.size != int(np.prod(shape)):
        raise ShapeMismatch(f"{flat.size} values do not fill shape {shape}")
    return flat.reshape(shape).copy(order="C")


def reshape(t, new_shape):
    new_shape = _check_shape(new_shape)
    if int(np.prod(new_shape)) != t.size:
        raise ShapeMismatch(f"cannot reshape {t.shape} into {new_shape}")
    return np.ascontiguousarray(t).reshape(new_shape).copy()


def matmul(a, b):
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"matmul of {a.shape} and {b.shape}")
    return a @ b


def elementwise(op, a, b):
    """Pointwise ``add``/``sub``/``mul`` of equal-shape arrays, or ``scale`` by a scalar."""
    if op == "scale":
        if np.ndim(b) != 0:
            raise ShapeMismatch("scale expects a scalar operand")
        return a * float(b)
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"unknown elementwise op {op!r}") from None
    b = np.asarray(b, dtype=DTYPE)
    if a.shape != b.shape:
        raise ShapeMismatch(f"{op} of {a.shape} and {b.shape}")
    return fn(a, b)


def _region_indices(t, region):
    if region is None:
        region = tuple(slice(None) for _ in t.shape)
    if len(region) != t.ndim:
        raise OutOfBounds(f"region has {len(region)} axes, tensor has {t.ndim}")
    axes = []
    for sl, dim in zip(region, t.shape):
        start = 0 if sl.start is None else sl.start
        stop = dim if sl.stop is None else sl.stop
        if sl.step not in (None, 1) or start < 0 or stop > dim or start >= stop:
            raise OutOfBounds(f"region {sl} invalid for axis of size {dim}")
        axes.append(np.arange(start, stop))
    return axes


def reduce(op, t, region=None):
    """Reduce ``t`` over ``region`` (a tuple of unit-step slices, one per axis).

    ``argmax`` returns the flat row-major index into ``t`` of the first maximal
    element, so ties always resolve to the lowest index.
    """
    axes = _region_indices(t, region)
    grid = np.ix_(*axes)
    block = t[grid]
    if op == "sum":
        return float(block.sum())
    if op == "max":
        return float(block.max())
    if op == "argmax":
        local = np.unravel_index(int(np.argmax(block)), block.shape)
        full = tuple(ax[i] for ax, i in zip(axes, local))
        return int(np.ravel_multi_index(full, t.shape))
    raise ValueError(f"unknown reduction {op!r}")
