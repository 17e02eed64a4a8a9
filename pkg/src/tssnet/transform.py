"""Temporal-slicing stack transform: an m x T series becomes an m x window x o tensor.

Slice ``i`` (0-based) starts at padded column ``i * stride`` and takes ``window``
samples spaced ``dilation`` apart, so ``out[f, w, i] = padded[f, i*stride + w*dilation]``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig

PADDING_MODES = ("zero", "edge", "local-mean")
FORMULAS = ("conservative", "maximal")


@dataclass(frozen=True)
class TemporalTensorConfig:
    window: int = 1
    stride: int = 1
    dilation: int = 1
    padding: int = 0
    padding_mode: str = "edge"
    local_mean_k: int = 1
    # "conservative" reserves 2*d*(w-1) columns for the window span, "maximal" only d*(w-1)
    formula: str = "conservative"

    def __post_init__(self):
        if self.window < 1 or self.stride < 1 or self.dilation < 1:
            raise InvalidConfig("window, stride and dilation must be >= 1")
        if self.padding < 0:
            raise InvalidConfig("padding must be >= 0")
        if self.padding_mode not in PADDING_MODES:
            raise InvalidConfig(f"padding_mode must be one of {PADDING_MODES}")
        if self.local_mean_k < 1:
            raise InvalidConfig("local_mean_k must be >= 1")
        if self.formula not in FORMULAS:
            raise InvalidConfig(f"formula must be one of {FORMULAS}")


def slice_count(cfg, T):
    """Number of slices ``o`` produced for a series of length ``T``."""
    if T < 1:
        raise InvalidConfig("series length must be >= 1")
    span = cfg.dilation * (cfg.window - 1)
    if cfg.formula == "conservative":
        span *= 2
    o = (T + 2 * cfg.padding - span - 1) // cfg.stride + 1
    if o < 1:
        raise InvalidConfig(
            f"window={cfg.window}, stride={cfg.stride}, dilation={cfg.dilation}, "
            f"padding={cfg.padding} leaves no slice for T={T} (o={o})")
    return o


def pad_series(x, p, mode="edge", k=1):
    """Append ``p`` columns to both ends of the time axis (last axis).

    Accepts an array (any leading batch axes) or a ``SeriesMatrix``; returns
    the same kind.
    """
    from .data import SeriesMatrix

    if isinstance(x, SeriesMatrix):
        return x.with_values(pad_series(x.values, p, mode, k))
    if p < 0:
        raise InvalidConfig("padding must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    if p == 0:
        return x.copy()
    T = x.shape[-1]
    if mode == "zero":
        left = np.zeros(x.shape[:-1] + (p,))
        right = left
    elif mode == "edge":
        left = np.repeat(x[..., :1], p, axis=-1)
        right = np.repeat(x[..., -1:], p, axis=-1)
    elif mode == "local-mean":
        if k > T:
            raise InvalidConfig(f"local-mean window {k} exceeds series length {T}")
        left = np.repeat(_edge_mean(x[..., :k]), p, axis=-1)
        right = np.repeat(_edge_mean(x[..., T - k:]), p, axis=-1)
    else:
        raise InvalidConfig(f"unknown padding mode {mode!r}")
    return np.concatenate([left, x, right], axis=-1)


def _edge_mean(block):
    # correctly rounded sum so the pad value does not depend on summation order
    lead = block.shape[:-1]
    sums = np.array([math.fsum(r) for r in block.reshape(-1, block.shape[-1])]).reshape(lead)
    return (sums / block.shape[-1])[..., None]


def slice_indices(cfg, T):
    """Index grid ``idx[w, i]`` into the padded series."""
    o = slice_count(cfg, T)
    w = np.arange(cfg.window)[:, None]
    i = np.arange(o)[None, :]
    return i * cfg.stride + w * cfg.dilation


def slice_stack(x, cfg):
    """Apply the transform to ``x`` of shape (..., m, T); returns (..., m, window, o)."""
    from .data import SeriesMatrix

    if isinstance(x, SeriesMatrix):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    idx = slice_indices(cfg, x.shape[-1])
    padded = pad_series(x, cfg.padding, cfg.padding_mode, cfg.local_mean_k)
    return padded[..., idx]
