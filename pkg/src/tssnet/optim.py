"""Squared-error objective, global-norm gradient clipping, SGD and Adam.

Parameters and gradients are dicts of arrays keyed by parameter name. The step
functions update the parameter arrays in place (they are the live layer
storage) and also return them.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, ShapeMismatch


def frobenius_loss(y, yhat):
    """Squared Frobenius norm of ``y - yhat`` and its gradient w.r.t. ``yhat``.

    Stacked inputs sum over every entry; averaging over a batch is the caller's job.
    """
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ShapeMismatch(f"target {y.shape} vs prediction {yhat.shape}")
    diff = yhat - y
    return float(np.sum(diff * diff)), 2.0 * diff


def global_norm(grads):
    values = grads.values() if isinstance(grads, dict) else grads
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in values)))


def clip_gradients(grads, threshold):
    """Rescale all gradients together so their global L2 norm is at most ``threshold``."""
    if threshold <= 0:
        raise InvalidConfig("clip threshold must be > 0")
    norm = global_norm(grads)
    if norm <= threshold:
        return grads
    scale = threshold / norm
    if isinstance(grads, dict):
        return {k: g * scale for k, g in grads.items()}
    return [g * scale for g in grads]


def _check(params, grads):
    for k, p in params.items():
        if k not in grads or grads[k].shape != p.shape:
            raise ShapeMismatch(f"gradient for {k!r} missing or misshapen")


def sgd_step(params, grads, lr):
    if lr <= 0:
        raise InvalidConfig("learning rate must be > 0")
    _check(params, grads)
    for k, p in params.items():
        p -= lr * grads[k]
    return params


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, grads, state, lr):
    """One bias-corrected Adam update; moments are created lazily on first use."""
    if lr <= 0:
        raise InvalidConfig("learning rate must be > 0")
    _check(params, grads)
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for k, p in params.items():
        g = grads[k]
        m = state.m.get(k)
        if m is None:
            m = state.m[k] = np.zeros_like(p)
            state.v[k] = np.zeros_like(p)
        elif m.shape != p.shape:
            raise ShapeMismatch(f"Adam moment for {k!r} has shape {m.shape}, parameter {p.shape}")
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state
