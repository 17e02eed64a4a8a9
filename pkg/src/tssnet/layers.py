"""Convolution, max-pooling and dense layers with analytic gradients.

Every layer works on a batch axis first: conv/pool take (N, C, H, W), dense
takes (N, in). A single sample without the batch axis is accepted too and the
result comes back without it. ``forward`` returns ``(output, cache)`` and
``backward(cache, grad_output)`` returns a :class:`GradientBundle`; layers keep
no hidden state between the two calls.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidConfig, KernelTooLarge, ShapeMismatch, StaleCache


@dataclass
class GradientBundle:
    grad_input: np.ndarray
    grads: dict = field(default_factory=dict)


def glorot_uniform(shape, fan_in, fan_out, rng):
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _batched(x, ndim):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == ndim - 1:
        return x[None], True
    if x.ndim != ndim:
        raise ShapeMismatch(f"expected {ndim - 1}D or {ndim}D input, got shape {x.shape}")
    return x, False


@dataclass
class Conv2dLayer:
    """Stride-1 cross-correlation with one bias per kernel and no activation.

    ``padding="same"`` zero-pads so the output keeps the input's spatial size;
    an odd total pad puts the extra row/column on the trailing side.
    """
    W: np.ndarray  # (l, c_in, kh, kw)
    b: np.ndarray  # (l,)
    padding: str = "valid"

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 4 or min(self.W.shape) < 1:
            raise InvalidConfig(f"kernel tensor must be (l, c_in, kh, kw), got {self.W.shape}")
        if self.b.shape != (self.W.shape[0],):
            raise InvalidConfig("bias length must equal the number of kernels")
        if self.padding not in ("valid", "same"):
            raise InvalidConfig(f"unknown conv padding {self.padding!r}")

    @classmethod
    def create(cls, n_kernels, c_in, kh, kw, padding="valid", seed=None):
        layer = cls(np.zeros((n_kernels, c_in, kh, kw)), np.zeros(n_kernels), padding)
        return init_params(layer, seed)

    @property
    def params(self):
        return {"W": self.W, "b": self.b}

    def fan(self):
        l, c, kh, kw = self.W.shape
        return c * kh * kw, l * kh * kw

    def output_shape(self, H, W):
        _, _, kh, kw = self.W.shape
        if self.padding == "same":
            return H, W
        if kh > H or kw > W:
            raise KernelTooLarge(f"kernel {kh}x{kw} does not fit input {H}x{W}")
        return H - kh + 1, W - kw + 1

    def _pad(self, x):
        if self.padding == "valid":
            return x, (0, 0)
        _, _, kh, kw = self.W.shape
        top, left = (kh - 1) // 2, (kw - 1) // 2
        pads = ((0, 0), (0, 0), (top, kh - 1 - top), (left, kw - 1 - left))
        return np.pad(x, pads), (top, left)

    def forward(self, x):
        x, single = _batched(x, 4)
        N, C, H, W_ = x.shape
        l, c_in, kh, kw = self.W.shape
        if C != c_in:
            raise ShapeMismatch(f"input has {C} channels, layer expects {c_in}")
        Ho, Wo = self.output_shape(H, W_)
        xp, offset = self._pad(x)
        win = sliding_window_view(xp, (kh, kw), axis=(2, 3))  # (N, C, Ho, Wo, kh, kw)
        cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(N * Ho * Wo, C * kh * kw)
        out = cols @ self.W.reshape(l, -1).T + self.b
        out = out.reshape(N, Ho, Wo, l).transpose(0, 3, 1, 2)
        cache = {"cols": cols, "in_shape": x.shape, "padded_shape": xp.shape,
                 "offset": offset, "w_shape": self.W.shape, "out_shape": out.shape,
                 "single": single}
        return (out[0] if single else out), cache

    def backward(self, cache, grad_output):
        if cache["w_shape"] != self.W.shape:
            raise StaleCache("layer parameters changed shape since the forward pass")
        g = np.asarray(grad_output, dtype=np.float64)
        if cache["single"]:
            g = g[None]
        if g.shape != cache["out_shape"]:
            raise ShapeMismatch(f"grad_output {g.shape} != forward output {cache['out_shape']}")
        N, l, Ho, Wo = g.shape
        _, C, kh, kw = self.W.shape
        gmat = g.transpose(0, 2, 3, 1).reshape(N * Ho * Wo, l)
        gW = (gmat.T @ cache["cols"]).reshape(self.W.shape)
        gb = g.sum(axis=(0, 2, 3))
        gcols = (gmat @ self.W.reshape(l, -1)).reshape(N, Ho, Wo, C, kh, kw)
        gcols = gcols.transpose(0, 3, 4, 5, 1, 2)  # (N, C, kh, kw, Ho, Wo)
        gxp = np.zeros(cache["padded_shape"])
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + Ho, j:j + Wo] += gcols[:, :, i, j]
        _, _, H, W_ = cache["in_shape"]
        top, left = cache["offset"]
        gx = gxp[:, :, top:top + H, left:left + W_]
        if cache["single"]:
            gx = gx[0]
        return GradientBundle(np.ascontiguousarray(gx), {"W": gW, "b": gb})


@dataclass
class MaxPool2dLayer:
    """Max pooling; a window never extends past the input, so trailing windows
    and axes shorter than the pool are reduced over their actual extent."""
    pool_h: int = 2
    pool_w: int = 2
    stride_h: int = None
    stride_w: int = None

    def __post_init__(self):
        if self.pool_h < 1 or self.pool_w < 1:
            raise InvalidConfig("pool dimensions must be >= 1")
        if self.stride_h is None:
            self.stride_h = self.pool_h
        if self.stride_w is None:
            self.stride_w = self.pool_w
        if self.stride_h < 1 or self.stride_w < 1:
            raise InvalidConfig("pool stride must be >= 1")

    @property
    def params(self):
        return {}

    def _geometry(self, H, W):
        ph, pw = min(self.pool_h, H), min(self.pool_w, W)
        Ho = -(-max(H - ph, 0) // self.stride_h) + 1
        Wo = -(-max(W - pw, 0) // self.stride_w) + 1
        return ph, pw, Ho, Wo

    def output_shape(self, H, W):
        return self._geometry(H, W)[2:]

    def forward(self, x):
        x, single = _batched(x, 4)
        N, C, H, W = x.shape
        ph, pw, Ho, Wo = self._geometry(H, W)
        sh, sw = self.stride_h, self.stride_w
        Hp, Wp = (Ho - 1) * sh + ph, (Wo - 1) * sw + pw
        xp = np.pad(x, ((0, 0), (0, 0), (0, Hp - H), (0, Wp - W)), constant_values=-np.inf)
        win = sliding_window_view(xp, (ph, pw), axis=(2, 3))[:, :, ::sh, ::sw]
        win = win.reshape(N, C, Ho, Wo, ph * pw)
        local = np.argmax(win, axis=-1)  # first maximum wins ties
        out = np.take_along_axis(win, local[..., None], axis=-1)[..., 0]
        rows = np.arange(Ho)[:, None] * sh + local // pw
        cols = np.arange(Wo)[None, :] * sw + local % pw
        record = rows * W + cols  # flat index into each (H, W) plane
        cache = {"record": record, "in_shape": x.shape, "single": single}
        if single:
            return out[0], cache
        return out, cache

    def backward(self, cache, grad_output):
        g = np.asarray(grad_output, dtype=np.float64)
        if cache["single"]:
            g = g[None]
        record = cache["record"]
        if g.shape != record.shape:
            raise ShapeMismatch(f"grad_output {g.shape} != forward output {record.shape}")
        N, C, H, W = cache["in_shape"]
        plane = (np.arange(N * C).reshape(N, C, 1, 1) * (H * W) + record).ravel()
        gx = np.bincount(plane, weights=g.ravel(), minlength=N * C * H * W)
        gx = gx.reshape(N, C, H, W)
        if cache["single"]:
            gx = gx[0]
        return GradientBundle(gx, {})


@dataclass
class DenseLayer:
    W: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.W.ndim != 2 or self.b.shape != (self.W.shape[0],):
            raise InvalidConfig("dense layer needs W of shape (out, in) and b of shape (out,)")

    @classmethod
    def create(cls, n_in, n_out, seed=None):
        return init_params(cls(np.zeros((n_out, n_in)), np.zeros(n_out)), seed)

    @property
    def params(self):
        return {"W": self.W, "b": self.b}

    def fan(self):
        return self.W.shape[1], self.W.shape[0]

    def forward(self, x):
        x, single = _batched(x, 2)
        if x.shape[1] != self.W.shape[1]:
            raise ShapeMismatch(f"input length {x.shape[1]} != layer input {self.W.shape[1]}")
        out = x @ self.W.T + self.b
        cache = {"x": x, "w_shape": self.W.shape, "single": single}
        return (out[0] if single else out), cache

    def backward(self, cache, grad_output):
        if cache["w_shape"] != self.W.shape:
            raise StaleCache("layer parameters changed shape since the forward pass")
        g = np.asarray(grad_output, dtype=np.float64)
        if cache["single"]:
            g = g[None]
        x = cache["x"]
        if g.shape != (x.shape[0], self.W.shape[0]):
            raise ShapeMismatch(f"grad_output {g.shape} does not match dense output")
        gx = g @ self.W
        bundle = GradientBundle(gx[0] if cache["single"] else gx,
                                {"W": g.T @ x, "b": g.sum(axis=0)})
        return bundle


def init_params(layer, seed=None):
    """Glorot-uniform weights and zero biases, drawn from ``seed`` (int or Generator)."""
    if not hasattr(layer, "fan"):
        return layer
    rng = _as_rng(seed)
    fan_in, fan_out = layer.fan()
    layer.W = glorot_uniform(layer.W.shape, fan_in, fan_out, rng)
    layer.b = np.zeros_like(layer.b)
    return layer


def conv2d_forward(layer, x):
    return layer.forward(x)[0]


def maxpool_forward(layer, x):
    """Pooled output and the per-window argmax record."""
    out, cache = layer.forward(x)
    record = cache["record"][0] if cache["single"] else cache["record"]
    return out, record


def dense_forward(layer, x):
    return layer.forward(x)[0]


def backprop(layer, cache, grad_output):
    return layer.backward(cache, grad_output)
