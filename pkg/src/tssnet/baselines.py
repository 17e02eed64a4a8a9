"""Reference forecasters: a single-channel-image CNN and persistence."""
import numpy as np

from .errors import InvalidConfig, ShapeMismatch
from .layers import Conv2dLayer, DenseLayer, MaxPool2dLayer
from .model import ConvForecaster

PERSISTENCE_MODES = ("last-value", "seasonal")


class Cnn1dBaseline(ConvForecaster):
    """One conv over the raw (m, T) plane as a 1-channel image, one 2x2 max pool,
    then two dense layers. Kernel height defaults to m (spans every feature)."""
    kind = "cnn1d"

    def __init__(self, m, T, h, kernel_height=None, kernel_width=3, n_kernels=None,
                 hidden_multiplier=2, seed=0):
        kernel_height = m if kernel_height is None else kernel_height
        n_kernels = m if n_kernels is None else n_kernels
        if min(m, T, h, kernel_height, kernel_width, n_kernels, hidden_multiplier) < 1:
            raise InvalidConfig("all dimensions must be >= 1")
        if kernel_height > m or kernel_width > T:
            raise InvalidConfig(f"kernel {kernel_height}x{kernel_width} does not fit ({m}, {T})")
        self.m, self.T, self.h = m, T, h
        self.kernel_height, self.kernel_width = kernel_height, kernel_width
        self.n_kernels = n_kernels
        self.hidden_multiplier = hidden_multiplier
        self.seed = seed
        rng = np.random.default_rng(seed)
        conv1 = Conv2dLayer.create(n_kernels, 1, kernel_height, kernel_width, "valid", rng)
        pool1 = MaxPool2dLayer(2, 2)
        H, W = pool1.output_shape(*conv1.output_shape(m, T))
        hidden = hidden_multiplier * m * h
        self.layers = [("conv1", conv1), ("pool1", pool1),
                       ("fc1", DenseLayer.create(n_kernels * H * W, hidden, rng)),
                       ("out", DenseLayer.create(hidden, m * h, rng))]

    def _image(self, x):
        return x[:, None]

    def arch(self):
        return {"kind": self.kind, "m": self.m, "T": self.T, "h": self.h,
                "kernel_height": self.kernel_height, "kernel_width": self.kernel_width,
                "n_kernels": self.n_kernels, "hidden_multiplier": self.hidden_multiplier,
                "seed": self.seed}

    @classmethod
    def from_arch(cls, arch):
        return cls(arch["m"], arch["T"], arch["h"], arch["kernel_height"], arch["kernel_width"],
                   arch["n_kernels"], arch["hidden_multiplier"], arch["seed"])


def build_cnn1d(m, T, h, kernel_height=None, kernel_width=3, n_kernels=None,
                hidden_multiplier=2, seed=0):
    return Cnn1dBaseline(m, T, h, kernel_height, kernel_width, n_kernels, hidden_multiplier, seed)


def persistence_predict(x, h, mode="last-value", period=None):
    """Repeat the last column (``last-value``) or tile the last ``period`` columns."""
    from .data import SeriesMatrix

    if isinstance(x, SeriesMatrix):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    T = x.shape[-1]
    if h < 1 or T < 1:
        raise InvalidConfig("h and T must be >= 1")
    if mode == "last-value":
        return np.repeat(x[..., -1:], h, axis=-1)
    if mode == "seasonal":
        if period is None or period < 1 or period > T:
            raise InvalidConfig(f"seasonal period {period} invalid for T={T}")
        idx = T - period + np.arange(h) % period
        return x[..., idx]
    raise InvalidConfig(f"unknown persistence mode {mode!r}")


class PersistenceForecaster:
    """Parameter-free model wrapper so persistence plugs into evaluation and checkpoints."""
    kind = "persistence"

    def __init__(self, m, T, h, mode="last-value", period=None):
        if mode not in PERSISTENCE_MODES:
            raise InvalidConfig(f"unknown persistence mode {mode!r}")
        if mode == "seasonal" and (period is None or not 1 <= period <= T):
            raise InvalidConfig(f"seasonal period {period} invalid for T={T}")
        self.m, self.T, self.h = m, T, h
        self.mode, self.period = mode, period
        self.layers = []

    def params(self):
        return {}

    def set_params(self, values):
        if values:
            raise ShapeMismatch("persistence has no parameters")

    def forward(self, x, capture=False):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-2:] != (self.m, self.T):
            raise ShapeMismatch(f"expected input ({self.m}, {self.T}), got {x.shape[-2:]}")
        return persistence_predict(x, self.h, self.mode, self.period)

    predict = forward

    def arch(self):
        return {"kind": self.kind, "m": self.m, "T": self.T, "h": self.h,
                "mode": self.mode, "period": self.period}

    @classmethod
    def from_arch(cls, arch):
        return cls(arch["m"], arch["T"], arch["h"], arch["mode"], arch["period"])
