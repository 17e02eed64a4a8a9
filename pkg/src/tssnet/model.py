"""TSSNet: slicing transform, two conv+pool blocks, two dense layers, no activations."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, ShapeMismatch
from .layers import Conv2dLayer, DenseLayer, MaxPool2dLayer
from .transform import TemporalTensorConfig, slice_count, slice_stack

KERNEL_HEIGHT_MODES = ("full-stack", "fixed")
PREDICT_CHUNK = 256


class ConvForecaster:
    """Shared forward/backward plumbing for the stateless conv forecasters.

    Subclasses set ``self.m``, ``self.h`` and ``self.layers`` (an ordered list of
    ``(name, layer)`` pairs, conv/pool blocks first, then dense layers) and
    implement ``_image`` to turn an (N, m, T) batch into the first conv input.
    """

    def _image(self, x):
        raise NotImplementedError

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 2
        if single:
            x = x[None]
        if x.ndim != 3 or x.shape[1:] != (self.m, self.T):
            raise ShapeMismatch(f"expected input ({self.m}, {self.T}), got {x.shape[-2:]}")
        return x, single

    def params(self):
        """Flat ``{"layer.param": array}`` view; arrays are the live layer storage."""
        out = {}
        for name, layer in self.layers:
            for pname, arr in layer.params.items():
                out[f"{name}.{pname}"] = arr
        return out

    def set_params(self, values):
        for name, layer in self.layers:
            for pname in layer.params:
                key = f"{name}.{pname}"
                arr = np.asarray(values[key], dtype=np.float64)
                if arr.shape != getattr(layer, pname).shape:
                    raise ShapeMismatch(f"{key}: shape {arr.shape} != {getattr(layer, pname).shape}")
                setattr(layer, pname, arr.copy())

    def _run(self, x):
        caches = []
        z = self._image(x)
        conv1_out = None
        for name, layer in self.layers:
            if isinstance(layer, DenseLayer) and z.ndim > 2:
                caches.append(("flatten", z.shape))
                z = z.reshape(z.shape[0], -1)
            z, cache = layer.forward(z)
            caches.append((name, cache))
            if name == "conv1":
                conv1_out = z
        yhat = z.reshape(z.shape[0], self.m, self.h)
        return yhat, caches, conv1_out

    def forward(self, x, capture=False):
        """Predict an (m, h) block per (m, T) input; batches keep their leading axis.

        With ``capture`` the post-conv1 activations come back as a second value.
        """
        x, single = self._check_input(x)
        yhat, _, conv1 = self._run(x)
        if single:
            yhat, conv1 = yhat[0], conv1[0]
        if capture:
            return yhat, self._feature_maps(conv1)
        return yhat

    def _feature_maps(self, conv1):
        return conv1

    def predict(self, x):
        """Batched forward in fixed-size chunks, so results do not depend on caller batching."""
        x, single = self._check_input(x)
        out = np.concatenate([self._run(x[i:i + PREDICT_CHUNK])[0]
                              for i in range(0, len(x), PREDICT_CHUNK)])
        return out[0] if single else out

    def loss_and_grads(self, x, y):
        """Batch-mean squared Frobenius loss and its gradient for every parameter."""
        from .optim import frobenius_loss

        x, _ = self._check_input(x)
        y = np.asarray(y, dtype=np.float64).reshape(len(x), self.m, self.h)
        yhat, caches, _ = self._run(x)
        n = len(x)
        loss, g = frobenius_loss(y, yhat)
        loss, g = loss / n, g / n
        g = g.reshape(n, -1)
        grads = {}
        layer_map = dict(self.layers)
        for name, cache in reversed(caches):
            if name == "flatten":
                g = g.reshape(cache)
                continue
            bundle = layer_map[name].backward(cache, g)
            g = bundle.grad_input
            for pname, arr in bundle.grads.items():
                grads[f"{name}.{pname}"] = arr
        return loss, grads

    def n_params(self):
        return sum(a.size for a in self.params().values())


@dataclass
class FeatureMaps:
    """Post-conv1 activations, one 2D map per kernel: ``maps[kernel, window_pos, slice]``."""
    maps: np.ndarray

    @property
    def shape(self):
        return self.maps.shape[1:]

    def __len__(self):
        return self.maps.shape[0]

    def __getitem__(self, i):
        return self.maps[i]


class TssNetModel(ConvForecaster):
    """Conv input is laid out (channel=feature, height=slice, width=window
    position), so a full-stack kernel spans every slice and conv1 emits a single
    row. Captured feature maps are transposed back to (window, slice).
    """
    kind = "tssnet"

    def __init__(self, m, T, h, transform_cfg, k=3, kernel_height_mode="full-stack",
                 kernel_height=3, hidden_multiplier=2, seed=0):
        if kernel_height_mode not in KERNEL_HEIGHT_MODES:
            raise InvalidConfig(f"kernel_height_mode must be one of {KERNEL_HEIGHT_MODES}")
        if min(m, T, h, k, kernel_height) < 1:
            raise InvalidConfig("m, T, h, k and kernel_height must be >= 1")
        if hidden_multiplier < 1:
            raise InvalidConfig("hidden_multiplier must be >= 1")
        if k > transform_cfg.window:
            raise InvalidConfig(f"kernel width k={k} exceeds window {transform_cfg.window}")
        self.m, self.T, self.h = m, T, h
        self.transform_cfg = transform_cfg
        self.k = k
        self.kernel_height_mode = kernel_height_mode
        self.kernel_height = kernel_height
        self.hidden_multiplier = hidden_multiplier
        self.seed = seed
        self.o = slice_count(transform_cfg, T)
        self.layers = self._build(np.random.default_rng(seed))

    def _build(self, rng):
        m, o, omega, k = self.m, self.o, self.transform_cfg.window, self.k
        if self.kernel_height_mode == "full-stack":
            conv1 = Conv2dLayer.create(m, m, o, k, "valid", rng)
        else:
            conv1 = Conv2dLayer.create(m, m, self.kernel_height, k, "same", rng)
        pool1 = MaxPool2dLayer(2, 2)
        H, W = pool1.output_shape(*conv1.output_shape(o, omega))
        if self.kernel_height_mode == "full-stack":
            # degenerate extent: the kernel shrinks to whatever survived pooling
            conv2 = Conv2dLayer.create(m, m, H, min(k, W), "valid", rng)
        else:
            conv2 = Conv2dLayer.create(m, m, self.kernel_height, k, "same", rng)
        pool2 = MaxPool2dLayer(2, 2)
        H, W = pool2.output_shape(*conv2.output_shape(H, W))
        hidden = self.hidden_multiplier * m * self.h
        fc1 = DenseLayer.create(m * H * W, hidden, rng)
        out = DenseLayer.create(hidden, m * self.h, rng)
        return [("conv1", conv1), ("pool1", pool1), ("conv2", conv2),
                ("pool2", pool2), ("fc1", fc1), ("out", out)]

    def _image(self, x):
        return np.ascontiguousarray(slice_stack(x, self.transform_cfg).transpose(0, 1, 3, 2))

    def _feature_maps(self, conv1):
        return FeatureMaps(np.swapaxes(conv1, -1, -2))

    def arch(self):
        cfg = self.transform_cfg
        return {
            "kind": self.kind, "m": self.m, "T": self.T, "h": self.h,
            "window": cfg.window, "stride": cfg.stride, "dilation": cfg.dilation,
            "padding": cfg.padding, "padding_mode": cfg.padding_mode,
            "local_mean_k": cfg.local_mean_k, "formula": cfg.formula,
            "k": self.k, "kernel_height_mode": self.kernel_height_mode,
            "kernel_height": self.kernel_height, "hidden_multiplier": self.hidden_multiplier,
            "seed": self.seed,
        }

    @classmethod
    def from_arch(cls, arch):
        cfg = TemporalTensorConfig(arch["window"], arch["stride"], arch["dilation"],
                                   arch["padding"], arch["padding_mode"],
                                   arch["local_mean_k"], arch["formula"])
        return cls(arch["m"], arch["T"], arch["h"], cfg, arch["k"], arch["kernel_height_mode"],
                   arch["kernel_height"], arch["hidden_multiplier"], arch["seed"])


def build_tssnet(m, T, h, transform_cfg, k=3, kernel_height_mode="full-stack",
                 kernel_height=3, hidden_multiplier=2, seed=0):
    return TssNetModel(m, T, h, transform_cfg, k, kernel_height_mode, kernel_height,
                       hidden_multiplier, seed)


def forward(model, x, capture=False):
    return model.forward(x, capture=capture)


def capture_feature_maps(model, x):
    """Post-conv1 activation maps for a single (m, T) input."""
    return model.forward(x, capture=True)[1]
