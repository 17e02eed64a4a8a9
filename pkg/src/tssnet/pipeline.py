"""Run configuration plus the end-to-end steps shared by the CLI and demos."""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

from .baselines import Cnn1dBaseline, PersistenceForecaster
from .data import (SCALING_METHODS, SynthSpec, fit_scaler, load_csv, make_windows,
                   split_lengths, synth_generate)
from .errors import InvalidConfig
from .metrics import CORR_VARIANTS, evaluate_model
from .model import TssNetModel
from .training import SearchSpace, TrainConfig, train
from .transform import TemporalTensorConfig

MODELS = ("tssnet", "cnn1d", "persistence")


@dataclass(frozen=True)
class RunConfig:
    # data
    dataset: str = "synthetic"
    data_path: str = ""  # empty: generate the synthetic series below
    has_header: bool = True
    delimiter: str = ","
    columns: str = ""  # comma-separated names or 0-based indices; empty keeps all
    synth_function: str = "sine"
    synth_length: int = 2000
    synth_period: float = 24.0  # x advances 2*pi/period per step
    synth_alpha: float = 0.0
    synth_slope: float = 1.0
    synth_features: int = 1
    scaling: str = "max-abs"
    # windows
    input_length: int = 96
    horizon: int = 24
    sample_stride: int = 1
    split: str = "test"
    # transform
    window: int = 8
    stride: int = 2
    dilation: int = 1
    padding: int = 0
    padding_mode: str = "edge"
    local_mean_k: int = 1
    slice_formula: str = "conservative"
    # model
    model: str = "tssnet"
    kernel_width: int = 3
    kernel_height_mode: str = "full-stack"
    kernel_height: int = 3
    hidden_multiplier: int = 2
    cnn_kernel_height: int = 0  # 0: span all features
    cnn_kernel_width: int = 3
    persistence_mode: str = "last-value"
    persistence_period: int = 24
    # training
    optimizer: str = "adam"
    lr: float = 0.005
    clip: float = 10.0
    batch_size: int = 32
    epochs: int = 100
    patience: int = 20  # 0 disables early stopping
    seed: int = 0
    corr_variant: str = "pearson"
    # studies
    search_budget: int = 100
    search_window_min: int = 5
    search_window_max: int = 10
    search_stride_min: int = 1
    search_stride_max: int = 5
    search_lr_min: float = 1e-4
    search_lr_max: float = 0.01
    sweep_inputs: str = "32,64,128,256"
    sweep_horizons: str = "15,30,60,120"
    acf_max_lag: int = 48
    featuremap_sample: int = -1  # index into the evaluation split's windows
    gradcheck_eps: float = 1e-5
    jobs: int = 1

    def __post_init__(self):
        # construct the component configs so every constraint fails at parse time
        self.transform_config()
        self.train_config()
        self.search_space()
        if not self.data_path:
            self.synth_spec()
        if self.scaling not in SCALING_METHODS:
            raise InvalidConfig(f"scaling must be one of {SCALING_METHODS}")
        if self.model not in MODELS:
            raise InvalidConfig(f"model must be one of {MODELS}")
        if self.corr_variant not in CORR_VARIANTS:
            raise InvalidConfig(f"corr_variant must be one of {CORR_VARIANTS}")
        if self.split not in ("train", "valid", "test"):
            raise InvalidConfig("split must be train, valid or test")
        if min(self.input_length, self.horizon, self.sample_stride, self.jobs) < 1:
            raise InvalidConfig("input_length, horizon, sample_stride and jobs must be >= 1")
        if self.gradcheck_eps <= 0:
            raise InvalidConfig("gradcheck_eps must be > 0")
        if self.acf_max_lag < 0:
            raise InvalidConfig("acf_max_lag must be >= 0")
        self.sweep_grid()

    @classmethod
    def keys(cls):
        return {f.name: f for f in fields(cls)}

    @classmethod
    def parse(cls, text="", overrides=()):
        """Build from ``key = value`` lines (``#`` comments) and ``key=value`` overrides."""
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"config line {lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            raw[key] = value
        for item in overrides:
            if "=" not in item:
                raise InvalidConfig(f"override {item!r}: expected key=value")
            key, value = (p.strip() for p in item.split("=", 1))
            raw[key] = value
        known = cls.keys()
        values = {}
        for key, value in raw.items():
            if key not in known:
                raise InvalidConfig(f"unknown config key {key!r}")
            values[key] = _coerce(key, value, type(known[key].default))
        return cls(**values)

    def lines(self):
        return [f"{f.name} = {_render(getattr(self, f.name))}" for f in fields(self)]

    def transform_config(self):
        return TemporalTensorConfig(self.window, self.stride, self.dilation, self.padding,
                                    self.padding_mode, self.local_mean_k, self.slice_formula)

    def train_config(self):
        return TrainConfig(self.optimizer, self.lr, self.clip, self.batch_size, self.epochs,
                           self.patience or None, self.seed)

    def search_space(self):
        return SearchSpace((self.search_window_min, self.search_window_max),
                           (self.search_stride_min, self.search_stride_max),
                           (self.search_lr_min, self.search_lr_max), self.search_budget, self.seed)

    def synth_spec(self):
        if self.synth_period <= 0:
            raise InvalidConfig("synth_period must be > 0")
        return SynthSpec(self.synth_function, self.synth_length, 2 * math.pi / self.synth_period,
                         self.synth_alpha, self.seed, self.synth_slope, self.synth_features)

    def sweep_grid(self):
        try:
            inputs = [int(v) for v in self.sweep_inputs.split(",") if v.strip()]
            horizons = [int(v) for v in self.sweep_horizons.split(",") if v.strip()]
        except ValueError:
            raise InvalidConfig("sweep_inputs/sweep_horizons must be comma-separated integers") from None
        if not inputs or not horizons or min(inputs + horizons) < 1:
            raise InvalidConfig("sweep grid must be non-empty positive integers")
        return inputs, horizons


def _coerce(key, value, kind):
    try:
        if kind is bool:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        return kind(value)
    except ValueError:
        raise InvalidConfig(f"{key}: cannot read {value!r} as {kind.__name__}") from None


def _render(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def load_series(cfg):
    """Raw (unscaled) series named by the config."""
    if cfg.data_path:
        cols = [c.strip() for c in cfg.columns.split(",") if c.strip()] or None
        return load_csv(cfg.data_path, cfg.has_header, cfg.delimiter, cols)
    return synth_generate(cfg.synth_spec())


@dataclass
class Prepared:
    series: object   # scaled SeriesMatrix
    scaler: object
    train: object    # WindowedDataset per split
    valid: object
    test: object

    def split(self, name):
        return getattr(self, name)


def prepare(cfg, series, input_length=None, horizon=None, scaler=None):
    """Fit the scaler on the training span, scale, split chronologically, window each split."""
    T_in = input_length or cfg.input_length
    h = horizon or cfg.horizon
    n_train, n_valid, _ = split_lengths(series.T)
    if scaler is None:
        scaler = fit_scaler(series.values[:, :n_train], cfg.scaling)
    scaled = series.with_values(scaler.transform(series.values))
    scaled.scaler = scaler
    bounds = [(0, n_train), (n_train, n_train + n_valid), (n_train + n_valid, series.T)]
    windows = [make_windows(scaled.values[:, a:b], T_in, h, cfg.sample_stride) for a, b in bounds]
    return Prepared(scaled, scaler, *windows)


def build_model(cfg, m, input_length=None, horizon=None, seed=None, kind=None):
    T = input_length or cfg.input_length
    h = horizon or cfg.horizon
    seed = cfg.seed if seed is None else seed
    kind = kind or cfg.model
    if kind == "tssnet":
        return TssNetModel(m, T, h, cfg.transform_config(), cfg.kernel_width,
                           cfg.kernel_height_mode, cfg.kernel_height, cfg.hidden_multiplier, seed)
    if kind == "cnn1d":
        return Cnn1dBaseline(m, T, h, cfg.cnn_kernel_height or None, cfg.cnn_kernel_width,
                             None, cfg.hidden_multiplier, seed)
    return PersistenceForecaster(m, T, h, cfg.persistence_mode,
                                 cfg.persistence_period if cfg.persistence_mode == "seasonal" else None)


def fit(cfg, data, model=None):
    """Train the configured model on ``data`` (a :class:`Prepared`)."""
    model = model or build_model(cfg, data.series.m)
    return train(model, data.train, data.valid, cfg.train_config())


def _sweep_cell(args):
    cfg, series, T_in, h = args
    data = prepare(cfg, series, T_in, h)
    model, _ = fit(cfg, data, build_model(cfg, series.m, T_in, h))
    return evaluate_model(model, data.split(cfg.split), cfg.corr_variant, cfg.dataset,
                          replace(cfg, input_length=T_in, horizon=h).lines())


def run_sweep(cfg, series, jobs=1):
    """Train and score one model per (input length, horizon) cell, in grid order."""
    inputs, horizons = cfg.sweep_grid()
    tasks = [(cfg, series, T_in, h) for T_in in inputs for h in horizons]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_cell, tasks))
    return [_sweep_cell(t) for t in tasks]
