"""Series ingestion, scaling, chronological splits, windowing, synthetic series and ACF."""
import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (DegenerateSample, EmptyFile, InvalidConfig, IoError, ParseError,
                     TooShort)

SCALING_METHODS = ("none", "max-abs", "min-max", "z-score")
SYNTH_FUNCTIONS = ("sine", "sine-plus-linear", "x-times-sine", "sine-plus-half-linear")


@dataclass
class Scaler:
    """Per-feature affine map ``(v - center) / scale``."""
    method: str
    center: np.ndarray
    scale: np.ndarray

    def transform(self, values):
        values = np.asarray(values, dtype=np.float64)
        return (values - self.center[:, None]) / self.scale[:, None]

    def inverse(self, values):
        values = np.asarray(values, dtype=np.float64)
        return values * self.scale[:, None] + self.center[:, None]

    def to_dict(self):
        return {"method": self.method, "center": self.center.tolist(),
                "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["method"], np.asarray(d["center"], dtype=np.float64),
                   np.asarray(d["scale"], dtype=np.float64))


@dataclass
class SeriesMatrix:
    """An (m, T) multivariate series: rows are features, columns are time steps."""
    values: np.ndarray
    names: list = None
    scaler: Scaler = None

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise InvalidConfig(f"series must be a non-empty (m, T) matrix, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidConfig("series contains non-finite values")
        if self.names is None:
            self.names = [f"f{i}" for i in range(self.m)]
        if len(self.names) != self.m:
            raise InvalidConfig("one name per feature row required")

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def T(self):
        return self.values.shape[1]

    def with_values(self, values):
        return replace(self, values=values, names=list(self.names))

    def columns(self, start, stop):
        return self.with_values(self.values[:, start:stop].copy())


@dataclass
class WindowedDataset:
    inputs: np.ndarray   # (n, m, T_in)
    targets: np.ndarray  # (n, m, h)
    origins: np.ndarray  # (n,) first input column in the source series

    def __len__(self):
        return len(self.inputs)

    def subset(self, idx):
        return WindowedDataset(self.inputs[idx], self.targets[idx], self.origins[idx])


@dataclass(frozen=True)
class SynthSpec:
    function: str = "sine"
    length: int = 2000
    step: float = 2 * math.pi / 24
    alpha: float = 0.0
    seed: int = 0
    slope: float = 1.0
    # extra rows are phase-shifted copies with independent noise
    features: int = 1

    def __post_init__(self):
        if self.function not in SYNTH_FUNCTIONS:
            raise InvalidConfig(f"function must be one of {SYNTH_FUNCTIONS}")
        if self.length < 2:
            raise InvalidConfig("length must be >= 2")
        if self.alpha < 0:
            raise InvalidConfig("noise ratio alpha must be >= 0")
        if self.step <= 0 or self.features < 1:
            raise InvalidConfig("step must be > 0 and features >= 1")


def load_csv(path, has_header=True, delimiter=",", columns=None, comment="#"):
    """Read a CSV with one row per time step into an (m, T) ``SeriesMatrix``.

    ``columns`` selects features by header name or 0-based index. Lines starting
    with ``comment`` and blank lines are skipped. Parse errors carry the 1-based
    file line and column.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            lines = list(enumerate(csv.reader(fh, delimiter=delimiter), start=1))
    except OSError as exc:
        raise IoError(str(exc)) from exc
    lines = [(n, row) for n, row in lines
             if row and any(c.strip() for c in row) and not row[0].lstrip().startswith(comment)]
    if not lines:
        raise EmptyFile(f"{path} has no rows")
    if has_header:
        header = [c.strip() for c in lines[0][1]]
        lines = lines[1:]
    else:
        header = [f"f{i}" for i in range(len(lines[0][1]))] if lines else []
    if not lines:
        raise EmptyFile(f"{path} has no data rows")
    width = len(header)
    if columns is None:
        picks = list(range(width))
    else:
        picks = []
        for c in columns:
            if isinstance(c, str) and c in header:
                picks.append(header.index(c))
            else:
                try:
                    idx = int(c)
                except ValueError:
                    raise InvalidConfig(f"unknown column {c!r}") from None
                if not 0 <= idx < width:
                    raise InvalidConfig(f"column index {idx} out of range")
                picks.append(idx)
    data = np.empty((len(lines), len(picks)))
    for r, (lineno, row) in enumerate(lines):
        if len(row) != width:
            raise ParseError(lineno, min(len(row), width) + 1, f"expected {width} fields")
        for j, c in enumerate(picks):
            try:
                data[r, j] = float(row[c])
            except ValueError:
                raise ParseError(lineno, c + 1, f"non-numeric value {row[c]!r}") from None
            if not math.isfinite(data[r, j]):
                raise ParseError(lineno, c + 1, "non-finite value")
    return SeriesMatrix(data.T.copy(), [header[c] for c in picks])


def write_csv(path, header, rows, comments=None):
    """Comma-separated, LF line endings, optional leading ``# `` comment lines."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in comments or ():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(v):
    # numpy scalars repr as np.float64(...) under numpy 2; write plain shortest round-trip text
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def save_csv(x, path, comments=None):
    """Export a series in the same one-row-per-time-step schema ``load_csv`` reads."""
    write_csv(path, x.names, (list(map(float, col)) for col in x.values.T), comments)


def fit_scaler(values, method="max-abs"):
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[0]
    center = np.zeros(m)
    scale = np.ones(m)
    if method == "max-abs":
        scale = np.abs(values).max(axis=1)
    elif method == "min-max":
        center = values.min(axis=1)
        scale = values.max(axis=1) - center
    elif method == "z-score":
        center = values.mean(axis=1)
        scale = values.std(axis=1)
    elif method != "none":
        raise InvalidConfig(f"scaling method must be one of {SCALING_METHODS}")
    scale = np.where(scale == 0, 1.0, scale)
    return Scaler(method, center, scale)


def scale(x, method="max-abs", fit_range=None):
    """Scale every feature; statistics come only from columns ``fit_range=(start, stop)``."""
    start, stop = fit_range if fit_range is not None else (0, x.T)
    scaler = fit_scaler(x.values[:, start:stop], method)
    return SeriesMatrix(scaler.transform(x.values), list(x.names), scaler)


def inverse_scale(x):
    if x.scaler is None:
        return x.with_values(x.values.copy())
    return SeriesMatrix(x.scaler.inverse(x.values), list(x.names), None)


def split_lengths(T, ratios=(0.6, 0.2, 0.2)):
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or not math.isclose(sum(ratios), 1.0):
        raise InvalidConfig("ratios must be three positive numbers summing to 1")
    n_train = math.floor(ratios[0] * T)
    n_valid = math.floor(ratios[1] * T)
    n_test = T - n_train - n_valid
    if min(n_train, n_valid, n_test) < 1:
        raise TooShort(f"T={T} too short for a {ratios} split")
    return n_train, n_valid, n_test


def split_chronological(x, ratios=(0.6, 0.2, 0.2)):
    """Contiguous train/valid/test cuts; floors for train and valid, remainder to test."""
    n_train, n_valid, _ = split_lengths(x.T, ratios)
    a, b = n_train, n_train + n_valid
    return x.columns(0, a), x.columns(a, b), x.columns(b, x.T)


def make_windows(x, T_in, h, sample_stride=1):
    """Supervised pairs: input columns [j*stride, j*stride+T_in), target the next h."""
    values = x.values if isinstance(x, SeriesMatrix) else np.asarray(x, dtype=np.float64)
    T = values.shape[1]
    if T_in < 1 or h < 1 or sample_stride < 1:
        raise InvalidConfig("T_in, h and sample_stride must be >= 1")
    if T_in + h > T:
        raise TooShort(f"series of length {T} cannot hold input {T_in} + horizon {h}")
    win = sliding_window_view(values, T_in + h, axis=1)[:, ::sample_stride]
    win = np.ascontiguousarray(win.transpose(1, 0, 2))
    origins = np.arange(win.shape[0]) * sample_stride
    return WindowedDataset(win[:, :, :T_in].copy(), win[:, :, T_in:].copy(), origins)


def synth_generate(spec):
    """Univariate (or phase-shifted multivariate) function series with phase noise."""
    rng = np.random.default_rng(spec.seed)
    x = np.arange(spec.length) * spec.step
    rows = []
    for j in range(spec.features):
        eps = rng.standard_normal(spec.length)
        phase = x + j * math.pi / spec.features + spec.alpha * eps
        s = np.sin(phase)
        if spec.function == "sine":
            y = s
        elif spec.function == "sine-plus-linear":
            y = s + spec.slope * x
        elif spec.function == "x-times-sine":
            y = x * s
        else:
            y = s + 0.5 * spec.slope * x
        rows.append(y)
    names = [spec.function] if spec.features == 1 else [f"{spec.function}{j}" for j in range(spec.features)]
    return SeriesMatrix(np.vstack(rows), names)


def acf(series, max_lag):
    """Sample autocorrelation r(0..max_lag), normalised by the lag-0 sum of squares."""
    y = np.asarray(series, dtype=np.float64).ravel()
    T = y.size
    if not 0 <= max_lag < T:
        raise InvalidConfig(f"max_lag must be in [0, {T})")
    d = y - y.mean()
    denom = float(np.dot(d, d))
    if np.ptp(y) == 0 or denom == 0:
        raise DegenerateSample("constant series has no autocorrelation")
    r = np.array([np.dot(d[:T - k], d[k:]) for k in range(max_lag + 1)]) / denom
    r[0] = 1.0
    return r


def save_acf(r, path, comments=None):
    write_csv(path, ["lag", "r"], ((k, float(v)) for k, v in enumerate(r)), comments)


def to_pgm_bytes(image):
    """8-bit binary PGM, min-max mapped to 0-255 (a constant image renders black)."""
    image = np.asarray(image, dtype=np.float64)
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        pix = np.round((image - lo) / (hi - lo) * 255.0)
    else:
        pix = np.zeros_like(image)
    rows, cols = image.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pix.astype(np.uint8).tobytes()


def export_feature_maps(maps, directory, prefix="featuremap", comments=None):
    """One CSV matrix and one PGM per kernel; returns the written paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, fmap in enumerate(maps):
        fmap = np.asarray(fmap, dtype=np.float64)
        csv_path = directory / f"{prefix}_k{i}.csv"
        header = [f"slice{j}" for j in range(fmap.shape[1])]
        write_csv(csv_path, header, ([float(v) for v in row] for row in fmap), comments)
        pgm_path = directory / f"{prefix}_k{i}.pgm"
        pgm_path.write_bytes(to_pgm_bytes(fmap))
        paths += [csv_path, pgm_path]
    return paths
