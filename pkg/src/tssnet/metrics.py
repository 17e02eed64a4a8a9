"""RMSE and empirical correlation over stacked (n, m, h) forecasts."""
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllDegenerate, EmptyInput, ShapeMismatch

CORR_VARIANTS = ("pearson", "paper-literal")
REPORT_COLUMNS = ("dataset", "model", "T", "h", "omega", "s", "rmse", "corr",
                  "corr_variant", "seed")


def _stacked(y, yhat):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ShapeMismatch(f"target {y.shape} vs prediction {yhat.shape}")
    if y.ndim == 2:
        y, yhat = y[None], yhat[None]
    if y.ndim != 3:
        raise ShapeMismatch(f"expected (n, m, h) arrays, got {y.shape}")
    if y.shape[0] == 0:
        raise EmptyInput("no samples")
    return y.reshape(len(y), -1), yhat.reshape(len(yhat), -1)


def rmse(y, yhat):
    """Mean over samples of the per-sample root of summed squared errors."""
    y, yhat = _stacked(y, yhat)
    return float(np.mean(np.sqrt(np.sum((y - yhat) ** 2, axis=1))))


def corr_details(y, yhat, variant="pearson"):
    """Return ``(corr, n_skipped)``; constant samples are skipped, not zero-filled."""
    if variant not in CORR_VARIANTS:
        raise ValueError(f"corr variant must be one of {CORR_VARIANTS}")
    y, yhat = _stacked(y, yhat)
    values = []
    for yi, pi in zip(y, yhat):
        if np.ptp(yi) == 0 or np.ptp(pi) == 0:
            continue
        a = yi - yi.mean()
        b = pi - pi.mean()
        if variant == "pearson":
            den = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
        else:
            den = math.sqrt(float(np.sum((a * b) ** 2)))
        if den == 0.0:
            continue
        r = float(np.dot(a, b)) / den
        if variant == "pearson":
            r = min(1.0, max(-1.0, r))
        values.append(r)
    if not values:
        raise AllDegenerate("every sample is constant in target or prediction")
    return float(np.mean(values)), len(y) - len(values)


def corr(y, yhat, variant="pearson"):
    return corr_details(y, yhat, variant)[0]


def config_fingerprint(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class EvalReport:
    rmse: float
    corr: float
    corr_variant: str
    n: int
    m: int
    h: int
    n_degenerate: int = 0
    fingerprint: str = ""
    labels: dict = field(default_factory=dict)

    def row(self):
        values = dict(self.labels)
        values.update(rmse=self.rmse, corr=self.corr, corr_variant=self.corr_variant,
                      h=self.h)
        return [values.get(c, "") for c in REPORT_COLUMNS]

    def csv_row(self):
        return ",".join(_fmt(v) for v in self.row())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def model_labels(model, dataset_name="", seed=None):
    arch = model.arch() if hasattr(model, "arch") else {}
    return {"dataset": dataset_name, "model": getattr(model, "kind", type(model).__name__),
            "T": arch.get("T", ""), "omega": arch.get("window", ""),
            "s": arch.get("stride", ""), "seed": arch.get("seed", "") if seed is None else seed}


def evaluate_model(model, dataset, variant="pearson", dataset_name="", config=None):
    """Forecast every window of ``dataset`` and score the stacked predictions."""
    if len(dataset) == 0:
        raise EmptyInput("dataset has no windows")
    yhat = model.predict(dataset.inputs)
    score = rmse(dataset.targets, yhat)
    try:
        c, skipped = corr_details(dataset.targets, yhat, variant)
    except AllDegenerate:
        c, skipped = float("nan"), len(dataset)
    n, m, h = dataset.targets.shape
    fp = config_fingerprint(config if config is not None else model.arch())
    return EvalReport(score, c, variant, n, m, h, skipped, fp,
                      model_labels(model, dataset_name))
