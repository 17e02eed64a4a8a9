"""Training loop, random hyperparameter search, gradient audit and checkpoints."""
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import Cnn1dBaseline, PersistenceForecaster
from .data import Scaler, write_csv
from .errors import (AllDegenerate, AllTrialsFailed, CorruptCheckpoint, EmptyInput,
                     InvalidConfig, IoError, NonFiniteLoss, ShapeMismatch, TssNetError,
                     VersionMismatch)
from .metrics import corr_details, rmse
from .model import TssNetModel
from .optim import AdamState, adam_step, clip_gradients, global_norm, sgd_step
from .transform import TemporalTensorConfig

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = "tssnet-ckpt-1"
MODEL_KINDS = {cls.kind: cls for cls in (TssNetModel, Cnn1dBaseline, PersistenceForecaster)}
LR_MAX = 0.01


@dataclass(frozen=True)
class TrainConfig:
    optimizer: str = "adam"
    lr: float = 0.001
    clip: float = 10.0
    batch_size: int = 32
    epochs: int = 100
    patience: int = None  # epochs without validation improvement; None disables
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in ("adam", "sgd"):
            raise InvalidConfig("optimizer must be 'adam' or 'sgd'")
        if not 0 < self.lr <= LR_MAX:
            raise InvalidConfig(f"lr must lie in (0, {LR_MAX}], got {self.lr}")
        if self.clip <= 0:
            raise InvalidConfig("clip threshold must be > 0")
        if self.batch_size < 1 or self.epochs < 1:
            raise InvalidConfig("batch_size and epochs must be >= 1")
        if self.patience is not None and self.patience < 1:
            raise InvalidConfig("patience must be >= 1")


@dataclass
class History:
    records: list = field(default_factory=list)  # dicts: epoch, train_loss, valid_corr, valid_rmse
    best_epoch: int = None
    clip_norms: list = field(default_factory=list)  # post-clip global norm per step

    @property
    def best(self):
        for r in self.records:
            if r["epoch"] == self.best_epoch:
                return r
        return None

    def save(self, path, comments=None):
        rows = ([r["epoch"], r["train_loss"], r["valid_corr"], r["valid_rmse"]]
                for r in self.records)
        write_csv(path, ["epoch", "train_loss", "valid_corr", "valid_rmse"], rows, comments)


def validation_scores(model, dataset):
    """(pearson corr, rmse) on ``dataset``; corr is NaN when every sample is constant."""
    yhat = model.predict(dataset.inputs)
    try:
        c = corr_details(dataset.targets, yhat, "pearson")[0]
    except AllDegenerate:
        c = float("nan")
    return c, rmse(dataset.targets, yhat)


def _better(c, best):
    if math.isnan(c):
        return best is None
    return best is None or math.isnan(best) or c > best


def train(model, train_set, valid_set=None, cfg=TrainConfig()):
    """Mini-batch training: loss, backprop, global-norm clip, optimizer step.

    With a validation set the returned model carries the parameters from the
    epoch with the best validation correlation; otherwise the final ones.
    """
    if len(train_set) == 0 or (valid_set is not None and len(valid_set) == 0):
        raise EmptyInput("training and validation sets must be non-empty")
    if train_set.inputs.shape[1:] != (model.m, model.T) or train_set.targets.shape[1:] != (model.m, model.h):
        raise ShapeMismatch("dataset dimensions do not match the model")
    history = History()
    params = model.params()
    if not params:
        return model, history
    rng = np.random.default_rng(cfg.seed)
    state = AdamState()
    n = len(train_set)
    best_corr, best_params, stale = None, None, 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(train_set.inputs[idx], train_set.targets[idx])
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at epoch {epoch}, batch starting {start}; "
                                    f"gradient norm {global_norm(grads)}")
            grads = clip_gradients(grads, cfg.clip)
            history.clip_norms.append(global_norm(grads))
            if cfg.optimizer == "adam":
                adam_step(params, grads, state, cfg.lr)
            else:
                sgd_step(params, grads, cfg.lr)
            total += loss * len(idx)
        record = {"epoch": epoch, "train_loss": total / n,
                  "valid_corr": float("nan"), "valid_rmse": float("nan")}
        if valid_set is not None:
            record["valid_corr"], record["valid_rmse"] = validation_scores(model, valid_set)
            if _better(record["valid_corr"], best_corr):
                best_corr, stale = record["valid_corr"], 0
                best_params = {k: v.copy() for k, v in params.items()}
                history.best_epoch = epoch
            else:
                stale += 1
        history.records.append(record)
        log.debug("epoch %d loss %.6g valid corr %.4f", epoch, record["train_loss"], record["valid_corr"])
        if cfg.patience is not None and stale >= cfg.patience:
            break
    if best_params is not None:
        model.set_params(best_params)
    else:
        history.best_epoch = history.records[-1]["epoch"]
    return model, history


@dataclass(frozen=True)
class SearchSpace:
    window: tuple = (5, 10)
    stride: tuple = (1, 5)
    lr: tuple = (1e-4, LR_MAX)
    budget: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise InvalidConfig("budget must be >= 1")
        if not 1 <= self.window[0] <= self.window[1] or not 1 <= self.stride[0] <= self.stride[1]:
            raise InvalidConfig("window and stride ranges must be positive and ordered")
        if not 0 < self.lr[0] <= self.lr[1] <= LR_MAX:
            raise InvalidConfig(f"lr range must lie in (0, {LR_MAX}]")

    def draw(self):
        """The full seeded trial sequence: (window, stride, lr, trial_seed) per trial."""
        rng = np.random.default_rng(self.seed)
        trials = []
        lo, hi = math.log(self.lr[0]), math.log(self.lr[1])
        for i in range(self.budget):
            w = int(rng.integers(self.window[0], self.window[1] + 1))
            s = int(rng.integers(self.stride[0], self.stride[1] + 1))
            lr = float(math.exp(rng.uniform(lo, hi)))
            seed = int(np.random.SeedSequence([self.seed, i]).generate_state(1)[0])
            trials.append((w, s, lr, seed))
        return trials


@dataclass
class TrialResult:
    trial: int
    window: int
    stride: int
    lr: float
    valid_corr: float = float("nan")
    valid_rmse: float = float("nan")
    status: str = "ok"
    model: object = None

    def row(self):
        return [self.trial, self.window, self.stride, self.lr, self.valid_corr,
                self.valid_rmse, self.status]


TRIAL_COLUMNS = ["trial", "window", "stride", "lr", "valid_corr", "valid_rmse", "status"]


def _run_trial(args):
    i, (w, s, lr, seed), train_set, valid_set, base_args, base_cfg, train_cfg = args
    result = TrialResult(i, w, s, lr)
    try:
        tcfg = replace(base_cfg, window=w, stride=s)
        model = TssNetModel(transform_cfg=tcfg, seed=seed, **base_args)
        model, _ = train(model, train_set, valid_set, replace(train_cfg, lr=lr, seed=seed))
        result.valid_corr, result.valid_rmse = validation_scores(model, valid_set)
        if math.isnan(result.valid_corr):
            result.status = "failed: validation correlation undefined"
        else:
            result.model = model
    except TssNetError as exc:
        result.status = f"failed: {type(exc).__name__}: {exc}"
    return result


def hyper_search(space, train_set, valid_set, base_args, base_cfg=TemporalTensorConfig(),
                 train_cfg=TrainConfig(), jobs=1):
    """Seeded random search over window, stride and (log-uniform) learning rate.

    Trials are ranked by validation correlation, then lower validation RMSE,
    then trial index. Failed trials are logged and skipped. Returns
    ``(best TrialResult, trained best model, list of TrialResult)``.
    """
    draws = space.draw()
    tasks = [(i, d, train_set, valid_set, base_args, base_cfg, train_cfg)
             for i, d in enumerate(draws)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, tasks))
    else:
        results = [_run_trial(t) for t in tasks]
    results.sort(key=lambda r: r.trial)
    for r in results:
        if r.status != "ok":
            log.warning("trial %d (window=%d stride=%d) skipped: %s", r.trial, r.window, r.stride, r.status)
    ok = [r for r in results if r.status == "ok"]
    if not ok:
        raise AllTrialsFailed(f"all {len(results)} trials failed")
    best = min(ok, key=lambda r: (-r.valid_corr, r.valid_rmse, r.trial))
    return best, best.model, results


def save_trial_log(results, path, comments=None):
    write_csv(path, TRIAL_COLUMNS, (r.row() for r in results), comments)


@dataclass
class GradCheckReport:
    max_rel_err: float
    table: list  # dicts: name, checked, max_rel_err

    def rows(self):
        return [[t["name"], t["checked"], t["max_rel_err"]] for t in self.table]


def grad_check(model, sample, eps=1e-5, max_coords=2000, subsample=200, seed=0):
    """Compare analytic gradients with central differences of the sample loss.

    Every coordinate is checked when the model has at most ``max_coords``
    parameters; otherwise a seeded subsample of ``subsample`` coordinates plus
    one per parameter tensor. Error metric: |a - f| / max(1, |a| + |f|).
    """
    if eps <= 0:
        raise InvalidConfig("finite-difference step must be > 0")
    x, y = sample
    x = np.asarray(x, dtype=np.float64)[None]
    y = np.asarray(y, dtype=np.float64)[None]
    _, analytic = model.loss_and_grads(x, y)
    params = model.params()
    total = sum(p.size for p in params.values())
    rng = np.random.default_rng(seed)
    table = []
    for name, p in params.items():
        if total <= max_coords:
            coords = np.arange(p.size)
        else:
            k = max(1, int(round(subsample * p.size / total)))
            coords = np.sort(rng.choice(p.size, size=min(k, p.size), replace=False))
        flat = p.reshape(-1)
        worst = 0.0
        for c in coords:
            orig = flat[c]
            flat[c] = orig + eps
            lp = model.loss_and_grads(x, y)[0]
            flat[c] = orig - eps
            lm = model.loss_and_grads(x, y)[0]
            flat[c] = orig
            fd = (lp - lm) / (2 * eps)
            a = analytic[name].reshape(-1)[c]
            worst = max(worst, float(abs(a - fd) / max(1.0, abs(a) + abs(fd))))
        table.append({"name": name, "checked": len(coords), "max_rel_err": worst})
    return GradCheckReport(max((t["max_rel_err"] for t in table), default=0.0), table)


def save_checkpoint(model, path, seed=None, scaler=None, extra=None):
    """Write a JSON checkpoint; float64 values survive via shortest round-trip repr."""
    doc = {
        "version": CHECKPOINT_VERSION,
        "arch": model.arch(),
        "params": [{"name": k, "shape": list(v.shape), "values": v.ravel().tolist()}
                   for k, v in model.params().items()],
        "seed": seed,
        "scaler": scaler.to_dict() if isinstance(scaler, Scaler) else scaler,
    }
    if extra:
        doc["extra"] = extra
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_checkpoint(path, with_meta=False):
    """Rebuild a model from ``path``; ``with_meta`` also returns the seed/scaler/extra dict."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptCheckpoint(f"unparseable checkpoint: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptCheckpoint("checkpoint is not a mapping")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise VersionMismatch(f"unsupported checkpoint version {doc.get('version')!r}")
    try:
        arch = doc["arch"]
        cls = MODEL_KINDS[arch["kind"]]
        model = cls.from_arch(arch)
        values = {}
        for entry in doc["params"]:
            arr = np.asarray(entry["values"], dtype=np.float64)
            shape = tuple(entry["shape"])
            if arr.size != int(np.prod(shape)):
                raise CorruptCheckpoint(f"{entry['name']}: {arr.size} values for shape {shape}")
            values[entry["name"]] = arr.reshape(shape)
        if set(values) != set(model.params()):
            raise CorruptCheckpoint("parameter names do not match the architecture")
        model.set_params(values)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CorruptCheckpoint):
            raise
        raise CorruptCheckpoint(f"checkpoint failed validation: {exc}") from exc
    if not with_meta:
        return model
    scaler = doc.get("scaler")
    meta = {"seed": doc.get("seed"),
            "scaler": Scaler.from_dict(scaler) if scaler else None,
            "extra": doc.get("extra", {})}
    return model, meta
