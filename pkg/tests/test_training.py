import hashlib
import json
import math

import numpy as np
import pytest

from tssnet.baselines import Cnn1dBaseline, PersistenceForecaster
from tssnet.data import make_windows
from tssnet.errors import (AllTrialsFailed, CorruptCheckpoint, EmptyInput, InvalidConfig,
                           ShapeMismatch, VersionMismatch)
from tssnet.layers import DenseLayer
from tssnet.model import TssNetModel
from tssnet.training import (SearchSpace, TrainConfig, grad_check, hyper_search, load_checkpoint,
                             save_checkpoint, train, validation_scores)
from tssnet.transform import TemporalTensorConfig


def overfit_setup(seed=0):
    x = np.sin(2 * np.pi * np.arange(31) / 12)[None]
    data = make_windows(x, 24, 4)
    assert len(data) == 4
    model = TssNetModel(1, 24, 4, TemporalTensorConfig(window=4, stride=2), k=3,
                        kernel_height_mode="fixed", seed=seed)
    return model, data


def checksum(model):
    h = hashlib.sha256()
    for name, p in sorted(model.params().items()):
        h.update(name.encode())
        h.update(np.ascontiguousarray(p).tobytes())
    return h.hexdigest()


def test_overfit_small_sine():
    model, data = overfit_setup()
    cfg = TrainConfig(lr=0.005, clip=10, epochs=500, batch_size=4)
    model, hist = train(model, data, cfg=cfg)
    assert hist.records[-1]["train_loss"] < 1e-3
    assert hist.best_epoch == 500


def test_training_is_deterministic():
    cfg = TrainConfig(lr=0.005, epochs=20, batch_size=2, seed=3)
    a, _ = train(*overfit_setup(1), cfg=cfg)
    b, _ = train(*overfit_setup(1), cfg=cfg)
    assert checksum(a) == checksum(b)


def test_train_config_validation():
    for bad in [dict(lr=0), dict(lr=0.5), dict(clip=0), dict(epochs=0), dict(optimizer="rmsprop"),
                dict(patience=0)]:
        with pytest.raises(InvalidConfig):
            TrainConfig(**bad)


def test_train_input_errors():
    model, data = overfit_setup()
    with pytest.raises(EmptyInput):
        train(model, data.subset(slice(0, 0)))
    other = make_windows(np.ones((2, 40)), 24, 4)
    with pytest.raises(ShapeMismatch):
        train(model, other)


def test_best_epoch_restored_and_matches_history():
    x = np.sin(2 * np.pi * np.arange(80) / 12 + 0.3 * np.random.default_rng(0).normal(size=80))[None]
    train_set = make_windows(x[:, :55], 24, 4)
    valid_set = make_windows(x[:, 45:], 24, 4)
    model = TssNetModel(1, 24, 4, TemporalTensorConfig(window=4, stride=2), kernel_height_mode="fixed")
    model, hist = train(model, train_set, valid_set, TrainConfig(lr=0.01, epochs=15))
    best = max(hist.records, key=lambda r: r["valid_corr"])
    assert hist.best_epoch == best["epoch"]
    assert validation_scores(model, valid_set)[0] == best["valid_corr"]


def test_clipping_bounds_every_step():
    model, data = overfit_setup()
    _, hist = train(model, data, cfg=TrainConfig(lr=0.001, clip=1e-6, epochs=3, batch_size=1))
    assert len(hist.clip_norms) == 12
    assert max(hist.clip_norms) <= 1e-6 + 1e-12


def test_sgd_reduces_loss():
    model, data = overfit_setup()
    _, hist = train(model, data, cfg=TrainConfig(optimizer="sgd", lr=0.01, epochs=30, batch_size=4))
    assert hist.records[-1]["train_loss"] < hist.records[0]["train_loss"]


def test_parameterless_model_trains_trivially():
    data = make_windows(np.arange(20.0)[None], 5, 2)
    model, hist = train(PersistenceForecaster(1, 5, 2), data, data)
    assert hist.records == []


def _search_data():
    x = np.sin(2 * np.pi * np.arange(120) / 12)[None]
    return make_windows(x[:, :80], 16, 2), make_windows(x[:, 62:], 16, 2)


def test_search_determinism_and_ranking():
    tr, va = _search_data()
    space = SearchSpace(window=(2, 4), stride=(1, 3), budget=3, seed=5)
    base = dict(m=1, T=16, h=2, kernel_height_mode="fixed")
    cfg = TrainConfig(epochs=3)
    best, model, results = hyper_search(space, tr, va, base, train_cfg=cfg)
    best2, _, results2 = hyper_search(space, tr, va, base, train_cfg=cfg)
    assert [r.row() for r in results] == [r.row() for r in results2]
    ok = [r for r in results if r.status == "ok"]
    assert best.valid_corr == max(r.valid_corr for r in ok)
    assert model is best.model


def test_search_budget_one():
    tr, va = _search_data()
    _, _, results = hyper_search(SearchSpace(window=(3, 3), budget=1), tr, va,
                                 dict(m=1, T=16, h=2, kernel_height_mode="fixed"),
                                 train_cfg=TrainConfig(epochs=2))
    assert len(results) == 1 and results[0].window == 3


def test_search_skips_and_reports_failed_trials():
    tr, va = _search_data()
    # windows this wide leave no slices for a length-16 input
    with pytest.raises(AllTrialsFailed):
        hyper_search(SearchSpace(window=(20, 25), budget=2), tr, va, dict(m=1, T=16, h=2),
                     train_cfg=TrainConfig(epochs=1))
    _, _, results = hyper_search(SearchSpace(window=(3, 20), budget=6, seed=1), tr, va,
                                 dict(m=1, T=16, h=2, kernel_height_mode="fixed"),
                                 train_cfg=TrainConfig(epochs=1))
    failed = [r for r in results if r.status != "ok"]
    assert failed and len(failed) < len(results)
    # conservative slice count: a length-16 input admits windows up to 8
    assert all(r.window > 8 and "no slice" in r.status for r in failed)
    assert all(math.isnan(r.valid_corr) for r in failed)


def test_search_space_draw_bounds():
    draws = SearchSpace(budget=200, seed=2).draw()
    assert all(5 <= w <= 10 and 1 <= s <= 5 and 1e-4 <= lr <= 0.01 for w, s, lr, _ in draws)
    assert len({d[3] for d in draws}) == 200
    with pytest.raises(InvalidConfig):
        SearchSpace(lr=(0, 0.01))


def test_grad_check_dense_identity():
    """A model that is a single identity dense layer: loss gradient is 2(W x - y) x^T."""

    class DenseOnly:
        def __init__(self):
            self.layer = DenseLayer(np.eye(3), np.zeros(3))

        def params(self):
            return {"out.W": self.layer.W, "out.b": self.layer.b}

        def loss_and_grads(self, x, y):
            out, cache = self.layer.forward(x.reshape(len(x), -1))
            diff = out - y.reshape(len(y), -1)
            g = self.layer.backward(cache, 2 * diff)
            return float(np.sum(diff ** 2)), {"out.W": g.grads["W"], "out.b": g.grads["b"]}

    rep = grad_check(DenseOnly(), (np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.1, -1.0])))
    assert rep.max_rel_err < 1e-8
    assert [t["checked"] for t in rep.table] == [9, 3]


def test_grad_check_subsamples_large_models():
    model = Cnn1dBaseline(3, 40, 10, seed=0)
    assert model.n_params() > 2000
    rep = grad_check(model, (np.ones((3, 40)), np.zeros((3, 10))), max_coords=2000, subsample=50)
    assert all(t["checked"] >= 1 for t in rep.table)
    assert sum(t["checked"] for t in rep.table) < model.n_params()
    with pytest.raises(InvalidConfig):
        grad_check(model, (np.ones((3, 40)), np.zeros((3, 10))), eps=0)


@pytest.mark.parametrize("make", [
    lambda: TssNetModel(2, 12, 3, TemporalTensorConfig(window=3, stride=2), seed=4),
    lambda: TssNetModel(2, 12, 3, TemporalTensorConfig(window=3, padding=1, padding_mode="local-mean",
                                                       local_mean_k=2), kernel_height_mode="fixed", seed=4),
    lambda: Cnn1dBaseline(2, 12, 3, seed=1),
    lambda: PersistenceForecaster(2, 12, 3, mode="seasonal", period=4),
])
def test_checkpoint_round_trip(tmp_path, make):
    model = make()
    path = tmp_path / "ck.json"
    save_checkpoint(model, path, seed=7, extra={"note": 1})
    back, meta = load_checkpoint(path, with_meta=True)
    assert meta["seed"] == 7 and meta["extra"] == {"note": 1}
    x = np.random.default_rng(0).normal(size=(5, 2, 12))
    assert np.array_equal(back.predict(x), model.predict(x))
    for k, v in model.params().items():
        assert np.array_equal(back.params()[k], v)


def test_checkpoint_errors(tmp_path):
    model = TssNetModel(1, 8, 2, TemporalTensorConfig(window=3))
    path = tmp_path / "ck.json"
    save_checkpoint(model, path)
    text = path.read_text()
    (tmp_path / "trunc.json").write_text(text[: len(text) // 2])
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(tmp_path / "trunc.json")
    doc = json.loads(text)
    doc["version"] = "tssnet-ckpt-0"
    (tmp_path / "old.json").write_text(json.dumps(doc))
    with pytest.raises(VersionMismatch):
        load_checkpoint(tmp_path / "old.json")
    doc = json.loads(text)
    doc["params"][0]["values"].pop()
    (tmp_path / "short.json").write_text(json.dumps(doc))
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(tmp_path / "short.json")
