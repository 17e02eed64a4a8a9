import numpy as np
import pytest

from oracles import central_difference, rel_err
from tssnet.baselines import PersistenceForecaster, build_cnn1d, persistence_predict
from tssnet.data import make_windows
from tssnet.errors import InvalidConfig
from tssnet.metrics import evaluate_model, rmse


def test_cnn1d_shapes():
    model = build_cnn1d(10, 168, 15, seed=0)
    assert model.forward(np.zeros((10, 168))).shape == (10, 15)
    assert dict(model.layers)["out"].W.shape[0] == 150
    assert dict(model.layers)["conv1"].W.shape == (10, 1, 10, 3)


def test_cnn1d_seeded():
    a, b = build_cnn1d(3, 20, 2, seed=4), build_cnn1d(3, 20, 2, seed=4)
    for k in a.params():
        assert np.array_equal(a.params()[k], b.params()[k])


def test_cnn1d_kernel_too_tall():
    with pytest.raises(InvalidConfig):
        build_cnn1d(3, 20, 2, kernel_height=4)


def test_cnn1d_gradients():
    rng = np.random.default_rng(0)
    model = build_cnn1d(3, 10, 2, seed=1)
    x, y = rng.normal(size=(2, 3, 10)), rng.normal(size=(2, 3, 2))
    _, grads = model.loss_and_grads(x, y)
    p = model.params()["conv1.W"]

    def loss(v):
        keep = p.copy()
        model.set_params({**model.params(), "conv1.W": v})
        out = model.loss_and_grads(x, y)[0]
        model.set_params({**model.params(), "conv1.W": keep})
        return out
    assert rel_err(grads["conv1.W"], central_difference(loss, p)) < 1e-4


def test_persistence_fixtures():
    np.testing.assert_array_equal(persistence_predict(np.array([[1.0, 2, 3]]), 2), [[3, 3]])
    np.testing.assert_array_equal(persistence_predict(np.array([[1.0, 2]]), 3, "seasonal", 2), [[1, 2, 1]])
    with pytest.raises(InvalidConfig):
        persistence_predict(np.array([[1.0, 2, 3]]), 2, "seasonal", 5)


def test_persistence_exact_on_constant_and_periodic():
    const = np.full((2, 40), 3.5)
    data = make_windows(const, 10, 7)
    for h in (1, 5, 7):
        pred = persistence_predict(data.inputs[:, :, :], h)
        assert rmse(data.targets[:, :, :h], pred) == 0
    periodic = np.tile([1.0, 4.0, 2.0], 20)[None]
    data = make_windows(periodic, 9, 5)
    pred = persistence_predict(data.inputs, 5, "seasonal", 3)
    assert rmse(data.targets, pred) == 0


def test_persistence_model_on_constant_series():
    data = make_windows(np.full((1, 30), 2.0), 8, 3)
    report = evaluate_model(PersistenceForecaster(1, 8, 3), data)
    assert report.rmse == 0
    assert np.isnan(report.corr) and report.n_degenerate == len(data)
