import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_slices
from tssnet.data import SeriesMatrix
from tssnet.errors import InvalidConfig
from tssnet.transform import TemporalTensorConfig, pad_series, slice_count, slice_stack


def cfg(**kw):
    return TemporalTensorConfig(**kw)


@pytest.mark.parametrize("kw, T, o", [
    (dict(window=1, stride=1), 37, 37),
    (dict(window=8, stride=2), 168, 77),
    (dict(window=3, stride=1), 6, 2),
])
def test_slice_count_fixtures(kw, T, o):
    assert slice_count(cfg(**kw), T) == o


def test_slice_count_invalid():
    with pytest.raises(InvalidConfig):
        slice_count(cfg(window=4), 4)


def test_slice_count_maximal_formula():
    assert slice_count(cfg(window=4, formula="maximal"), 4) == 1
    assert slice_count(cfg(window=8, stride=2, formula="maximal"), 168) == 81


def test_config_validation():
    with pytest.raises(InvalidConfig):
        cfg(window=0)
    with pytest.raises(InvalidConfig):
        cfg(padding=-1)
    with pytest.raises(InvalidConfig):
        cfg(padding_mode="reflect")


def test_pad_series_modes():
    x = np.array([[1.0, 2.0, 3.0]])
    np.testing.assert_array_equal(pad_series(x, 0, "zero"), x)
    np.testing.assert_array_equal(pad_series(x, 2, "zero"), [[0, 0, 1, 2, 3, 0, 0]])
    np.testing.assert_array_equal(pad_series(x, 1, "edge"), [[1, 1, 2, 3, 3]])
    np.testing.assert_array_equal(pad_series(x, 1, "local-mean", k=2), [[1.5, 1, 2, 3, 2.5]])
    with pytest.raises(InvalidConfig):
        pad_series(x, 1, "local-mean", k=4)


def test_pad_series_keeps_series_type():
    s = SeriesMatrix([[1.0, 2.0]], ["a"])
    padded = pad_series(s, 1, "edge")
    assert isinstance(padded, SeriesMatrix) and padded.names == ["a"]
    np.testing.assert_array_equal(padded.values, [[1, 1, 2, 2]])


def test_slice_stack_two_features():
    x = np.array([[1.0, 2, 3, 4], [5, 6, 7, 8]])
    z = slice_stack(x, cfg(window=2, stride=1, formula="conservative"))
    assert z.shape == (2, 2, 2)
    np.testing.assert_array_equal(z[:, :, 0], [[1, 2], [5, 6]])
    np.testing.assert_array_equal(z[:, :, 1], [[2, 3], [6, 7]])


def test_slice_stack_degenerate_window():
    z = slice_stack(np.array([[7.0, 8, 9]]), cfg(window=1))
    assert z.shape == (1, 1, 3)
    np.testing.assert_array_equal(z.ravel(), [7, 8, 9])


def test_slice_stack_dilation():
    x = np.arange(1.0, 8.0)[None]
    z = slice_stack(x, cfg(window=2, dilation=2))
    assert z.shape == (1, 2, 3)
    for i in range(3):
        np.testing.assert_array_equal(z[0, :, i], [x[0, i], x[0, i + 2]])


def test_univariate_gives_matrix_per_feature():
    z = slice_stack(np.arange(20.0)[None], cfg(window=4, stride=2))
    assert z[0].ndim == 2 and z[0].shape == (4, slice_count(cfg(window=4, stride=2), 20))


def test_batched_input_matches_per_sample():
    rng = np.random.default_rng(0)
    xs = rng.normal(size=(5, 3, 20))
    c = cfg(window=3, stride=2, padding=1)
    batch = slice_stack(xs, c)
    for i in range(5):
        np.testing.assert_array_equal(batch[i], slice_stack(xs[i], c))


configs = st.fixed_dictionaries({
    "m": st.integers(1, 4), "T": st.integers(1, 32), "window": st.integers(1, 6),
    "stride": st.integers(1, 4), "dilation": st.integers(1, 3), "padding": st.integers(0, 3),
    "mode": st.sampled_from(["zero", "edge", "local-mean"]), "seed": st.integers(0, 2**31),
})


@settings(max_examples=300, deadline=None)
@given(configs)
def test_oracle_equivalence_and_bounds(c):
    rng = np.random.default_rng(c["seed"])
    x = rng.normal(size=(c["m"], c["T"]))
    k = min(2, c["T"])
    tc = cfg(window=c["window"], stride=c["stride"], dilation=c["dilation"],
             padding=c["padding"], padding_mode=c["mode"], local_mean_k=k)
    expected, o_naive = naive_slices(x, c["window"], c["stride"], c["dilation"], c["padding"],
                                     c["mode"], k)
    if o_naive == 0:
        with pytest.raises(InvalidConfig):
            slice_stack(x, tc)
        return
    o = slice_count(tc, c["T"])
    assert o == o_naive
    z = slice_stack(x, tc)
    np.testing.assert_array_equal(z, expected)
    # the last slice never reaches past the padded series
    assert (o - 1) * c["stride"] + (c["window"] - 1) * c["dilation"] <= c["T"] + 2 * c["padding"] - 1
    # every entry is copied from the padded input at the documented index
    padded = pad_series(x, c["padding"], c["mode"], k)
    for i in range(o):
        for w in range(c["window"]):
            assert np.array_equal(z[:, w, i], padded[:, i * c["stride"] + w * c["dilation"]])
