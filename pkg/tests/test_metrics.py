"""Evaluation measures: accuracy suite, similarity, classification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsflow.errors import (
    BandTooNarrow,
    EmptySeries,
    LengthMismatch,
    MissingTraining,
    NonBinaryLabels,
    ZeroActual,
    ZeroDenominator,
)
from tsflow.metrics import (
    classification_scores,
    dtw,
    euclidean,
    forecast_accuracy,
)

ALL_ACCURACY = ["tswf:ME", "tswf:MSE", "tswf:RMSE", "tswf:MAE", "tswf:MdAE",
                "tswf:MPE", "tswf:MAPE", "tswf:sMAPE", "tswf:MASE"]


def by_name(values):
    return {mv.measure: mv.value for mv in values}


# ------------------------------------------------------ forecast accuracy


def test_perfect_forecast_is_zero_error():
    got = by_name(forecast_accuracy([1, 2, 3], [1, 2, 3],
                                    ["tswf:MSE", "tswf:RMSE", "tswf:MAE",
                                     "tswf:MAPE"]))
    assert all(v == 0 for v in got.values())


def test_hand_example():
    got = by_name(forecast_accuracy([1, 2, 3], [1, 3, 5],
                                    ["tswf:MSE", "tswf:RMSE", "tswf:MAE",
                                     "tswf:ME", "tswf:MdAE"]))
    assert got["tswf:MSE"] == pytest.approx(5 / 3)
    assert got["tswf:RMSE"] == pytest.approx(math.sqrt(5 / 3))
    assert got["tswf:MAE"] == pytest.approx(1.0)
    assert got["tswf:ME"] == pytest.approx(-1.0)  # e = y - yhat = 0, -1, -2
    assert got["tswf:MdAE"] == pytest.approx(1.0)


def test_percentage_measures():
    got = by_name(forecast_accuracy([10, 20], [11, 18],
                                    ["tswf:MPE", "tswf:MAPE", "tswf:sMAPE"]))
    assert got["tswf:MPE"] == pytest.approx((100 * -1 / 10 + 100 * 2 / 20) / 2)
    assert got["tswf:MAPE"] == pytest.approx((10 + 10) / 2)
    assert got["tswf:sMAPE"] == pytest.approx(
        (200 * 1 / 21 + 200 * 2 / 38) / 2)


def test_mase_naive_forecast_is_one():
    rng = np.random.default_rng(50)
    for _ in range(10):
        train = rng.standard_normal(40).cumsum()
        actual = rng.standard_normal(10).cumsum() + train[-1]
        naive = np.concatenate([[train[-1]], actual[:-1]])
        got = by_name(forecast_accuracy(actual, naive, ["tswf:MASE"],
                                        training=train))
        scale = np.abs(np.diff(train)).mean()
        expected = np.abs(actual - naive).mean() / scale
        assert got["tswf:MASE"] == pytest.approx(expected, abs=1e-9)


def test_mase_of_in_sample_naive_is_one():
    train = np.random.default_rng(51).standard_normal(30).cumsum()
    actual = train[1:]
    naive = train[:-1]
    got = by_name(forecast_accuracy(actual, naive, ["tswf:MASE"],
                                    training=train))
    assert got["tswf:MASE"] == pytest.approx(1.0, abs=1e-9)


def test_accuracy_errors():
    with pytest.raises(LengthMismatch):
        forecast_accuracy([1, 2], [1], ["tswf:MSE"])
    with pytest.raises(ZeroActual):
        forecast_accuracy([0, 1], [1, 1], ["tswf:MAPE"])
    with pytest.raises(ZeroActual):
        forecast_accuracy([0, 1], [1, 1], ["tswf:MPE"])
    with pytest.raises(MissingTraining):
        forecast_accuracy([1, 2], [1, 2], ["tswf:MASE"])
    with pytest.raises(ZeroDenominator):
        forecast_accuracy([0, 1], [0, 1], ["tswf:sMAPE"])
    with pytest.raises(EmptySeries):
        forecast_accuracy([], [], ["tswf:MSE"])


def test_identities_over_100_seeded_pairs():
    rng = np.random.default_rng(52)
    for _ in range(100):
        n = int(rng.integers(2, 40))
        y = rng.standard_normal(n) * 10 + 50  # bounded away from zero
        yhat = y + rng.standard_normal(n)
        got = by_name(forecast_accuracy(y, yhat, ALL_ACCURACY, training=y))
        e = np.abs(y - yhat)
        assert got["tswf:RMSE"] ** 2 == pytest.approx(got["tswf:MSE"],
                                                      abs=1e-9)
        assert got["tswf:MAE"] <= got["tswf:RMSE"] + 1e-12
        assert got["tswf:RMSE"] <= e.max() + 1e-12
        assert got["tswf:MSE"] >= 0 and got["tswf:MAE"] >= 0
        assert got["tswf:MdAE"] >= 0


# ------------------------------------------------------------------ dtw


def test_dtw_self_distance_zero():
    x = np.random.default_rng(53).standard_normal(20)
    assert dtw(x, x) == 0


def test_dtw_hand_example():
    assert dtw([0, 0, 1], [0, 1]) == 0


def test_dtw_band_zero_is_lockstep_l1():
    rng = np.random.default_rng(54)
    x = rng.standard_normal(15)
    y = rng.standard_normal(15)
    assert dtw(x, y, band=0) == pytest.approx(np.abs(x - y).sum(), abs=1e-12)


def test_dtw_symmetry_and_upper_bound():
    rng = np.random.default_rng(55)
    for _ in range(100):
        n = int(rng.integers(2, 25))
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        d = dtw(x, y)
        assert d == pytest.approx(dtw(y, x), abs=1e-12)
        assert d <= np.abs(x - y).sum() + 1e-12
        assert d >= 0


def test_dtw_errors():
    with pytest.raises(EmptySeries):
        dtw([], [1, 2])
    with pytest.raises(BandTooNarrow):
        dtw([1, 2, 3, 4], [1, 2], band=1)  # band < length difference


# ------------------------------------------------------------- euclidean


def test_euclidean_examples():
    assert euclidean([1, 2, 3], [1, 2, 3]) == 0
    assert euclidean([0, 0], [3, 4]) == 5
    with pytest.raises(LengthMismatch):
        euclidean([1], [1, 2])


def test_euclidean_properties():
    rng = np.random.default_rng(56)
    for _ in range(100):
        n = int(rng.integers(1, 30))
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        assert euclidean(x, y) >= 0
        assert euclidean(x, y) == pytest.approx(euclidean(y, x), abs=1e-12)


# --------------------------------------------------------- classification


def test_classification_perfect():
    got = classification_scores([1, 0, 1, 0], [1, 0, 1, 0])
    assert got["f1"] == 1.0
    assert got["precision"] == 1.0 and got["recall"] == 1.0
    cm = got["confusion"]
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 0, 2, 0)


def test_classification_all_negative_prediction():
    got = classification_scores([1, 1, 0], [0, 0, 0])
    assert got["recall"] == 0
    assert got["precision"] == 0  # defined 0/0 rule
    assert got["f1"] == 0


def test_classification_hand_counts():
    got = classification_scores([1, 1, 0, 1, 0], [1, 1, 1, 0, 0])
    cm = got["confusion"]
    assert (cm.tp, cm.fp, cm.fn, cm.tn) == (2, 1, 1, 1)
    assert got["precision"] == pytest.approx(2 / 3)
    assert got["recall"] == pytest.approx(2 / 3)
    assert got["f1"] == pytest.approx(2 / 3)


def test_classification_errors():
    with pytest.raises(LengthMismatch):
        classification_scores([1, 0], [1])
    with pytest.raises(NonBinaryLabels):
        classification_scores([1, 2], [1, 0])


# ----------------------------------------------------------- properties


pair = st.integers(2, 25).flatmap(lambda n: st.tuples(
    st.lists(st.floats(min_value=-100, max_value=100), min_size=n, max_size=n),
    st.lists(st.floats(min_value=-100, max_value=100), min_size=n, max_size=n)))


@settings(deadline=None, max_examples=60)
@given(pair)
def test_rmse_mse_mae_relations(xy):
    y, yhat = (np.asarray(v) for v in xy)
    got = by_name(forecast_accuracy(y, yhat, ["tswf:MSE", "tswf:RMSE",
                                              "tswf:MAE"]))
    assert got["tswf:RMSE"] ** 2 == pytest.approx(got["tswf:MSE"],
                                                  rel=1e-9, abs=1e-9)
    assert got["tswf:MAE"] <= got["tswf:RMSE"] + 1e-9


@settings(deadline=None, max_examples=40)
@given(pair)
def test_dtw_never_exceeds_lockstep(xy):
    x, y = (np.asarray(v) for v in xy)
    assert dtw(x, y) <= np.abs(x - y).sum() + 1e-9
