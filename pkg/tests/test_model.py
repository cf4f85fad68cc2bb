import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bqreg.errors import DataError, MissingColumnError, UsageError
from bqreg.model import (
    CoefficientRow, CoefficientTable, InstrumentBlock, ModelSpec, build_design, check_tau,
    parse_transform, stars_for,
)
from conftest import make_dataset


def test_intercept_column_first():
    ds = make_dataset(3, {"y": [1.0, 2.0, 3.0], "x": [4.0, 5.0, 6.0]})
    X, y, names = build_design(ds, ModelSpec("y", ("x",)))
    assert X.shape == (3, 2)
    assert np.all(X[:, 0] == 1.0)
    assert names == ["C", "x"]
    np.testing.assert_array_equal(y, [1.0, 2.0, 3.0])


def test_no_intercept():
    ds = make_dataset(3, {"y": [1.0, 2.0, 3.0], "x": [4.0, 5.0, 6.0]})
    X, _, names = build_design(ds, ModelSpec("y", ("x",), intercept=False))
    assert X.shape == (3, 1) and names == ["x"]


def test_lag_drops_first_row():
    rng = np.random.default_rng(1)
    ds = make_dataset(10, {"y": rng.normal(size=10), "x": rng.normal(size=10)})
    spec = ModelSpec("y", ("x",), transforms={"x": ["lag(1)"]})
    X, y, _ = build_design(ds, spec)
    assert X.shape[0] == 9 and y.shape[0] == 9
    np.testing.assert_array_equal(X[:, 1], ds.column("x")[:-1])


def test_missing_column_is_named():
    ds = make_dataset(3, {"y": [1.0, 2.0, 3.0]})
    with pytest.raises(MissingColumnError, match="'Z'"):
        build_design(ds, ModelSpec("y", ("Z",)))
    assert issubclass(MissingColumnError, DataError)


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.5, 0.995, float("nan")])
def test_tau_out_of_range(tau):
    with pytest.raises(UsageError):
        check_tau(tau)


def test_parse_transform():
    assert parse_transform("log") == ("log",)
    assert parse_transform("diff") == ("diff",)
    assert parse_transform("lag(3)") == ("lag", 3)
    with pytest.raises(UsageError):
        parse_transform("lag(0)")
    with pytest.raises(UsageError):
        parse_transform("sqrt")


def test_spec_validation():
    with pytest.raises(UsageError):
        ModelSpec("y", ("x", "x"))
    with pytest.raises(UsageError):
        ModelSpec("y", ("y",))
    with pytest.raises(UsageError):
        ModelSpec("y", ("x",), instrument_block=InstrumentBlock("w"))
    spec = ModelSpec("y", ("x", "w"), instrument_block=InstrumentBlock("w", ("z",)))
    assert spec.columns == ["y", "x", "w", "z"]
    assert spec.n_params == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_row_permutation_permutes_design(seed):
    rng = np.random.default_rng(seed)
    n = 12
    ds = make_dataset(n, {"y": rng.normal(size=n), "a": rng.normal(size=n), "b": rng.normal(size=n)})
    spec = ModelSpec("y", ("a", "b"))
    X, y, _ = build_design(ds, spec)
    perm = rng.permutation(n)
    shuffled = make_dataset(n, {k: v[perm] for k, v in ds.columns.items()})
    Xp, yp, _ = build_design(shuffled, spec)
    np.testing.assert_array_equal(Xp, X[perm])
    np.testing.assert_array_equal(yp, y[perm])


def test_design_is_deterministic():
    rng = np.random.default_rng(2)
    ds = make_dataset(8, {"y": rng.normal(size=8), "x": rng.normal(size=8)})
    spec = ModelSpec("y", ("x",))
    a, b = build_design(ds, spec), build_design(ds, spec)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_nonfinite_rows_dropped():
    ds = make_dataset(4, {"y": [1.0, np.nan, 3.0, 4.0], "x": [1.0, 2.0, np.inf, 4.0]})
    X, y, _ = build_design(ds, ModelSpec("y", ("x",)))
    np.testing.assert_array_equal(y, [1.0, 4.0])


@pytest.mark.parametrize("prob,stars", [
    (0.0, 3), (0.0024, 3), (0.0099, 3), (0.01, 2), (0.0426, 2), (0.0595, 1),
    (0.0999, 1), (0.10, 0), (0.5, 0), (1.0, 0), (None, 0),
])
def test_star_thresholds(prob, stars):
    assert stars_for(prob) == stars


@given(st.floats(0.0, 1.0))
def test_stars_monotone_in_prob(p):
    assert stars_for(p) >= stars_for(min(1.0, p + 0.01))


def test_coefficient_table():
    t = CoefficientTable()
    t.add(CoefficientRow("bqr", "x", 0.5, 1.0, 0.5, 1.5, 0.001))
    assert t.get("bqr", "x", 0.5).stars == 3
    with pytest.raises(UsageError):
        t.add(CoefficientRow("bqr", "x", 0.5, 1.0, 0.5, 1.5, 0.001))
    with pytest.raises(UsageError):
        CoefficientRow("bqr", "x", 0.5, 2.0, 0.5, 1.5, 0.001)
    assert len(t) == 1 and t.estimators() == ["bqr"]
