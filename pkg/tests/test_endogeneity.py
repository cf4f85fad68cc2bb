import numpy as np
import pytest

from bqreg.bayes import McmcConfig, bqr_fit, posterior_median
from bqreg.classical import ols_fit
from bqreg.endogeneity import (
    STOCK_YOGO_CRITICAL, bqr_2sls, bqr_2sls_arrays, build_instruments, build_iv_design, sargan_test,
    tsls_fit,
)
from bqreg.errors import DegenerateSampleError, SingularDesignError, UsageError
from bqreg.model import InstrumentBlock, ModelSpec, build_design
from bqreg.pipeline.dgp import DgpConfig, simulate_dgp
from conftest import make_dataset

CFG = McmcConfig(draws=1500, burn_in=500, seed=3)


def simultaneous_arrays(n, seed, instruments=1, violation=0.0, rho=0.6):
    data, truth = simulate_dgp(DgpConfig(kind="simultaneous", n=n, beta=(1.0, 1.0), rho=rho,
                                         seed=seed, instruments=instruments, violation=violation))
    X = np.column_stack([np.ones(n), data.column("x1")])
    Z = np.column_stack([np.ones(n)] + [data.column(f"z{k + 1}") for k in range(instruments)])
    return X, data.column("y"), Z, truth


def test_self_instrumented_equals_ols():
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    y = X @ [1.0, 2.0, 3.0] + rng.normal(size=40)
    fit = tsls_fit(X, y, 1, X, excluded_indices=[1])
    np.testing.assert_allclose(fit.coefficients, ols_fit(X, y).coefficients, atol=1e-10)
    np.testing.assert_allclose(fit.fitted_endogenous, X[:, 1], atol=1e-10)


def test_exactly_identified_closed_form():
    X = np.array([[1.0, 0.5], [1.0, 2.0], [1.0, 3.5]])
    Z = np.array([[1.0, 1.0], [1.0, -1.0], [1.0, 4.0]])
    y = np.array([2.0, 1.0, 7.0])
    fit = tsls_fit(X, y, 1, Z)
    np.testing.assert_allclose(fit.coefficients, np.linalg.inv(Z.T @ X) @ Z.T @ y, atol=1e-10)
    assert fit.sargan.df == 0 and fit.sargan.statistic == 0.0 and fit.sargan.p_value == 1.0


def test_fitted_endogenous_is_first_stage():
    X, y, Z, _ = simultaneous_arrays(300, 1)
    fit = tsls_fit(X, y, 1, Z)
    assert fit.fitted_endogenous.shape == (300,)
    np.testing.assert_allclose(fit.fitted_endogenous, Z @ ols_fit(Z, X[:, 1]).coefficients)


def test_tsls_errors():
    X, y, Z, _ = simultaneous_arrays(100, 2)
    with pytest.raises(SingularDesignError):
        tsls_fit(X, y, 1, np.column_stack([Z, Z[:, 1]]))
    with pytest.raises(UsageError):
        tsls_fit(np.column_stack([X, X[:, 1] ** 2]), y, 1, Z)


@pytest.mark.slow
def test_repairs_simultaneity_bias():
    ols_bias, tsls_bias = [], []
    for rep in range(20):
        X, y, Z, truth = simultaneous_arrays(5000, 100 + rep)
        ols_bias.append(ols_fit(X, y).coefficients[1] - 1.0)
        tsls_bias.append(tsls_fit(X, y, 1, Z).coefficients[1] - 1.0)
    assert np.mean(ols_bias) > 0.2
    assert np.mean(ols_bias) == pytest.approx(truth.ols_bias, abs=0.02)
    assert abs(np.mean(tsls_bias)) < 0.05


def test_bqr_2sls_tracks_truth():
    X, y, Z, _ = simultaneous_arrays(3000, 7)
    fixed = posterior_median(bqr_2sls_arrays(X, y, 1, Z, 0.5, cfg=CFG))[1]
    plain = posterior_median(bqr_fit(X, y, 0.5, cfg=CFG))[1]
    assert abs(fixed - 1.0) < 0.08
    assert abs(plain - 1.0) > 0.15


def test_bqr_2sls_identity_substitution():
    rng = np.random.default_rng(5)
    n = 200
    ds = make_dataset(n, {"y": rng.normal(size=n), "x": rng.normal(size=n), "w": rng.normal(size=n)})
    spec = ModelSpec("y", ("x", "w"), instrument_block=InstrumentBlock("w"))
    d = build_iv_design(ds, spec)
    # Z spans the endogenous column itself, so the substitution is the identity
    Z = np.column_stack([d.Z, d.X[:, 2]])
    a = bqr_2sls_arrays(d.X, d.y, d.endogenous_index, Z, 0.5, cfg=CFG)
    b = bqr_fit(d.X, d.y, 0.5, cfg=CFG)
    assert a.beta_draws.tobytes() == b.beta_draws.tobytes()


def test_bqr_2sls_on_dataset():
    data, _ = simulate_dgp(DgpConfig(kind="simultaneous", n=2000, beta=(1.0, 1.0), rho=0.6, seed=8))
    spec = ModelSpec("y", ("x1",), instrument_block=InstrumentBlock("x1", ("z1",)))
    ch = bqr_2sls(data, spec, 0.5, cfg=CFG)
    assert ch.regressor_names == ("C", "x1")
    assert ch.beta_draws.shape == (1500, 2)
    assert abs(posterior_median(ch)[1] - 1.0) < 0.1


def test_instrument_counting():
    rng = np.random.default_rng(6)
    names = [f"r{k}" for k in range(9)]
    ds = make_dataset(10, {"y": rng.normal(size=10), **{k: rng.normal(size=10) for k in names}})
    spec = ModelSpec("y", tuple(names), instrument_block=InstrumentBlock("r3"))
    with pytest.raises(DegenerateSampleError):
        build_instruments(ds, spec)  # 9 usable rows cannot support q = 10
    big = make_dataset(30, {"y": rng.normal(size=30), **{k: rng.normal(size=30) for k in names}})
    d = build_iv_design(big, spec)
    assert d.Z.shape == (29, 10)
    assert d.instrument_names[-1] == "lag1(y)"
    np.testing.assert_array_equal(d.Z[:, -1], big.column("y")[:-1])
    np.testing.assert_array_equal(d.y, big.column("y")[1:])


def test_lag_loses_one_row():
    rng = np.random.default_rng(7)
    ds = make_dataset(10, {"y": rng.normal(size=10), "x": rng.normal(size=10)})
    spec = ModelSpec("y", ("x",), instrument_block=InstrumentBlock("x"))
    assert build_instruments(ds, spec).shape == (9, 2)


def test_missing_instrument_block():
    ds = make_dataset(10, {"y": np.arange(10.0), "x": np.arange(10.0) ** 2})
    with pytest.raises(UsageError):
        build_instruments(ds, ModelSpec("y", ("x",)))


@pytest.mark.slow
def test_sargan_size():
    rejections = 0
    for rep in range(500):
        X, y, Z, _ = simultaneous_arrays(500, 10_000 + rep, instruments=3)
        rejections += tsls_fit(X, y, 1, Z).sargan.p_value < 0.05
    assert 0.02 <= rejections / 500 <= 0.09


def test_sargan_power():
    rejections = 0
    for rep in range(100):
        X, y, Z, _ = simultaneous_arrays(2000, 20_000 + rep, instruments=2, violation=0.3)
        rejections += tsls_fit(X, y, 1, Z).sargan.p_value < 0.05
    assert rejections / 100 > 0.8


def test_sargan_exactly_identified():
    res = sargan_test(np.arange(5.0), np.ones((5, 2)), 2)
    assert (res.statistic, res.df, res.p_value) == (0.0, 0, 1.0)
    with pytest.raises(UsageError):
        sargan_test(np.arange(5.0), np.ones((5, 2)), 3)


def test_weak_instrument_fails():
    fails = 0
    for rep in range(50):
        rng = np.random.default_rng(300 + rep)
        n = 500
        z, x, y = rng.normal(size=(3, n))
        X = np.column_stack([np.ones(n), x])
        Z = np.column_stack([np.ones(n), z])
        fit = tsls_fit(X, y, 1, Z)
        fails += not fit.weak_id_pass
    assert fails >= 48


def test_strong_instrument_passes():
    rng = np.random.default_rng(12)
    n = 500
    z = rng.normal(size=n)
    x = 3 * z + rng.normal(size=n)  # first-stage R^2 = 0.9
    y = 1 + x + rng.normal(size=n)
    fit = tsls_fit(np.column_stack([np.ones(n), x]), y, 1, np.column_stack([np.ones(n), z]))
    assert fit.first_stage.fitted.var() / x.var() == pytest.approx(0.9, abs=0.03)
    assert fit.weak_id_F > 10 * STOCK_YOGO_CRITICAL and fit.weak_id_pass
