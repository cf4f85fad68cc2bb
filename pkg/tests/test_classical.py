import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from bqreg.classical import check_loss, ols_fit, qr_fit
from bqreg.errors import DegenerateSampleError, SingularDesignError, UsageError
from bqreg.model import DEFAULT_TAU_GRID

finite = st.floats(-1e3, 1e3, allow_nan=False)
taus = st.floats(0.01, 0.99)


def lp_quantile(X, y, tau):
    """Reference quantile regression as the textbook linear program."""
    n, p = X.shape
    c = np.r_[np.zeros(2 * p), np.full(n, tau), np.full(n, 1 - tau)]
    A = np.hstack([X, -X, np.eye(n), -np.eye(n)])
    res = linprog(c, A_eq=A, b_eq=y, bounds=(0, None), method="highs")
    return res.fun


def grid_quantile(y, tau):
    """Minimize the check loss over b on a grid that contains every kink."""
    grid = np.union1d(np.linspace(y.min(), y.max(), 2001), y)
    obj = np.array([check_loss(tau, y - b).sum() for b in grid])
    return grid[obj.argmin()], obj.min()


@pytest.mark.parametrize("tau,u,expected", [(0.5, 2.0, 1.0), (0.9, -1.0, 0.1), (0.3, 0.0, 0.0)])
def test_check_loss_examples(tau, u, expected):
    assert check_loss(tau, u) == pytest.approx(expected)


@given(taus, finite)
def test_check_loss_pinball_identity(tau, u):
    assert check_loss(tau, u) >= 0
    assert check_loss(tau, u) == pytest.approx(0.5 * abs(u) + (tau - 0.5) * u, abs=1e-9)


def test_check_loss_vectorized():
    u = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_allclose(check_loss(0.25, u), [1.5, 0.0, 0.75])


def test_ols_exact_line():
    X = np.column_stack([np.ones(3), [0.0, 1.0, 2.0]])
    fit = ols_fit(X, np.array([1.0, 3.0, 5.0]))
    np.testing.assert_allclose(fit.coefficients, [1.0, 2.0], atol=1e-12)
    np.testing.assert_allclose(fit.residuals, 0.0, atol=1e-12)


def test_ols_constant_response():
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(15), rng.normal(size=(15, 2))])
    fit = ols_fit(X, np.full(15, 4.2))
    np.testing.assert_allclose(fit.coefficients, [4.2, 0.0, 0.0], atol=1e-12)


def test_ols_matches_normal_equations():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    fit = ols_fit(X, y)
    beta = np.linalg.inv(X.T @ X) @ X.T @ y
    np.testing.assert_allclose(fit.coefficients, beta, atol=1e-8)
    resid = y - X @ beta
    s2 = resid @ resid / 17
    np.testing.assert_allclose(fit.std_errors, np.sqrt(np.diag(s2 * np.linalg.inv(X.T @ X))), rtol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ols_residuals_orthogonal(seed):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(30), rng.normal(size=(30, 2))])
    y = rng.standard_t(3, size=30) * 10
    fit = ols_fit(X, y)
    assert np.abs(X.T @ fit.residuals).max() <= 1e-8 * max(1.0, np.abs(y).sum())


def test_ols_errors():
    X = np.column_stack([np.ones(5), np.arange(5.0), 2 * np.arange(5.0)])
    with pytest.raises(SingularDesignError):
        ols_fit(X, np.arange(5.0))
    with pytest.raises(DegenerateSampleError):
        ols_fit(np.eye(2), np.ones(2))


def test_qr_median_of_three():
    X = np.ones((3, 1))
    y = np.array([1.0, 2.0, 9.0])
    assert qr_fit(X, y, 0.5).coefficients[0] == pytest.approx(2.0)


def test_qr_low_quantile_of_three():
    X = np.ones((3, 1))
    y = np.array([1.0, 2.0, 9.0])
    b, _ = grid_quantile(y, 0.1)
    assert b == 1.0
    assert qr_fit(X, y, 0.1).coefficients[0] == pytest.approx(1.0)


@pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
def test_qr_exact_line(tau):
    X = np.column_stack([np.ones(3), [0.0, 1.0, 2.0]])
    fit = qr_fit(X, np.array([1.0, 3.0, 5.0]), tau)
    np.testing.assert_allclose(fit.coefficients, [1.0, 2.0], atol=1e-9)
    assert fit.objective == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("tau", [0.0, 1.0, 1.5])
def test_qr_rejects_bad_tau(tau):
    with pytest.raises(UsageError):
        qr_fit(np.ones((5, 1)), np.arange(5.0), tau)


def test_qr_rejects_underdetermined():
    with pytest.raises(DegenerateSampleError):
        qr_fit(np.ones((2, 3)), np.ones(2), 0.5)


def test_qr_single_observation():
    assert qr_fit(np.ones((1, 1)), np.array([3.5]), 0.3).coefficients[0] == pytest.approx(3.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(DEFAULT_TAU_GRID))
def test_qr_matches_linear_program(seed, tau):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 60))
    X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
    y = X @ [1.0, -1.0, 0.5] + rng.standard_t(2, size=n)
    fit = qr_fit(X, y, tau)
    ref = lp_quantile(X, y, tau)
    assert fit.objective == pytest.approx(ref, rel=1e-9, abs=1e-9)
    assert fit.objective == pytest.approx(check_loss(tau, y - X @ fit.coefficients).sum(), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), taus)
def test_qr_intercept_only_matches_grid(seed, tau):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=int(rng.integers(1, 26)))
    _, best = grid_quantile(y, tau)
    fit = qr_fit(np.ones((y.size, 1)), y, tau)
    assert abs(fit.objective - best) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 0.75]),
       st.floats(0.1, 10.0), st.floats(-5.0, 5.0))
def test_qr_equivariance(seed, tau, scale, shift):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    y = X @ [0.5, 1.0, -2.0] + rng.normal(size=40)
    base = qr_fit(X, y, tau)
    scaled = qr_fit(X, scale * y, tau)
    assert scaled.objective == pytest.approx(scale * base.objective, rel=1e-8)
    shifted = qr_fit(X, y + X @ [shift, shift, 0.0], tau)
    assert shifted.objective == pytest.approx(base.objective, rel=1e-8, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_median_fit_beats_ols_in_l1(seed):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(50), rng.normal(size=50)])
    y = X @ [1.0, 1.0] + rng.standard_cauchy(50)
    l1_qr = np.abs(y - X @ qr_fit(X, y, 0.5).coefficients).sum()
    l1_ols = np.abs(y - X @ ols_fit(X, y).coefficients).sum()
    assert l1_qr <= l1_ols * (1 + 1e-12)


def test_vertex_method_agrees():
    rng = np.random.default_rng(7)
    X = np.column_stack([np.ones(300), rng.normal(size=(300, 3))])
    y = X @ [1.0, 2.0, 0.0, -1.0] + rng.normal(size=300)
    for tau in (0.1, 0.5, 0.9):
        a = qr_fit(X, y, tau)
        b = qr_fit(X, y, tau, method="vertex")
        assert b.objective == pytest.approx(a.objective, rel=1e-10)
