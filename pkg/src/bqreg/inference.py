"""Cross-quantile slope-equality tests by pairs bootstrap.

The statistic is a Wald form in the difference of quantile-regression
slopes, with the variance of that difference estimated by resampling rows
of ``(X, y)``. Within a replication every quantile is refit on the same
resampled rows, and each replication draws its indices from its own
derived seed, so results do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .classical import _check_design, qr_fit
from .errors import DegenerateVarianceError, SingularDesignError, UsageError
from .model import TestResult, check_tau

SLOPE_TEST_NAME = "slope-equality (bootstrap Wald)"


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.replications < 100:
            raise UsageError("bootstrap needs at least 100 replications")


def bootstrap_indices(n, seed, replication):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(replication)]))
    return rng.integers(0, n, size=n)


def bootstrap_coefficients(X, y, taus, cfg):
    """Full-sample and pairs-bootstrap QR coefficients at each tau.

    Returns ``(point, draws)`` with shapes ``(K, p)`` and ``(B, K, p)``.
    """
    n = X.shape[0]
    full = [qr_fit(X, y, t) for t in taus]
    point = np.array([f.coefficients for f in full])
    draws = np.empty((cfg.replications, len(taus), X.shape[1]))
    for b in range(cfg.replications):
        idx = bootstrap_indices(n, cfg.seed, b)
        Xb, yb = X[idx], y[idx]
        for j, t in enumerate(taus):
            try:
                fit = qr_fit(Xb, yb, t, method="vertex", beta0=point[j])
            except SingularDesignError:
                # rank-deficient resample; keeping the replication index fixed
                # preserves order independence, so reuse the full-sample fit
                draws[b, j] = point[j]
                continue
            draws[b, j] = fit.coefficients
    return point, draws


def _sorted_pair(tau_low, tau_high):
    tau_low, tau_high = check_tau(tau_low), check_tau(tau_high)
    if tau_low == tau_high:
        raise UsageError("quantile levels must differ")
    return tuple(sorted((tau_low, tau_high)))


def _pair_statistic(point, draws, k, taus):
    diff = point[1, k] - point[0, k]
    boot = draws[:, 1, k] - draws[:, 0, k]
    var = float(np.var(boot, ddof=1))
    # relative to the coefficient's own size, so rescaling y cannot trip it
    if not var > 1e-12 * float(np.mean(draws[:, :, k] ** 2)):
        raise DegenerateVarianceError(f"bootstrap variance of the slope difference is {var:g}")
    stat = float(diff**2 / var)
    return TestResult(SLOPE_TEST_NAME, stat, 1, float(stats.chi2.sf(stat, 1)),
                      note=f"tau {taus[0]:g} vs {taus[1]:g}")


def slope_equality_test(X, y, tau_low, tau_high, coefficient_index, cfg=None):
    """Test equality of one coefficient at two quantile levels.

    Returns a chi-square(1) Wald statistic built from the bootstrap
    variance of the slope difference. The two levels may be given in
    either order.
    """
    return slope_equality_tests(X, y, tau_low, tau_high, [coefficient_index], cfg)[0]


def slope_equality_tests(X, y, tau_low, tau_high, coefficient_indices, cfg=None):
    """:func:`slope_equality_test` for several coefficients on one bootstrap."""
    cfg = BootstrapConfig() if cfg is None else cfg
    taus = _sorted_pair(tau_low, tau_high)
    X, y = _check_design(X, y)
    point, draws = bootstrap_coefficients(X, y, taus, cfg)
    return [_pair_statistic(point, draws, k, taus) for k in coefficient_indices]


def joint_slope_test(X, y, tau_grid, coefficient_index, cfg=None):
    """Wald test that one coefficient is equal at every quantile of the grid.

    Uses successive differences and the bootstrap covariance of the
    coefficient across quantiles. A singular covariance falls back to the
    pseudo-inverse with degrees of freedom equal to its numerical rank.
    A two-point grid reproduces :func:`slope_equality_test` exactly.
    """
    cfg = BootstrapConfig() if cfg is None else cfg
    taus = sorted(check_tau(t) for t in tau_grid)
    if len(taus) < 2 or len(set(taus)) != len(taus):
        raise UsageError("need at least two distinct quantile levels")
    X, y = _check_design(X, y)
    point, draws = bootstrap_coefficients(X, y, taus, cfg)
    point, draws = point[:, coefficient_index], draws[:, :, coefficient_index]
    K = len(taus)
    R = np.eye(K)[1:] - np.eye(K)[:-1]
    V = R @ np.cov(draws, rowvar=False, ddof=1).reshape(K, K) @ R.T
    d = R @ point
    eig = np.linalg.eigvalsh(V)
    if eig.max() <= 0:
        raise DegenerateVarianceError("bootstrap covariance is zero")
    rank = int(np.sum(eig > eig.max() * 1e-10))
    note = f"{K} quantiles"
    if rank < K - 1:
        note += f"; pseudo-inverse, df reduced to {rank}"
    if K == 2:
        stat = float(d[0] ** 2 / V[0, 0])
    else:
        stat = float(d @ np.linalg.pinv(V, rcond=1e-10, hermitian=True) @ d)
    stat = max(stat, 0.0)
    return TestResult("joint slope-equality (bootstrap Wald)", stat, rank,
                      float(stats.chi2.sf(stat, rank)), note=note)
