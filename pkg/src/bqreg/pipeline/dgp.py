"""Synthetic data-generating processes with analytically known answers.

``location_scale``: y = x'beta + (x'gamma) e with e i.i.d. standard normal
or standard Laplace, so the conditional tau-quantile is linear with
coefficients ``beta + gamma * F^{-1}(tau)``.

``simultaneous``: y = x'beta + u where the first non-constant regressor is
endogenous, x1 = strength * (z_1 + ... + z_m) + v with corr(u, v) = rho.
The z_k are valid excluded instruments unless ``violation`` loads the last
one on u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import UsageError
from ..model import Dataset

START_DATE = np.datetime64("2000-01-01")
MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class DgpConfig:
    kind: str = "location_scale"
    n: int = 500
    beta: tuple = (1.0, 1.0)
    gamma: tuple = (1.0, 0.0)
    noise: str = "normal"
    rho: float = 0.0
    seed: int = 0
    instruments: int = 1
    strength: float = 1.0
    violation: float = 0.0
    x_high: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if self.kind not in ("location_scale", "simultaneous"):
            raise UsageError(f"unknown DGP kind {self.kind!r}")
        if self.n < 50:
            raise UsageError("DGP needs n >= 50")
        if self.noise not in ("normal", "laplace"):
            raise UsageError(f"unknown noise {self.noise!r}")
        if len(self.beta) < 1:
            raise UsageError("beta must have at least an intercept")
        if self.kind == "location_scale" and len(self.gamma) != len(self.beta):
            raise UsageError("gamma must have the same length as beta")
        if self.kind == "simultaneous":
            if not abs(self.rho) < 1:
                raise UsageError("simultaneous DGP requires |rho| < 1")
            if len(self.beta) < 2:
                raise UsageError("simultaneous DGP needs an intercept and an endogenous slope")
            if self.instruments < 1:
                raise UsageError("simultaneous DGP needs at least one instrument")


@dataclass(frozen=True)
class DgpTruth:
    beta: np.ndarray
    gamma: np.ndarray
    noise: str
    ols_bias: float | None = None

    def quantile_coefficients(self, tau):
        """True coefficients of the conditional tau-quantile (location-scale)."""
        return self.beta + self.gamma * noise_quantile(self.noise, tau)


def noise_quantile(noise, tau):
    dist = stats.norm if noise == "normal" else stats.laplace
    return float(dist.ppf(tau))


def _noise(rng, noise, n):
    return rng.standard_normal(n) if noise == "normal" else rng.laplace(0.0, 1.0, n)


def _dates(n):
    return START_DATE + np.arange(n)


def regressor_names(p):
    return [f"x{k}" for k in range(1, p)]


def simulate_dgp(cfg):
    """Draw one dataset; returns ``(dataset, truth)``.

    Columns are ``y`` and ``x1..x{p-1}`` (the intercept is implied), plus
    ``z1..zm`` for the simultaneous kind.
    """
    rng = np.random.default_rng(np.uint64(cfg.seed))
    p = len(cfg.beta)
    beta = np.array(cfg.beta)
    if cfg.kind == "location_scale":
        gamma = np.array(cfg.gamma)
        for _ in range(MAX_ATTEMPTS):
            X = np.column_stack([np.ones(cfg.n), rng.uniform(0.0, cfg.x_high, (cfg.n, p - 1))])
            scale = X @ gamma
            if np.all(scale > 0) or not np.any(gamma):
                break
        else:
            raise UsageError(f"x'gamma <= 0 in all {MAX_ATTEMPTS} attempts; check gamma")
        e = _noise(rng, cfg.noise, cfg.n)
        y = X @ beta + scale * e
        cols = {"y": y, **{f"x{k}": X[:, k] for k in range(1, p)}}
        return Dataset(_dates(cfg.n), cols), DgpTruth(beta, gamma, cfg.noise)

    # simultaneous system
    m = cfg.instruments
    Zx = rng.standard_normal((cfg.n, m))
    W = rng.uniform(0.0, cfg.x_high, (cfg.n, p - 2))
    shocks = rng.standard_normal((cfg.n, 2))
    u = shocks[:, 0]
    v = cfg.rho * u + np.sqrt(1 - cfg.rho**2) * shocks[:, 1]
    Zx[:, -1] += cfg.violation * u
    x1 = cfg.strength * Zx.sum(axis=1) + 0.5 * W.sum(axis=1) + v
    X = np.column_stack([np.ones(cfg.n), x1, W])
    y = X @ beta + u
    cols = {"y": y, **{f"x{k}": X[:, k] for k in range(1, p)},
            **{f"z{k + 1}": Zx[:, k] for k in range(m)}}
    # plim OLS bias on the endogenous slope: cov(x1, u) over the residual
    # variance of x1 after partialling out the exogenous regressors
    var_resid = cfg.strength**2 * m + 1.0
    bias = cfg.rho / var_resid if cfg.violation == 0 else None
    return Dataset(_dates(cfg.n), cols), DgpTruth(beta, np.zeros(p), "normal", bias)
