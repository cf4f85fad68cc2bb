"""Run every requested estimator over a quantile grid and collect the results."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..bayes import BqrPrior, McmcConfig, bqr_fit, summarize_chain
from ..classical import ols_fit, qr_fit
from ..endogeneity import STOCK_YOGO_CRITICAL, build_iv_design, bqr_2sls_arrays, tsls_fit
from ..errors import BqregError, UsageError
from ..inference import BootstrapConfig, slope_equality_tests
from ..model import (
    DEFAULT_TAU_GRID, INTERCEPT, CoefficientRow, CoefficientTable, TestResult, build_design, check_tau,
)
from ..model import apply_transforms

ESTIMATORS = ("ols", "qr", "bqr", "tsls", "bqr_2sls")
IV_ESTIMATORS = ("tsls", "bqr_2sls")
_SEED_TAGS = {name: k for k, name in enumerate(ESTIMATORS)}
_BOOT_TAG = 99


def derive_seed(seed, *tags):
    """Independent 64-bit seed for one (estimator, quantile) task."""
    ss = np.random.SeedSequence([int(seed), *map(int, tags)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class StudyConfig:
    seed: int = 0
    draws: int = 11_000
    burn_in: int = 1_000
    thin: int = 1
    beta_variance: float = 1e4
    sigma_shape: float = 0.01
    sigma_rate: float = 0.01
    interval_mass: float = 0.9
    bootstrap: int = 200
    slope_pairs: tuple = ((0.1, 0.9),)

    def mcmc(self, *tags):
        return McmcConfig(self.draws, self.burn_in, self.thin, derive_seed(self.seed, *tags))

    def prior(self, p):
        return BqrPrior(np.zeros(p), self.beta_variance, self.sigma_shape, self.sigma_rate)


@dataclass
class StudyResult:
    table: CoefficientTable
    tests: list
    chains: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _context(err, where):
    err.args = (f"{where}: {err}",)
    return err


def point_rows(estimator, ols, names, interval_mass):
    """Rows for a least-squares fit: t intervals and two-sided t p-values."""
    crit = stats.t.ppf(0.5 + interval_mass / 2, ols.df_resid)
    rows = []
    for k, name in enumerate(names):
        b, se = float(ols.coefficients[k]), float(ols.std_errors[k])
        rows.append(CoefficientRow(estimator, name, None, b, b - crit * se, b + crit * se,
                                   float(ols.p_values[k])))
    return rows


def run_study(dataset, spec, tau_grid=DEFAULT_TAU_GRID, estimators=("ols", "bqr"), config=None):
    """Fit the requested estimators and assemble one coefficient table.

    OLS and 2SLS are fit once; QR, BQR and BQR-2SLS once per quantile.
    When a quantile estimator is requested, slope-equality tests run for
    every slope coefficient at each quantile pair in ``config.slope_pairs``.
    Each stochastic task draws from its own seed derived from
    ``config.seed``, so the result does not depend on task order.
    """
    config = StudyConfig() if config is None else config
    taus = [check_tau(t) for t in tau_grid]
    estimators = list(dict.fromkeys(estimators))
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise UsageError(f"unknown estimators: {sorted(unknown)}")
    if not estimators:
        raise UsageError("no estimators requested")
    if any(e in IV_ESTIMATORS for e in estimators) and spec.instrument_block is None:
        raise UsageError("2SLS estimators need an instrument block (endogenous variable)")

    X, y, names = build_design(dataset, spec)
    table = CoefficientTable()
    tests = []
    chains = {}
    meta = {"response": apply_transforms(dataset, spec).label(spec.response), "n": int(X.shape[0]),
            "regressors": names, "taus": taus, "estimators": estimators}

    if "ols" in estimators:
        try:
            table.extend(point_rows("ols", ols_fit(X, y), names, config.interval_mass))
        except BqregError as e:
            raise _context(e, "ols")
    if "qr" in estimators:
        for tau in taus:
            try:
                fit = qr_fit(X, y, tau)
            except BqregError as e:
                raise _context(e, f"qr at tau={tau:g}")
            table.extend(CoefficientRow("qr", name, tau, float(b), float(b), float(b), None)
                         for name, b in zip(names, fit.coefficients))
    if "bqr" in estimators:
        prior = config.prior(X.shape[1])
        for k, tau in enumerate(taus):
            try:
                chain = bqr_fit(X, y, tau, prior, config.mcmc(_SEED_TAGS["bqr"], k), names=names)
            except BqregError as e:
                raise _context(e, f"bqr at tau={tau:g}")
            chains[("bqr", tau)] = chain
            table.extend(summarize_chain(chain, config.interval_mass, estimator="bqr"))

    if any(e in IV_ESTIMATORS for e in estimators):
        iv = build_iv_design(dataset, spec)
        meta["n_iv"] = int(iv.X.shape[0])
        try:
            ts = tsls_fit(iv.X, iv.y, iv.endogenous_index, iv.Z, iv.excluded_indices)
        except BqregError as e:
            raise _context(e, "tsls")
        if "tsls" in estimators:
            table.extend(point_rows("tsls", ts.second_stage, iv.names, config.interval_mass))
        if "bqr_2sls" in estimators:
            prior = config.prior(iv.X.shape[1])
            for k, tau in enumerate(taus):
                try:
                    chain = bqr_2sls_arrays(iv.X, iv.y, iv.endogenous_index, iv.Z, tau, prior,
                                            config.mcmc(_SEED_TAGS["bqr_2sls"], k), names=iv.names)
                except BqregError as e:
                    raise _context(e, f"bqr_2sls at tau={tau:g}")
                chains[("bqr_2sls", tau)] = chain
                table.extend(summarize_chain(chain, config.interval_mass, estimator="bqr_2sls"))
        tests.append(ts.sargan)
        k_ex = len(iv.excluded_indices)
        df2 = iv.Z.shape[0] - iv.Z.shape[1]
        verdict = "pass" if ts.weak_id_pass else "fail"
        tests.append(TestResult(
            "Stock-Yogo weak identification F", ts.weak_id_F, k_ex,
            float(stats.f.sf(ts.weak_id_F, k_ex, df2)),
            note=f"critical value {STOCK_YOGO_CRITICAL}: {verdict}",
        ))

    slope_idx = [k for k in range(len(names)) if not (spec.intercept and k == 0)]
    quantile_fits = any(e in ("qr", "bqr", "bqr_2sls") for e in estimators)
    for j, (lo, hi) in enumerate(config.slope_pairs):
        if not (slope_idx and quantile_fits):
            break
        boot = BootstrapConfig(config.bootstrap, derive_seed(config.seed, _BOOT_TAG, j))
        try:
            results = slope_equality_tests(X, y, lo, hi, slope_idx, boot)
        except BqregError as e:
            raise _context(e, f"slope test {lo:g} vs {hi:g}")
        for k, res in zip(slope_idx, results):
            tests.append(dataclasses.replace(res, name=f"{res.name}: {names[k]}"))

    return StudyResult(table, tests, chains, meta)


def intercept_last(names):
    return [n for n in names if n != INTERCEPT] + [n for n in names if n == INTERCEPT]
