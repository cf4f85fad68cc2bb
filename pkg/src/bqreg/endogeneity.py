"""Two-stage least squares, BQR on first-stage fitted values, and IV diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .bayes import bqr_fit
from .classical import OlsResult, _check_design, ols_fit
from .errors import DegenerateSampleError, MissingColumnError, SingularDesignError, UsageError
from .model import INTERCEPT, TestResult, _assemble, apply_transforms, design_rows

# Stock-Yogo critical value for one endogenous regressor and one excluded
# instrument at 10% maximal IV size.
STOCK_YOGO_CRITICAL = 16.38


class IvDesign(NamedTuple):
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    names: list
    instrument_names: list
    endogenous_index: int
    excluded_indices: list


def build_iv_design(dataset, spec):
    """Row-aligned ``X``, ``y`` and instrument matrix ``Z``.

    ``Z`` holds the intercept (if the model has one), every exogenous
    regressor, the one-period lag of the response and any declared extra
    instruments. The first usable row is lost to the lag.
    """
    block = spec.instrument_block
    if block is None:
        raise UsageError("model has no instrument block")
    for name in spec.columns:
        if name not in dataset.columns:
            raise MissingColumnError(name)
    dataset = apply_transforms(dataset, spec)
    response = dataset.column(spec.response)
    lagged = np.r_[np.nan, response[:-1]]
    rows = design_rows(dataset, spec.columns) & np.isfinite(lagged)
    X, y, names = _assemble(dataset, spec, rows)

    cols, zn = [], []
    if spec.intercept:
        cols.append(np.ones(X.shape[0]))
        zn.append(INTERCEPT)
    for name in spec.regressors:
        if name != block.endogenous:
            cols.append(dataset.column(name)[rows])
            zn.append(dataset.label(name))
    n_included = len(cols)
    cols.append(lagged[rows])
    zn.append(f"lag1({dataset.label(spec.response)})")
    for name in block.instruments:
        cols.append(dataset.column(name)[rows])
        zn.append(dataset.label(name))
    Z = np.column_stack(cols)
    if Z.shape[0] <= Z.shape[1]:
        raise DegenerateSampleError(
            f"instrument matrix needs more rows than columns (n={Z.shape[0]}, q={Z.shape[1]})"
        )
    endo = spec.regressors.index(block.endogenous) + int(spec.intercept)
    excluded = list(range(n_included, Z.shape[1]))
    return IvDesign(X, y, Z, names, zn, endo, excluded)


def build_instruments(dataset, spec):
    """Instrument matrix for ``spec``; see :func:`build_iv_design`."""
    return build_iv_design(dataset, spec).Z


@dataclass(frozen=True)
class TslsResult:
    coefficients: np.ndarray
    first_stage: OlsResult
    second_stage: OlsResult
    fitted_endogenous: np.ndarray
    residuals: np.ndarray
    sargan: TestResult
    weak_id_F: float
    weak_id_pass: bool | None


def _excluded_columns(X, Z):
    """Indices of Z columns that do not appear verbatim among the X columns."""
    return [j for j in range(Z.shape[1])
            if not any(np.array_equal(Z[:, j], X[:, k]) for k in range(X.shape[1]))]


def tsls_fit(X, y, endogenous_index, Z, excluded_indices=None):
    """2SLS with a single endogenous regressor.

    Stage one regresses the endogenous column on ``Z``; stage two is OLS of
    ``y`` on ``X`` with that column replaced by its fitted values. Stage-two
    standard errors come from the substituted design without the 2SLS
    variance correction and are approximate.
    """
    X, y = _check_design(X, y)
    Z, _ = _check_design(Z, y)
    n, p = X.shape
    if Z.shape[1] < p:
        raise UsageError(f"under-identified: {Z.shape[1]} instruments for {p} parameters")
    first = ols_fit(Z, X[:, endogenous_index])
    X_hat = X.copy()
    X_hat[:, endogenous_index] = first.fitted
    try:
        second = ols_fit(X_hat, y)
    except SingularDesignError:
        raise SingularDesignError("second-stage design is rank deficient") from None
    beta = second.coefficients
    resid = y - X @ beta
    sargan = sargan_test(resid, Z, n_params=p)
    if excluded_indices is None:
        excluded_indices = _excluded_columns(X, Z)
    if len(excluded_indices):
        f = weak_id_F(first, excluded_indices)
        flag = bool(f > STOCK_YOGO_CRITICAL)
    else:
        f, flag = float("nan"), None
    return TslsResult(beta, first, second, first.fitted, resid, sargan, f, flag)


def sargan_test(residuals, Z, n_params):
    """Sargan over-identification statistic ``n * R^2`` of residuals on ``Z``.

    Degrees of freedom are ``q - n_params``; an exactly identified model
    reports a zero statistic with p-value one.
    """
    u = np.asarray(residuals, float)
    Z = np.asarray(Z, float)
    if u.shape[0] != Z.shape[0]:
        raise UsageError("residuals and instruments are not row-aligned")
    n, q = Z.shape
    df = q - int(n_params)
    if df < 0:
        raise UsageError("more parameters than instruments")
    if df == 0:
        return TestResult("Sargan-Hansen", 0.0, 0, 1.0)
    coef = np.linalg.lstsq(Z, u, rcond=None)[0]
    rss = float(np.sum((u - Z @ coef) ** 2))
    has_const = np.any(np.all(Z == Z[0], axis=0) & (Z[0] != 0))
    tss = float(np.sum((u - u.mean()) ** 2)) if has_const else float(u @ u)
    r2 = 0.0 if tss == 0 else max(0.0, 1.0 - rss / tss)
    stat = n * r2
    return TestResult("Sargan-Hansen", stat, df, float(np.clip(stats.chi2.sf(stat, df), 0, 1)))


def weak_id_F(first_stage, excluded_instrument_indices):
    """Joint F statistic for the excluded instruments in the first stage."""
    idx = np.asarray(excluded_instrument_indices, dtype=int)
    if idx.size < 1:
        raise UsageError("need at least one excluded instrument")
    b = first_stage.coefficients[idx]
    V = first_stage.cov[np.ix_(idx, idx)]
    return float(b @ np.linalg.solve(V, b) / idx.size)


def substitute_endogenous(X, endogenous_index, Z):
    """Replace the endogenous column of ``X`` by its first-stage fitted values."""
    x = np.asarray(X, dtype=float)[:, endogenous_index]
    first = ols_fit(Z, x)
    X_hat = np.array(X, dtype=float)
    # a column inside the span of Z projects onto itself; keep it exactly
    if first.rss > 1e-24 * float(x @ x):
        X_hat[:, endogenous_index] = first.fitted
    return X_hat, first


def bqr_2sls_arrays(X, y, endogenous_index, Z, tau, prior=None, cfg=None, *, names=None):
    X_hat, _ = substitute_endogenous(X, endogenous_index, Z)
    return bqr_fit(X_hat, y, tau, prior, cfg, names=names)


def bqr_2sls(dataset, spec, tau, prior=None, cfg=None):
    """BQR at ``tau`` after substituting first-stage fitted values."""
    d = build_iv_design(dataset, spec)
    return bqr_2sls_arrays(d.X, d.y, d.endogenous_index, d.Z, tau, prior, cfg, names=d.names)
