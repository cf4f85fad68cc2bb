"""Least squares and check-loss quantile regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateSampleError, SingularDesignError
from .model import check_tau


def check_loss(tau, u):
    """Pinball loss ``u * (tau - 1{u < 0})``; works elementwise on arrays."""
    u = np.asarray(u, dtype=float)
    out = u * (tau - (u < 0))
    return float(out) if out.ndim == 0 else out


def _check_design(X, y, *, exact_ok=False):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X {X.shape} and y {y.shape} are not row-aligned")
    n, p = X.shape
    if n < p or (n == p and not exact_ok):
        raise DegenerateSampleError(f"need more observations than parameters (n={n}, p={p})")
    if np.linalg.matrix_rank(X) < p:
        raise SingularDesignError("design matrix is rank deficient")
    return X, y


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    sigma2_hat: float
    cov: np.ndarray
    fitted: np.ndarray

    @property
    def df_resid(self):
        return self.residuals.shape[0] - self.coefficients.shape[0]

    @property
    def rss(self):
        return float(self.residuals @ self.residuals)


def ols_fit(X, y):
    """Ordinary least squares with classical (homoskedastic) standard errors."""
    X, y = _check_design(X, y)
    n, p = X.shape
    # QR keeps the normal equations well conditioned
    q, r = np.linalg.qr(X)
    beta = np.linalg.solve(r, q.T @ y)
    fitted = X @ beta
    resid = y - fitted
    sigma2 = float(resid @ resid) / (n - p)
    r_inv = np.linalg.solve(r, np.eye(p))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.inf))
    pvals = np.clip(2 * stats.t.sf(np.abs(t), n - p), 0.0, 1.0)
    return OlsResult(beta, se, t, pvals, resid, sigma2, cov, fitted)


@dataclass(frozen=True)
class QrResult:
    tau: float
    coefficients: np.ndarray
    objective: float
    iterations: int
    converged: bool


def qr_fit(X, y, tau, *, method="mm", max_iter=10_000, tol=1e-10, beta0=None):
    """Quantile regression by minimizing the summed check loss.

    A majorize-minimize scheme on the perturbed check loss
    ``rho(r) - eps/2 * log(eps + |r|)`` runs through the schedule
    eps = 1e-2 .. 1e-6 (relative to the residual scale). Each stage is a
    weighted least-squares solve with weights ``1 / (eps + |r|)``. The final
    iterate is then moved to an exact minimizing vertex by simplex-style
    descent along edge directions, so the returned objective is the true
    minimum up to rounding.

    ``method="vertex"`` skips the MM stages and descends from ``beta0`` (or
    the least-squares fit) directly; with a good warm start this is much
    faster and reaches the same minimum. Bootstrap refits use it.
    """
    tau = check_tau(tau)
    X, y = _check_design(X, y, exact_ok=True)
    n, p = X.shape
    beta = np.linalg.lstsq(X, y, rcond=None)[0] if beta0 is None else np.array(beta0, float)
    r = y - X @ beta
    scale = float(np.mean(np.abs(r)))
    if scale == 0.0:
        return QrResult(tau, beta, 0.0, 0, True)
    if method == "vertex":
        beta, obj, pivots, ok = _vertex_descent(X, y, tau, beta, max_iter=max_iter)
        return QrResult(tau, beta, obj, pivots, ok)
    if method != "mm":
        raise ValueError(f"unknown method {method!r}")

    ones_term = (2 * tau - 1) * X.sum(axis=0)
    obj = float(check_loss(tau, r).sum())
    it = 0
    converged = False
    for stage, eps in enumerate(scale * np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])):
        prev_smooth = np.inf
        while it < max_iter:
            it += 1
            w = 1.0 / (eps + np.abs(r))
            A = X.T @ (X * w[:, None])
            b = X.T @ (w * y) + ones_term
            try:
                beta = np.linalg.solve(A, b)
            except np.linalg.LinAlgError:
                raise SingularDesignError("weighted normal equations are singular") from None
            r = y - X @ beta
            smooth = float(check_loss(tau, r).sum() - 0.5 * eps * np.log(eps + np.abs(r)).sum())
            if prev_smooth - smooth <= tol * abs(smooth):
                break
            prev_smooth = smooth
        if it >= max_iter:
            break
        new_obj = float(check_loss(tau, r).sum())
        improvement = obj - new_obj
        obj = new_obj
        if stage == 4 or (stage > 0 and improvement < tol * obj):
            converged = True
            break

    beta, obj, pivots, ok = _vertex_descent(X, y, tau, beta, max_iter=max(max_iter - it, 1))
    return QrResult(tau, beta, obj, it + pivots, converged and ok)


def _initial_basis(X, r):
    """Pick p rows with the smallest |residual| that form a nonsingular block."""
    n, p = X.shape
    basis = []
    q = np.zeros((0, X.shape[1]))
    for i in np.argsort(np.abs(r), kind="stable"):
        v = X[i] - q.T @ (q @ X[i]) if len(basis) else X[i].copy()
        norm = np.linalg.norm(v)
        if norm > 1e-10 * max(np.linalg.norm(X[i]), 1e-300):
            basis.append(int(i))
            q = np.vstack([q, v / norm])
            if len(basis) == p:
                return np.array(basis)
    raise SingularDesignError("no nonsingular basis among the observations")


def _vertex_descent(X, y, tau, beta, max_iter):
    """Exact descent over vertices of the check-loss polyhedron.

    At a vertex the fit interpolates p observations (the basis). Each edge
    direction frees one basis observation; the objective along an edge is
    convex piecewise linear, so an exact line search stops at the
    breakpoint where its slope turns nonnegative.
    """
    n, p = X.shape
    r0 = y - X @ beta
    h = _initial_basis(X, r0)
    beta = np.linalg.solve(X[h], y[h])
    r = y - X @ beta
    obj = float(check_loss(tau, r).sum())
    # residual tolerance for treating an observation as interpolated
    zero_tol = 1e-11 * max(float(np.max(np.abs(y))), 1.0)
    for it in range(1, max_iter + 1):
        try:
            D = np.linalg.inv(X[h])
        except np.linalg.LinAlgError:
            raise SingularDesignError("basis became singular") from None
        A = X @ D  # n x p: change in fit per unit move along each edge
        zero = np.abs(r) <= zero_tol
        psi = tau - (r < 0)
        best = None
        for s in (1.0, -1.0):
            a = s * A
            # one-sided slope of the objective at t = 0+ for each direction
            slope0 = np.where(zero[:, None], np.maximum(-tau * a, (1 - tau) * a),
                              -a * psi[:, None]).sum(axis=0)
            scale = np.abs(a).sum(axis=0)
            for j in range(p):
                if slope0[j] < -1e-12 * scale[j] and (best is None or slope0[j] < best[0]):
                    best = (slope0[j], j, s)
        if best is None:
            return beta, obj, it - 1, True
        slope, j, s = best
        d = s * D[:, j]
        a = s * A[:, j]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(~zero & (a != 0), r / a, -1.0)
        cand = np.flatnonzero(t > 0)
        if cand.size == 0:
            # unbounded descent cannot happen for a proper design
            raise SingularDesignError("check-loss objective unbounded along an edge")
        order = cand[np.argsort(t[cand], kind="stable")]
        cum = slope + np.cumsum(np.abs(a[order]))
        k = int(np.searchsorted(cum, 0.0, side="left"))
        k = min(k, order.size - 1)
        enter = int(order[k])
        step = t[enter]
        new_beta = beta + step * d
        new_r = y - X @ new_beta
        new_obj = float(check_loss(tau, new_r).sum())
        if new_obj > obj + 1e-12 * max(obj, 1.0):
            return beta, obj, it - 1, True
        h = h.copy()
        h[j] = enter
        beta = np.linalg.solve(X[h], y[h])
        r = y - X @ beta
        obj = float(check_loss(tau, r).sum())
    return beta, obj, max_iter, False
