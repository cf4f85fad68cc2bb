"""Bayesian quantile regression with an asymmetric Laplace working likelihood.

The asymmetric Laplace error with scale ``sigma`` is written as a location-scale
mixture of normals,

    y_i | z_i ~ N(x_i'beta + theta * z_i, psi2 * sigma * z_i),
    z_i ~ Exponential(mean sigma),

which gives conjugate full conditionals for beta (normal), the latent z_i
(generalized inverse Gaussian with index 1/2) and sigma (inverse gamma).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .classical import _check_design, check_loss
from .errors import DomainError, InsufficientDrawsError, SamplerDivergenceError, UsageError
from .model import CoefficientRow, PosteriorChain, check_tau


def asl_log_density(u, tau, sigma):
    """Log density of the asymmetric Laplace law ASL(0, sigma, tau) at ``u``."""
    if not sigma > 0:
        raise DomainError(f"scale must be positive, got {sigma!r}")
    return np.log(tau * (1 - tau) / sigma) - check_loss(tau, u) / sigma


def mixture_constants(tau):
    """Location and variance multipliers ``(theta, psi2)`` of the normal mixture."""
    tau = float(tau)
    theta = (1 - 2 * tau) / (tau * (1 - tau))
    psi2 = 2 / (tau * (1 - tau))
    return theta, psi2


@dataclass(frozen=True)
class BqrPrior:
    """beta ~ N(beta_mean, beta_variance * I); sigma ~ InvGamma(shape, rate)."""

    beta_mean: np.ndarray
    beta_variance: float = 1e4
    sigma_shape: float = 0.01
    sigma_rate: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "beta_mean", np.atleast_1d(np.asarray(self.beta_mean, float)))
        if not (self.beta_variance > 0 and self.sigma_shape > 0 and self.sigma_rate > 0):
            raise UsageError("prior variance, shape and rate must be positive")

    @classmethod
    def default(cls, p):
        return cls(np.zeros(p))


@dataclass(frozen=True)
class McmcConfig:
    """Sampler settings.

    ``draws`` is the number of retained draws; the chain runs
    ``burn_in + draws * thin`` Gibbs sweeps in total.
    """

    draws: int = 11_000
    burn_in: int = 1_000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1 or self.burn_in < 0 or self.thin < 1:
            raise UsageError("need draws >= 1, burn_in >= 0 and thin >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")


def _inverse_gaussian(rng, mean, shape):
    """Inverse Gaussian draws by the Michael-Schucany-Haas transformation.

    The smaller root is taken as ``mean**2 / larger_root`` to avoid the
    cancellation in the textbook formula when ``mean`` is large.
    """
    nu = rng.standard_normal(mean.shape) ** 2
    m_nu = mean * nu
    big = mean + mean * m_nu / (2 * shape) + mean / (2 * shape) * np.sqrt(4 * shape * m_nu + m_nu**2)
    small = mean * (mean / big)
    accept_small = rng.random(mean.shape) * (mean + small) <= mean
    return np.where(accept_small, small, big)


def bqr_fit(X, y, tau, prior=None, cfg=None, *, names=None):
    """Gibbs sampler for Bayesian quantile regression at level ``tau``.

    Returns the post-burn-in, thinned draws as a :class:`PosteriorChain`.
    Output is a deterministic function of the inputs and ``cfg.seed``.
    """
    tau = check_tau(tau)
    X, y = _check_design(X, y)
    n, p = X.shape
    prior = BqrPrior.default(p) if prior is None else prior
    cfg = McmcConfig() if cfg is None else cfg
    if prior.beta_mean.shape != (p,):
        raise UsageError(f"prior mean has length {prior.beta_mean.shape[0]}, expected {p}")
    names = tuple(names) if names is not None else tuple(f"x{k}" for k in range(p))

    theta, psi2 = mixture_constants(tau)
    rng = np.random.default_rng(np.uint64(cfg.seed))
    prior_prec = 1.0 / prior.beta_variance
    prior_shift = prior.beta_mean * prior_prec
    shape_post = prior.sigma_shape + 1.5 * n
    y_scale = max(float(np.mean(np.abs(y - np.median(y)))), 1e-12)
    r_floor = 1e-12 * y_scale

    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    sigma = max(float(np.mean(check_loss(tau, y - X @ beta))), r_floor)
    z = np.full(n, sigma)

    total = cfg.burn_in + cfg.draws * cfg.thin
    beta_out = np.empty((cfg.draws, p))
    sigma_out = np.empty(cfg.draws)
    keep = 0
    for it in range(1, total + 1):
        # beta | z, sigma
        w = 1.0 / (psi2 * sigma * z)
        prec = X.T @ (X * w[:, None])
        prec[np.diag_indices(p)] += prior_prec
        rhs = X.T @ (w * (y - theta * z)) + prior_shift
        try:
            chol = linalg.cholesky(prec, lower=True)
        except linalg.LinAlgError:
            raise SamplerDivergenceError(it, "posterior precision not positive definite") from None
        mean = linalg.cho_solve((chol, True), rhs)
        beta = mean + linalg.solve_triangular(chol.T, rng.standard_normal(p), lower=False)

        # z_i | beta, sigma ~ GIG(1/2, r_i^2 / (psi2 sigma), theta^2 / (psi2 sigma) + 2 / sigma);
        # its reciprocal is inverse Gaussian
        r = np.maximum(np.abs(y - X @ beta), r_floor)
        gamma2 = theta**2 / (psi2 * sigma) + 2.0 / sigma
        ig_mean = np.sqrt(gamma2 * psi2 * sigma) / r
        z = 1.0 / _inverse_gaussian(rng, ig_mean, gamma2)

        # sigma | beta, z
        resid = y - X @ beta - theta * z
        rate = prior.sigma_rate + float(np.sum(resid**2 / (2 * psi2 * z) + z))
        sigma = rate / rng.gamma(shape_post)

        if not (np.all(np.isfinite(beta)) and np.isfinite(sigma) and sigma > 0
                and np.all(np.isfinite(z)) and np.all(z > 0)):
            raise SamplerDivergenceError(it)
        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            beta_out[keep] = beta
            sigma_out[keep] = sigma
            keep += 1

    return PosteriorChain(tau, beta_out, sigma_out, cfg.burn_in, cfg.thin, int(cfg.seed), names)


def summarize_chain(chain, interval_mass=0.9, *, estimator="bqr"):
    """Posterior mean, equal-tailed interval and two-sided tail probability.

    The tail probability ``2 * min(P(b > 0), P(b < 0))`` plays the role of
    a two-sided p-value for the star convention.
    """
    if not 0 < interval_mass < 1:
        raise UsageError("interval_mass must lie in (0, 1)")
    draws = chain.beta_draws
    alpha = (1 - interval_mass) / 2
    lo, hi = np.quantile(draws, [alpha, 1 - alpha], axis=0)
    est = draws.mean(axis=0)
    pos = (draws > 0).mean(axis=0)
    neg = (draws < 0).mean(axis=0)
    prob = np.clip(2 * np.minimum(pos, neg), 0.0, 1.0)
    rows = []
    for k, name in enumerate(chain.regressor_names):
        rows.append(CoefficientRow(
            estimator, name, chain.tau, float(est[k]),
            float(min(lo[k], est[k])), float(max(hi[k], est[k])), float(prob[k]),
        ))
    return rows


def posterior_median(chain):
    return np.median(chain.beta_draws, axis=0)


def chain_diagnostics(chains, split=True, *, min_draws=100):
    """Potential scale reduction factor (R-hat) for every coefficient.

    With ``split`` each chain is cut in half first, so a single chain can be
    checked. Zero within- and between-chain variance is reported as 1.0.
    """
    chains = list(chains)
    if not chains:
        raise InsufficientDrawsError("no chains supplied")
    length = min(c.n_draws for c in chains)
    if length < min_draws:
        raise InsufficientDrawsError(f"chains need at least {min_draws} draws, shortest has {length}")
    pieces = []
    for c in chains:
        d = c.beta_draws[:length]
        if split:
            half = length // 2
            pieces += [d[:half], d[length - half:]]
        else:
            pieces.append(d)
    if len(pieces) < 2:
        raise InsufficientDrawsError("R-hat needs two or more (split) chains")
    stack = np.stack(pieces)  # m x n x p
    n = stack.shape[1]
    within = stack.var(axis=1, ddof=1).mean(axis=0)
    between = n * stack.mean(axis=1).var(axis=0, ddof=1)
    rhat = np.empty(stack.shape[2])
    for k in range(rhat.size):
        if within[k] <= 0:
            rhat[k] = 1.0 if between[k] <= 0 else np.inf
        else:
            var_plus = (n - 1) / n * within[k] + between[k] / n
            rhat[k] = np.sqrt(var_plus / within[k])
    return rhat
