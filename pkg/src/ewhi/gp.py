"""Gaussian process surrogate with anisotropic Matern 5/2 kernel.

One model per scalar output (objective or constraint).  Hyperparameters are
chosen by maximizing the marginal likelihood times independent log-normal
priors on the signal variance and the per-dimension lengthscales, with the
constant mean profiled out in closed form (generalized least squares).  The
optimization runs in log-parameter space with analytic gradients and a small
number of restarts drawn from the prior.

The kernel matrix is K = signal_variance * (C(lengthscales) + nugget * I).
The nugget is pure jitter: it regularizes the factorization, starting tiny
and escalating only as far as needed, and does not inflate the predictive
variance at new inputs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.special import ndtr

logger = logging.getLogger(__name__)

__all__ = [
    "HyperPrior",
    "KernelParams",
    "GpModel",
    "PredictiveDistribution",
    "FitError",
    "matern52",
    "fit",
    "predict",
    "predict_batch",
    "prob_dominates",
    "prob_feasible",
]

SQRT5 = np.sqrt(5.0)
NUGGET_BASE = 1e-12
NUGGET_MAX = 1e-6


class FitError(RuntimeError):
    """Raised when no hyperparameter start yields a usable model."""


@dataclass(frozen=True)
class HyperPrior:
    """Independent log-normal priors in natural-log space.

    ``log_ls_mean`` holds the log of the median lengthscale per input
    dimension; ``log_var_mean`` the log of the median signal variance.
    """

    log_ls_mean: np.ndarray
    log_ls_sd: float
    log_var_mean: float
    log_var_sd: float

    @classmethod
    def from_data(cls, X, y) -> "HyperPrior":
        """Default prior: lengthscale median 0.3 of each input range,
        variance median var(y), both with log-sd 1."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float)
        ranges = X.max(axis=0) - X.min(axis=0)
        ranges = np.where(ranges > 0, ranges, 1.0)
        v = float(np.var(y))
        if not np.isfinite(v) or v <= 0:
            v = 1.0
        return cls(
            log_ls_mean=np.log(0.3 * ranges),
            log_ls_sd=1.0,
            log_var_mean=float(np.log(v)),
            log_var_sd=1.0,
        )


@dataclass(frozen=True)
class KernelParams:
    signal_variance: float
    lengthscales: np.ndarray
    nugget_fraction: float


@dataclass(frozen=True)
class GpModel:
    """Fitted surrogate holding the training set and factorized kernel."""

    X: np.ndarray
    y: np.ndarray
    mean_constant: float
    params: KernelParams
    chol_lower: np.ndarray  # Cholesky factor of C + nugget * I
    resid_solve: np.ndarray  # (C + nugget I)^{-1} (y - mean)
    log_posterior: float


@dataclass(frozen=True)
class PredictiveDistribution:
    """Independent Gaussian marginals for the outputs at one input point."""

    means: np.ndarray
    sds: np.ndarray

    def __post_init__(self):
        means = np.atleast_1d(np.asarray(self.means, dtype=float))
        sds = np.atleast_1d(np.asarray(self.sds, dtype=float))
        if means.shape != sds.shape:
            raise ValueError("means and sds must have matching shapes")
        if np.any(sds < 0):
            raise ValueError("standard deviations must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)


def _scaled_sq_diffs(X1, X2, lengthscales):
    """Per-dimension squared scaled differences, shape (n1, n2, d)."""
    D = (X1[:, None, :] - X2[None, :, :]) / lengthscales
    return D * D


def matern52(X1, X2, lengthscales) -> np.ndarray:
    """Matern 5/2 correlation matrix between rows of X1 and X2."""
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    lengthscales = np.asarray(lengthscales, dtype=float)
    S = _scaled_sq_diffs(X1, X2, lengthscales).sum(axis=2)
    r = np.sqrt(S)
    return (1.0 + SQRT5 * r + (5.0 / 3.0) * S) * np.exp(-SQRT5 * r)


def _chol_with_escalation(C):
    """Cholesky of C + nugget*I, escalating the nugget tenfold as needed.

    Returns (lower_factor, nugget) or (None, None) if even the largest
    allowed nugget fails.
    """
    n = C.shape[0]
    nugget = NUGGET_BASE
    while nugget <= NUGGET_MAX * (1 + 1e-9):
        try:
            L = cholesky(C + nugget * np.eye(n), lower=True)
            return L, nugget
        except LinAlgError:
            nugget *= 10.0
    return None, None


def _profile_mean(L, y):
    """GLS constant mean and residual quantities given chol(C + eps I).

    Returns (mean, resid, solve, quad) with solve = M^{-1} resid and
    quad = resid^T M^{-1} resid.
    """
    n = y.shape[0]
    ones = np.ones(n)
    My = cho_solve((L, True), y)
    M1 = cho_solve((L, True), ones)
    denom = ones @ M1
    mu = float((ones @ My) / denom)
    resid = y - mu
    solve = My - mu * M1
    quad = float(resid @ solve)
    return mu, resid, solve, quad


def _objective(u, X, y, prior):
    """Negative (log marginal likelihood + log prior) and gradient in u-space.

    u = (log signal_variance, log lengthscale_1, ..., log lengthscale_d).
    The constant mean is profiled out; by the envelope theorem the gradient
    of the concentrated objective equals the partial gradient at the
    optimal mean.
    """
    n, d = X.shape
    sigma2 = np.exp(u[0])
    ls = np.exp(u[1:])
    Dsq = _scaled_sq_diffs(X, X, ls)
    S = Dsq.sum(axis=2)
    r = np.sqrt(S)
    E = np.exp(-SQRT5 * r)
    C = (1.0 + SQRT5 * r + (5.0 / 3.0) * S) * E
    L, nugget = _chol_with_escalation(C)
    if L is None:
        return 1e25, np.zeros_like(u), None
    mu, resid, w, quad = _profile_mean(L, y)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    loglik = -0.5 * (quad / sigma2 + n * np.log(sigma2) + logdet + n * np.log(2 * np.pi))

    grad = np.empty_like(u)
    # d/d log(sigma2)
    grad[0] = 0.5 * quad / sigma2 - 0.5 * n
    # d/d log(ls_j): dC/d log(ls_j) = (5/3)(1 + sqrt5 r) exp(-sqrt5 r) * Dsq_j
    Minv = cho_solve((L, True), np.eye(n))
    base = (5.0 / 3.0) * (1.0 + SQRT5 * r) * E
    for j in range(d):
        dC = base * Dsq[:, :, j]
        grad[j + 1] = 0.5 * (w @ dC @ w) / sigma2 - 0.5 * np.sum(Minv * dC)

    # log-normal priors, expressed in u-space
    m = np.concatenate([[prior.log_var_mean], prior.log_ls_mean])
    s = np.concatenate([[prior.log_var_sd], np.full(d, prior.log_ls_sd)])
    z = (u - m) / s
    logprior = float(np.sum(-u - np.log(s * np.sqrt(2 * np.pi)) - 0.5 * z * z))
    gprior = -1.0 - z / s

    value = -(loglik + logprior)
    gradient = -(grad + gprior)
    return value, gradient, (L, nugget, mu, w, loglik + logprior)


def fit(X, y, prior=None, *, n_starts=5, rng=None, max_iter=200) -> GpModel:
    """Fit a surrogate to scalar observations y at inputs X.

    Runs ``n_starts`` L-BFGS-B searches from the prior medians plus random
    prior draws and keeps the best posterior mode.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y must have the same number of rows")
    if X.shape[0] < 1:
        raise ValueError("need at least one observation")
    if prior is None:
        prior = HyperPrior.from_data(X, y)
    if rng is None:
        rng = np.random.default_rng(0)
    d = X.shape[1]

    m = np.concatenate([[prior.log_var_mean], prior.log_ls_mean])
    s = np.concatenate([[prior.log_var_sd], np.full(d, prior.log_ls_sd)])
    starts = [m]
    for _ in range(n_starts - 1):
        starts.append(m + s * rng.standard_normal(d + 1))
    bounds = list(zip(m - 8 * s, m + 8 * s))

    best_u, best_val = None, np.inf
    for u0 in starts:
        res = minimize(
            lambda u: _objective(u, X, y, prior)[:2],
            np.clip(u0, [b[0] for b in bounds], [b[1] for b in bounds]),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": max_iter},
        )
        if np.isfinite(res.fun) and res.fun < best_val:
            best_val, best_u = res.fun, res.x
    if best_u is None:
        raise FitError("no hyperparameter start produced a usable model")

    value, _, extras = _objective(best_u, X, y, prior)
    if extras is None:
        raise FitError("kernel factorization failed at the selected optimum")
    L, nugget, mu, w, logpost = extras
    params = KernelParams(
        signal_variance=float(np.exp(best_u[0])),
        lengthscales=np.exp(best_u[1:]),
        nugget_fraction=float(nugget),
    )
    if nugget > NUGGET_BASE:
        logger.debug("nugget escalated to %.1e to factorize the kernel", nugget)
    return GpModel(
        X=X,
        y=y,
        mean_constant=mu,
        params=params,
        chol_lower=L,
        resid_solve=w,
        log_posterior=float(logpost),
    )


def predict_batch(model: GpModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and standard deviations at the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    c = matern52(model.X, X, model.params.lengthscales)  # (n, m)
    mean = model.mean_constant + c.T @ model.resid_solve
    v = solve_triangular(model.chol_lower, c, lower=True)
    var = model.params.signal_variance * (1.0 - np.sum(v * v, axis=0))
    var = np.maximum(var, 0.0)
    return mean, np.sqrt(var)


def predict(model: GpModel, x) -> tuple[float, float]:
    """Predictive mean and standard deviation at a single input point."""
    mean, sd = predict_batch(model, np.atleast_1d(np.asarray(x, dtype=float))[None, :])
    return float(mean[0]), float(sd[0])


def prob_dominates(pred: PredictiveDistribution, y) -> float:
    """Probability that a draw from the predictive distribution dominates y.

    Factorizes over independent output marginals: prod_i Phi((y_i - m_i)/s_i).
    A zero-variance marginal contributes the indicator that its mean does not
    exceed y_i.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != pred.means.shape:
        raise ValueError("y must match the number of outputs")
    out = 1.0
    for m, s, yi in zip(pred.means, pred.sds, y):
        if s == 0.0:
            out *= 1.0 if yi >= m else 0.0
        else:
            out *= float(ndtr((yi - m) / s))
    return out


def prob_feasible(pred: PredictiveDistribution) -> float:
    """Probability that every constraint output is non-positive."""
    out = 1.0
    for m, s in zip(pred.means, pred.sds):
        if s == 0.0:
            out *= 1.0 if m <= 0.0 else 0.0
        else:
            out *= float(ndtr(-m / s))
    return out
