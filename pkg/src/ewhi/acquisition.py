"""Expected weighted improvement estimation by importance sampling.

For a candidate with independent Gaussian predictive marginals, the expected
weighted improvement is the integral of

    weight(y) * P(candidate dominates y)

over the non-dominated part of the weight's support box.  A single particle
system drawn from the batch-optimal sampling density serves every candidate
of a batch at once: the density is proportional to weight(y) times the root
mean square of the candidates' dominance probabilities, which minimizes the
summed squared estimation error across the batch.

All computations run in log space.  Because the weight appears in both the
integrand and the sampling density, it cancels exactly from the
self-normalized ratios; estimates therefore scale perfectly when the weight
is scaled, with the factor carried by the particle system's normalizing
constant alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from ewhi.gp import PredictiveDistribution, prob_dominates
from ewhi.pareto import BoundingBox, ParetoState
from ewhi.smc import ParticleSystem
from ewhi.weights import WeightFunction

logger = logging.getLogger(__name__)

__all__ = [
    "CandidateSet",
    "EwhiEstimate",
    "OptimalSamplingDensity",
    "InconsistentSampleError",
    "optimal_sampling_density",
    "ewhi_integrand",
    "estimate_batch",
    "select_next",
]


class InconsistentSampleError(RuntimeError):
    """Raised when a particle lies outside the sampling density's support."""


@dataclass(frozen=True)
class CandidateSet:
    """Predictive marginals for a batch of candidate inputs.

    ``means`` and ``sds`` have shape (n_candidates, n_objectives); ``points``
    optionally records the inputs themselves (n_candidates, input_dim).
    """

    means: np.ndarray
    sds: np.ndarray
    points: np.ndarray | None = None

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        sds = np.atleast_2d(np.asarray(self.sds, dtype=float))
        if means.shape != sds.shape:
            raise ValueError("means and sds must have matching shapes")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(sds))):
            raise ValueError("predictive means and sds must all be finite")
        if np.any(sds < 0):
            raise ValueError("standard deviations must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sds", sds)
        if self.points is not None:
            points = np.atleast_2d(np.asarray(self.points, dtype=float))
            if points.shape[0] != means.shape[0]:
                raise ValueError("points and means must have the same row count")
            object.__setattr__(self, "points", points)

    @classmethod
    def from_predictions(cls, preds, points=None) -> "CandidateSet":
        means = np.vstack([p.means for p in preds])
        sds = np.vstack([p.sds for p in preds])
        return cls(means=means, sds=sds, points=points)

    @property
    def size(self) -> int:
        return self.means.shape[0]

    @property
    def num_objectives(self) -> int:
        return self.means.shape[1]

    def predictive(self, k: int) -> PredictiveDistribution:
        return PredictiveDistribution(means=self.means[k], sds=self.sds[k])


def log_dominance_matrix(means, sds, Y) -> np.ndarray:
    """Log of P(candidate k dominates y_i), shape (len(Y), len(means)).

    Sums log Phi((y - mean)/sd) over objectives; a zero-sd marginal
    contributes the log-indicator that y does not fall below the mean.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    Z = Y[:, None, :] - means[None, :, :]
    pos = sds > 0
    if np.all(pos):
        np.divide(Z, sds[None, :, :], out=Z)
        return log_ndtr(Z).sum(axis=2)
    L = np.where(
        pos[None, :, :],
        log_ndtr(Z / np.where(pos, sds, 1.0)[None, :, :]),
        np.where(Z >= 0, 0.0, -np.inf),
    )
    return L.sum(axis=2)


class OptimalSamplingDensity:
    """Batch-optimal unnormalized sampling density over the improvement region.

    gamma(y) = weight(y) * sqrt(sum_k P(candidate k dominates y)^2) on
    (box minus dominated region), zero elsewhere.
    """

    def __init__(
        self,
        candidates: CandidateSet,
        weight: WeightFunction,
        pareto: ParetoState,
        box: BoundingBox | None = None,
    ):
        self.candidates = candidates
        self.weight = weight
        self.pareto = pareto
        self.box = weight.support_box if box is None else box

    def log_norm_term(self, Y) -> np.ndarray:
        """Log root-mean-square-free norm: 0.5 * log sum_k P_k(y)^2."""
        logP = log_dominance_matrix(self.candidates.means, self.candidates.sds, Y)
        return 0.5 * logsumexp(2.0 * logP, axis=1)

    def log_density(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.full(Y.shape[0], -np.inf)
        ok = self.box.contains(Y) & ~self.pareto.is_dominated(Y)
        if np.any(ok):
            sub = Y[ok]
            out[ok] = self.weight.log_weight(sub) + self.log_norm_term(sub)
        return out

    def __call__(self, Y):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            return float(np.exp(self.log_density(Y[None, :]))[0])
        return np.exp(self.log_density(Y))


def optimal_sampling_density(
    candidates: CandidateSet,
    weight: WeightFunction,
    pareto: ParetoState,
    box: BoundingBox | None = None,
) -> OptimalSamplingDensity:
    return OptimalSamplingDensity(candidates, weight, pareto, box)


def ewhi_integrand(pred: PredictiveDistribution, y, weight: WeightFunction) -> float:
    """Pointwise integrand weight(y) * P(candidate dominates y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(weight(y)) * prob_dominates(pred, y)


@dataclass(frozen=True)
class EwhiEstimate:
    """Estimated expected weighted improvement for one candidate.

    ``value`` = z_estimate * ``alpha_hat``, where ``alpha_hat`` is the
    self-normalized mean ratio; ``lambda_sq`` is the ratio stage's squared
    coefficient of variation and ``variance`` the combined variance proxy
    value^2 * (lambda_sq + (1 + lambda_sq) * delta_sq_cum).
    """

    value: float
    alpha_hat: float
    lambda_sq: float
    variance: float


def estimate_batch(
    candidates: CandidateSet,
    system: ParticleSystem,
    density: OptimalSamplingDensity,
    weight: WeightFunction | None = None,
) -> list[EwhiEstimate]:
    """Estimate the expected weighted improvement of every candidate.

    Uses the particles of ``system`` (assumed drawn from ``density`` by the
    sampler) and its normalizing-constant ledger.  By default the integrand
    uses the density's own weight, which then cancels exactly from the
    self-normalized ratios, reducing them to P_k(y_i) divided by the
    root-sum-square over the batch.  Passing a different ``weight`` keeps
    the general ratio weight(y) * P_k(y) / density(y).
    """
    Y = system.particles
    m = Y.shape[0]
    if candidates.num_objectives != Y.shape[1]:
        raise ValueError("candidate objectives do not match particle dimension")

    if system.log_target is not None:
        log_gamma = system.log_target
    else:
        log_gamma = density.log_density(Y)
    if not np.all(np.isfinite(log_gamma)):
        raise InconsistentSampleError(
            "a particle has zero sampling density; the system does not match "
            "the supplied density"
        )

    logP_est = log_dominance_matrix(candidates.means, candidates.sds, Y)

    z = system.z_estimate
    d2 = system.delta_sq_cum
    out = []
    if weight is None or weight is density.weight:
        # weight cancels between integrand and density; the log ratios
        # log(P_k(y_i)/s(y_i)) are each <= 0 since s >= P_k
        if density.candidates is candidates:
            logP = logP_est
        else:
            logP = log_dominance_matrix(
                density.candidates.means, density.candidates.sds, Y
            )
        log_s = 0.5 * logsumexp(2.0 * logP, axis=1)  # (m_y,)
        logR = logP_est - log_s[:, None]
    else:
        logR = weight.log_weight(Y)[:, None] + logP_est - log_gamma[:, None]
    for k in range(candidates.size):
        lr = logR[:, k]
        finite = np.isfinite(lr)
        shift = lr[finite].max() if np.any(finite) else -np.inf
        if not np.isfinite(shift):
            out.append(EwhiEstimate(value=0.0, alpha_hat=0.0, lambda_sq=0.0, variance=0.0))
            continue
        # shifting by the column max keeps the sums well away from the
        # subnormal range regardless of how small the ratios are
        q = np.zeros(m)
        q[finite] = np.exp(lr[finite] - shift)
        sq = float(q.sum())
        alpha = np.exp(shift) * sq / m
        lam = max(float(np.sum(q * q)) / (sq * sq) - 1.0 / m, 0.0)
        value = z * alpha
        variance = value * value * (lam + (1.0 + lam) * d2)
        out.append(
            EwhiEstimate(
                value=float(value), alpha_hat=float(alpha), lambda_sq=lam, variance=variance
            )
        )
    return out


def select_next(estimates, feasibility, candidates: CandidateSet | None = None) -> int:
    """Index of the candidate maximizing estimated improvement times
    feasibility probability.

    Ties break toward the lowest index.  When every score is zero the
    estimates carry no signal; the fallback picks the candidate with the
    largest total predictive variance (if candidate marginals are supplied)
    so the optimizer still explores.
    """
    if len(estimates) == 0:
        raise ValueError("cannot select from an empty candidate batch")
    feasibility = np.asarray(feasibility, dtype=float)
    values = np.array([e.value for e in estimates])
    if values.shape != feasibility.shape:
        raise ValueError("estimates and feasibility must have equal length")
    scores = values * feasibility
    if np.any(scores > 0):
        return int(np.argmax(scores))
    logger.warning(
        "all candidate scores are zero; falling back to predictive uncertainty"
    )
    if candidates is not None:
        return int(np.argmax(np.sum(candidates.sds**2, axis=1)))
    return 0
