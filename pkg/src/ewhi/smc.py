"""Sequential Monte Carlo sampler over the non-dominated objective region.

Particles start uniform on (box minus dominated region) and are transported
to an unnormalized target density through an adaptive geometric bridge
gamma_beta = gamma_0^(1-beta) * gamma_target^beta.  Each stage picks the
largest temperature step whose incremental effective sample size stays near
a fixed fraction of the particle count, reweights, resamples, and applies a
few Gaussian random-walk Metropolis moves at the new temperature.

The sampler also tracks the normalizing-constant estimate z (product of the
per-stage mean incremental weights, times the exact or Monte Carlo volume of
the initial support) and an accumulated squared coefficient of variation
that feeds the downstream variance report.  Resampling runs every stage so
that the particles entering each reweight are equally weighted, which is
what the plain-mean update of z assumes.

Everything runs in log space: a target only needs to expose
``log_density(Y) -> (m,)`` returning -inf where its density vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ewhi.pareto import BoundingBox, ParetoState, box_complement_volume_2d

__all__ = [
    "ParticleSystem",
    "UniformComplementDensity",
    "InitializationError",
    "DegenerateTargetError",
    "init_particles",
    "run_smc",
    "systematic_resample",
]

ESS_TARGET_FRACTION = 0.7
N_MOVE_STEPS = 5
MC_VOLUME_DRAWS = 100_000
MIN_ACCEPT_RATE = 1e-4
MAX_INIT_PROPOSALS = 1_000_000


class InitializationError(RuntimeError):
    """Raised when uniform rejection sampling cannot populate the region."""


class DegenerateTargetError(RuntimeError):
    """Raised when the target density vanishes at every particle."""


@dataclass(frozen=True)
class ParticleSystem:
    """Equally weighted particles plus normalizing-constant bookkeeping.

    ``z_estimate`` starts at the volume of (box minus dominated region) and
    after ``run_smc`` estimates the integral of the unnormalized target over
    that region.  ``cv_ledger`` records the squared coefficient of variation
    of each stage's incremental weights; ``delta_sq_cum`` folds those into
    the running relative-variance proxy for z.
    """

    particles: np.ndarray
    stage_index: int
    z_estimate: float
    cv_ledger: tuple
    delta_sq_cum: float
    box: BoundingBox
    pareto: ParetoState
    log_target: np.ndarray | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.particles.shape[0]


class UniformComplementDensity:
    """Uniform (unit) density on box minus the dominated region.

    This is the initial density of every particle system; running the
    sampler with it as target is a no-op that must leave z unchanged.
    """

    def __init__(self, box: BoundingBox, pareto: ParetoState):
        self.box = box
        self.pareto = pareto

    def log_density(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        ok = self.box.contains(Y) & ~self.pareto.is_dominated(Y)
        return np.where(ok, 0.0, -np.inf)


def init_particles(
    pareto: ParetoState, box: BoundingBox, m: int, rng
) -> ParticleSystem:
    """Draw m uniform particles on box minus the dominated region.

    z is initialized to the region's volume: exactly for two objectives,
    by Monte Carlo otherwise.  Raises ``InitializationError`` when the
    acceptance rate stays below 1e-4 over a million proposals.
    """
    if m < 2:
        raise ValueError("need at least two particles")
    kept = []
    n_kept = 0
    proposed = 0
    batch = max(4 * m, 8192)
    while n_kept < m:
        pts = rng.uniform(box.lower, box.upper, size=(batch, box.dimension))
        proposed += batch
        good = pts[~pareto.is_dominated(pts)]
        if good.shape[0]:
            kept.append(good)
            n_kept += good.shape[0]
        if n_kept < m and proposed >= MAX_INIT_PROPOSALS:
            rate = n_kept / proposed
            if rate < MIN_ACCEPT_RATE:
                raise InitializationError(
                    f"acceptance rate {rate:.2e} after {proposed} proposals; "
                    "the dominated region nearly fills the box"
                )
    particles = np.vstack(kept)[:m]

    if box.dimension == 2:
        z0 = box_complement_volume_2d(pareto, box)
    else:
        pts = rng.uniform(box.lower, box.upper, size=(MC_VOLUME_DRAWS, box.dimension))
        z0 = float((~pareto.is_dominated(pts)).mean()) * box.volume
    return ParticleSystem(
        particles=particles,
        stage_index=0,
        z_estimate=z0,
        cv_ledger=(),
        delta_sq_cum=0.0,
        box=box,
        pareto=pareto,
        log_target=None,
    )


def systematic_resample(weights, rng) -> np.ndarray:
    """Systematic resampling: indices drawn with one uniform offset."""
    weights = np.asarray(weights, dtype=float)
    m = weights.shape[0]
    positions = (rng.random() + np.arange(m)) / m
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # guard against rounding in the final bin
    return np.searchsorted(cumulative, positions)


def _incremental_ess(log_ratio: np.ndarray, delta_beta: float) -> float:
    lw = delta_beta * log_ratio
    finite = np.isfinite(lw)
    if not np.any(finite):
        return 0.0
    shift = lw[finite].max()
    w = np.zeros_like(lw)
    w[finite] = np.exp(lw[finite] - shift)
    s = w.sum()
    return float(s * s / np.sum(w * w))


def _choose_step(log_ratio: np.ndarray, beta: float, target_ess: float) -> float:
    """Largest temperature increment keeping the incremental ESS on target.

    Falls back to jumping straight to beta = 1 when even an infinitesimal
    step cannot reach the target (e.g. an indicator-like target that zeroes
    out too many particles regardless of step size).
    """
    remaining = 1.0 - beta
    if _incremental_ess(log_ratio, remaining) >= target_ess:
        return remaining
    finite = np.sum(np.isfinite(log_ratio))
    if finite <= target_ess:
        return remaining
    lo, hi = 0.0, remaining
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _incremental_ess(log_ratio, mid) >= target_ess:
            lo = mid
        else:
            hi = mid
    return max(lo, remaining * 1e-12)


def _spent(beta: float, delta_beta: float) -> bool:
    """True when the step exhausts the remaining temperature budget."""
    return (1.0 - beta) - delta_beta <= 1e-12


def run_smc(
    system: ParticleSystem,
    target,
    rng,
    *,
    ess_target_fraction: float = ESS_TARGET_FRACTION,
    n_move_steps: int = N_MOVE_STEPS,
    max_stages: int = 1000,
    trace: list | None = None,
) -> ParticleSystem:
    """Transport the system from its uniform start to the target density.

    ``target`` exposes ``log_density(Y) -> (m,)`` (-inf where zero).  Returns
    a new system whose z_estimate approximates the integral of the target
    over (box minus dominated region) and whose particles are approximately
    distributed as the normalized target.  Passing a list as ``trace``
    appends one record of stage diagnostics per tempering stage.
    """
    particles = system.particles.copy()
    m, p = particles.shape
    box, pareto = system.box, system.pareto
    z = system.z_estimate
    delta_sq = system.delta_sq_cum
    ledger = list(system.cv_ledger)
    stage = system.stage_index
    target_ess = ess_target_fraction * m

    log_t = np.asarray(target.log_density(particles), dtype=float)
    beta = 0.0
    scale_base = 2.38 / np.sqrt(p)
    min_scale = 1e-12 * (box.upper - box.lower)

    while beta < 1.0:
        stage += 1
        if stage - system.stage_index > max_stages:
            raise RuntimeError(f"tempering did not finish within {max_stages} stages")
        delta_beta = _choose_step(log_t, beta, target_ess)
        lw = delta_beta * log_t
        finite = np.isfinite(lw)
        if not np.any(finite):
            raise DegenerateTargetError(
                "target density vanishes at every particle of the initial region"
            )
        shift = lw[finite].max()
        w = np.zeros(m)
        w[finite] = np.exp(lw[finite] - shift)
        sw = float(w.sum())
        theta = np.exp(shift) * sw / m
        if theta <= 0.0 or not np.isfinite(theta):
            raise DegenerateTargetError("stage normalizing ratio underflowed to zero")
        # squared coefficient of variation of the incremental weights; the
        # max with zero only strips rounding noise (the quantity is >= 0)
        cv_sq = max(float(np.sum(w * w) / (sw * sw)) - 1.0 / m, 0.0)
        z *= theta
        ledger.append(cv_sq)
        delta_sq = cv_sq + (1.0 + cv_sq) * delta_sq
        beta = 1.0 if _spent(beta, delta_beta) else beta + delta_beta
        if trace is not None:
            trace.append(
                {
                    "stage": stage,
                    "beta": beta,
                    "theta": theta,
                    "cv_sq": cv_sq,
                    "z_estimate": z,
                    "delta_sq_cum": delta_sq,
                }
            )

        idx = systematic_resample(w / sw, rng)
        particles = particles[idx]
        log_t = log_t[idx]

        scale = np.maximum(scale_base * particles.std(axis=0), min_scale)
        for _ in range(n_move_steps):
            proposal = particles + scale * rng.standard_normal((m, p))
            ok = box.contains(proposal) & ~pareto.is_dominated(proposal)
            log_t_prop = np.full(m, -np.inf)
            if np.any(ok):
                log_t_prop[ok] = target.log_density(proposal[ok])
            with np.errstate(invalid="ignore"):
                log_ratio = beta * (log_t_prop - log_t)
            u = rng.random(m)
            accept = ok & (np.log(u) < log_ratio)
            particles[accept] = proposal[accept]
            log_t[accept] = log_t_prop[accept]

    return replace(
        system,
        particles=particles,
        stage_index=stage,
        z_estimate=z,
        cv_ledger=tuple(ledger),
        delta_sq_cum=delta_sq,
        log_target=log_t,
    )
