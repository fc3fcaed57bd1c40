"""Closed-loop preference-weighted multi-objective Bayesian optimization.

One iteration: refit surrogates for objectives and constraints, propose a
candidate batch, transport a particle system to the batch-optimal sampling
density, estimate every candidate's expected weighted improvement from the
shared particles, discount by feasibility probability, evaluate the winner,
and update the front.  The front contains feasible observations only.

A single random generator seeded from ``seed`` drives the whole run
(initial design, surrogate restarts, candidate proposals, particles), so a
run is reproducible end to end.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from ewhi import gp
from ewhi.acquisition import (
    CandidateSet,
    estimate_batch,
    optimal_sampling_density,
    select_next,
)
from ewhi.pareto import ParetoState
from ewhi.problems import Problem
from ewhi.smc import (
    DegenerateTargetError,
    InitializationError,
    init_particles,
    run_smc,
)
from ewhi.weights import WeightFunction

logger = logging.getLogger(__name__)

__all__ = [
    "EvaluationError",
    "OptimizationRun",
    "latin_hypercube",
    "scale_to_bounds",
    "generate_candidates",
    "run",
]


class EvaluationError(RuntimeError):
    """Raised when evaluating the problem at a selected point fails."""

ELITE_FRACTION = 0.5
ELITE_ROUNDS = 3
PERTURB_FRACTION = 0.05


def latin_hypercube(n, d, rng, *, n_designs=100, return_scores=False):
    """Latin hypercube design on the unit cube, best of ``n_designs`` by
    maximin pairwise distance.

    Each design stratifies every coordinate into n bins with one point per
    bin at a uniform offset.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    best = None
    best_score = -np.inf
    scores = []
    for _ in range(n_designs):
        cols = [(rng.permutation(n) + rng.uniform(size=n)) / n for _ in range(d)]
        design = np.column_stack(cols)
        if n == 1:
            score = np.inf
        else:
            diff = design[:, None, :] - design[None, :, :]
            dist = np.sqrt((diff**2).sum(axis=2))
            score = float(dist[np.triu_indices(n, k=1)].min())
        scores.append(score)
        if score > best_score:
            best_score, best = score, design
    if return_scores:
        return best, np.array(scores)
    return best


def scale_to_bounds(U, bounds) -> np.ndarray:
    """Map unit-cube rows into the rectangle given by (lower, upper) rows."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    return bounds[:, 0] + U * (bounds[:, 1] - bounds[:, 0])


class SurrogateSet:
    """Per-output Gaussian process models behind a common standardization.

    Inputs are mapped to the unit cube using the problem bounds; each output
    column is centered and scaled before fitting and predictions are mapped
    back.
    """

    def __init__(self, X, Y, bounds, rng, n_starts=5):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        self.bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
        self._span = self.bounds[:, 1] - self.bounds[:, 0]
        U = (X - self.bounds[:, 0]) / self._span
        self.y_mean = Y.mean(axis=0)
        sd = Y.std(axis=0)
        self.y_scale = np.where(sd > 0, sd, 1.0)
        self.models = []
        for j in range(Y.shape[1]):
            yj = (Y[:, j] - self.y_mean[j]) / self.y_scale[j]
            self.models.append(gp.fit(U, yj, rng=rng, n_starts=n_starts))

    @property
    def num_outputs(self) -> int:
        return len(self.models)

    def predict_batch(self, X) -> tuple[np.ndarray, np.ndarray]:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        U = (X - self.bounds[:, 0]) / self._span
        means = np.empty((X.shape[0], self.num_outputs))
        sds = np.empty_like(means)
        for j, model in enumerate(self.models):
            m, s = gp.predict_batch(model, U)
            means[:, j] = self.y_mean[j] + self.y_scale[j] * m
            sds[:, j] = self.y_scale[j] * s
        return means, sds


def _non_domination_score(means, sds, front) -> np.ndarray:
    """Approximate probability that a candidate is not dominated by any
    front member, treating objectives as independent Gaussians."""
    if front.shape[0] == 0:
        return np.ones(means.shape[0])
    s = np.where(sds > 0, sds, 1e-12)
    z = (means[:, None, :] - front[None, :, :]) / s[:, None, :]
    p_dom = np.prod(ndtr(z), axis=2)  # P(front point beats candidate), per pair
    return np.prod(1.0 - p_dom, axis=1)


def generate_candidates(
    surrogates: SurrogateSet, pareto: ParetoState, bounds, m_x, rng
) -> CandidateSet:
    """Candidate batch: half uniform exploration, half elite refinement.

    The elite half starts uniform and goes through a few rounds of
    score-proportional resampling with small Gaussian perturbations, pulling
    points toward regions likely to extend the front.
    """
    bounds = np.atleast_2d(np.asarray(bounds, dtype=float))
    d = bounds.shape[0]
    span = bounds[:, 1] - bounds[:, 0]
    n_elite = int(m_x * ELITE_FRACTION)
    n_uniform = m_x - n_elite

    uniform = rng.uniform(bounds[:, 0], bounds[:, 1], size=(n_uniform, d))

    pool = rng.uniform(bounds[:, 0], bounds[:, 1], size=(n_elite, d))
    if n_elite:
        for _ in range(ELITE_ROUNDS):
            means, sds = surrogates.predict_batch(pool)
            score = _non_domination_score(means, sds, pareto.front)
            total = score.sum()
            if total <= 0:
                break
            idx = rng.choice(n_elite, size=n_elite, p=score / total)
            pool = pool[idx] + PERTURB_FRACTION * span * rng.standard_normal(
                (n_elite, d)
            )
            pool = np.clip(pool, bounds[:, 0], bounds[:, 1])

    points = np.vstack([uniform, pool]) if n_elite else uniform
    means, sds = surrogates.predict_batch(points)
    return CandidateSet(means=means, sds=sds, points=points)


@dataclass
class OptimizationRun:
    """Configuration and (after ``run``) full history of one optimization.

    ``X`` holds evaluated inputs, ``F`` objective values, ``G`` constraint
    values (zero columns when unconstrained); ``pareto`` tracks the front of
    feasible observations; ``diagnostics`` collects one record per
    acquisition iteration.
    """

    problem: Problem
    weight: WeightFunction
    n_init: int = 10
    n_iterations: int = 20
    m_x: int = 1000
    m_y: int = 1000
    seed: int = 0
    gp_starts: int = 5
    ess_target_fraction: float = 0.7
    n_move_steps: int = 5
    X: np.ndarray | None = None
    F: np.ndarray | None = None
    G: np.ndarray | None = None
    pareto: ParetoState | None = None
    diagnostics: list = field(default_factory=list)

    @property
    def total_budget(self) -> int:
        return self.n_init + self.n_iterations


def _update_front(pareto, f, g):
    if g.size == 0 or np.all(g <= 0.0):
        return pareto.update(f), True
    return pareto, False


def _evaluate_point(problem, x, index):
    try:
        return problem.evaluate(x)
    except Exception as err:
        raise EvaluationError(
            f"evaluation of point {index} at x={np.asarray(x).tolist()} "
            f"failed: {err}"
        ) from err


def run(opt: OptimizationRun) -> OptimizationRun:
    """Execute the optimization loop, filling the run's history in place.

    With a zero iteration budget the run reduces to the initial space-filling
    design.  Failures keep the history collected so far: evaluation errors
    abort as ``EvaluationError`` and sampler setup errors propagate with the
    iteration recorded, in both cases after storing the partial history on
    the run object.
    """
    if opt.X is not None:
        raise ValueError("this run has already been executed")
    if opt.n_init < 1:
        raise ValueError("need at least one initial design point")
    if opt.n_iterations < 0:
        raise ValueError("n_iterations must be >= 0")
    problem, weight = opt.problem, opt.weight
    rng = np.random.default_rng(opt.seed)

    X = np.empty((0, problem.dimension))
    F = np.empty((0, problem.num_objectives))
    G = np.empty((0, problem.num_constraints))
    pareto = ParetoState.empty(problem.num_objectives)

    try:
        design = latin_hypercube(opt.n_init, problem.dimension, rng)
        for x in scale_to_bounds(design, problem.bounds):
            f, g = _evaluate_point(problem, x, X.shape[0])
            X = np.vstack([X, x[None, :]])
            F = np.vstack([F, f[None, :]])
            G = np.vstack([G, g[None, :]])
            pareto, _ = _update_front(pareto, f, g)

        for it in range(opt.n_iterations):
            objectives = SurrogateSet(
                X, F, problem.bounds, rng, n_starts=opt.gp_starts
            )
            constraints = None
            if problem.num_constraints:
                constraints = SurrogateSet(
                    X, G, problem.bounds, rng, n_starts=opt.gp_starts
                )

            cand = generate_candidates(
                objectives, pareto, problem.bounds, opt.m_x, rng
            )
            if constraints is not None:
                c_means, c_sds = constraints.predict_batch(cand.points)
                with np.errstate(divide="ignore"):
                    z = np.where(
                        c_sds > 0, -c_means / np.where(c_sds > 0, c_sds, 1.0), 0.0
                    )
                feas = np.prod(
                    np.where(c_sds > 0, ndtr(z), (c_means <= 0).astype(float)),
                    axis=1,
                )
            else:
                feas = np.ones(cand.size)

            near_front = float(
                np.mean(_non_domination_score(cand.means, cand.sds, pareto.front) > 0.5)
            )
            logger.debug(
                "iteration %d: %.1f%% of candidates predicted near the front",
                it,
                100.0 * near_front,
            )
            record = {
                "iteration": it,
                "front_size": pareto.size,
                "near_front_fraction": near_front,
            }

            density = optimal_sampling_density(cand, weight, pareto)
            try:
                sys0 = init_particles(pareto, weight.support_box, opt.m_y, rng)
                system = run_smc(
                    sys0,
                    density,
                    rng,
                    ess_target_fraction=opt.ess_target_fraction,
                    n_move_steps=opt.n_move_steps,
                )
            except (InitializationError, DegenerateTargetError) as err:
                raise type(err)(
                    f"sampler setup failed at acquisition iteration {it}: {err}"
                ) from err
            estimates = estimate_batch(cand, system, density)
            k = select_next(estimates, feas, cand)
            record.update(
                z_estimate=system.z_estimate,
                delta_sq_cum=system.delta_sq_cum,
                n_stages=system.stage_index,
                acq_value=estimates[k].value,
                acq_variance=estimates[k].variance,
            )

            x_new = cand.points[k]
            f_new, g_new = _evaluate_point(problem, x_new, X.shape[0])
            X = np.vstack([X, x_new[None, :]])
            F = np.vstack([F, f_new[None, :]])
            G = np.vstack([G, g_new[None, :]])
            pareto, feasible_new = _update_front(pareto, f_new, g_new)
            record.update(
                selected_index=k,
                feasibility=float(feas[k]),
                evaluated_feasible=feasible_new,
            )
            opt.diagnostics.append(record)
    finally:
        # history collected so far stays available even when a stage fails
        opt.X, opt.F, opt.G, opt.pareto = X, F, G, pareto
    return opt
