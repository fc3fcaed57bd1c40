"""Reference oracles: slow but independently coded values to test against.

These routines recompute quantities the estimator produces by Monte Carlo
using closed forms or brute-force quadrature.  They are deliberately simple
and share as little code as possible with the estimation path.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from ewhi.gp import PredictiveDistribution
from ewhi.pareto import BoundingBox, ParetoState
from ewhi.weights import WeightFunction

__all__ = [
    "gaussian_partial_expectation",
    "exact_ehvi_2d",
    "ewhi_grid_oracle",
    "weighted_complement_mass",
    "monte_carlo_complement_volume",
]


def gaussian_partial_expectation(u: float, mean: float, sd: float) -> float:
    """Integral of Phi((t - mean)/sd) dt from -infinity to u.

    Closed form (u - mean) * Phi(z) + sd * phi(z) with z = (u - mean)/sd;
    this is the building block of the exact hypervolume-improvement formula.
    """
    if sd <= 0:
        raise ValueError("sd must be positive")
    if np.isinf(u):
        if u < 0:
            return 0.0
        raise ValueError("upper limit must be finite or -inf")
    z = (u - mean) / sd
    pdf = np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)
    return (u - mean) * float(ndtr(z)) + sd * float(pdf)


def exact_ehvi_2d(
    pred: PredictiveDistribution, state: ParetoState, ref_point
) -> float:
    """Exact expected hypervolume improvement for two objectives.

    Integrates P(candidate dominates y) over {y <= ref_point} minus the
    region dominated by the front, by sweeping vertical strips between
    consecutive front abscissae.  Requires strictly positive predictive
    standard deviations.
    """
    ref = np.asarray(ref_point, dtype=float)
    if state.dimension != 2 or pred.means.shape[0] != 2 or ref.shape != (2,):
        raise ValueError("exact formula is implemented for two objectives only")
    if np.any(pred.sds <= 0):
        raise ValueError("predictive standard deviations must be positive")
    m1, m2 = pred.means
    s1, s2 = pred.sds

    front = state.front
    if front.shape[0]:
        front = front[front[:, 0] < ref[0]]  # points right of ref dominate nothing here
    a = front[:, 0]
    b = front[:, 1]
    edges = np.concatenate([[-np.inf], a, [np.inf]])
    tops = np.concatenate([[ref[1]], np.minimum.accumulate(b)]) if b.size else np.array(
        [ref[1]]
    )
    total = 0.0
    for j in range(tops.shape[0]):
        lo = edges[j]
        hi = min(edges[j + 1], ref[0])
        if hi <= lo:
            continue
        width = gaussian_partial_expectation(
            hi, m1, s1
        ) - gaussian_partial_expectation(lo, m1, s1)
        total += width * gaussian_partial_expectation(min(tops[j], ref[1]), m2, s2)
    return max(total, 0.0)


def _domination_probability_grid(pred: PredictiveDistribution, Y: np.ndarray):
    """P(candidate dominates y) for rows y, with degenerate marginals as
    indicators."""
    out = np.ones(Y.shape[0])
    for i, (m, s) in enumerate(zip(pred.means, pred.sds)):
        if s == 0.0:
            out *= (Y[:, i] >= m).astype(float)
        else:
            out *= ndtr((Y[:, i] - m) / s)
    return out


def ewhi_grid_oracle(
    pred: PredictiveDistribution,
    state: ParetoState,
    weight: WeightFunction,
    box: BoundingBox | None = None,
    n_nodes: tuple[int, int] = (400, 400),
) -> float:
    """Midpoint-rule quadrature of the weighted improvement integrand.

    Integrates weight(y) * P(candidate dominates y) over the box minus the
    dominated region.  Two objectives only; cost grows with the node counts,
    accuracy is limited by the grid resolution.
    """
    if box is None:
        box = weight.support_box
    if state.dimension != 2 or box.dimension != 2:
        raise ValueError("grid oracle is implemented for two objectives only")
    n0, n1 = n_nodes
    e0 = np.linspace(box.lower[0], box.upper[0], n0 + 1)
    e1 = np.linspace(box.lower[1], box.upper[1], n1 + 1)
    c0 = 0.5 * (e0[:-1] + e0[1:])
    c1 = 0.5 * (e1[:-1] + e1[1:])
    G0, G1 = np.meshgrid(c0, c1, indexing="ij")
    Y = np.column_stack([G0.ravel(), G1.ravel()])
    keep = ~state.is_dominated(Y)
    vals = np.zeros(Y.shape[0])
    if np.any(keep):
        vals[keep] = weight(Y[keep]) * _domination_probability_grid(pred, Y[keep])
    cell = (e0[1] - e0[0]) * (e1[1] - e1[0])
    return float(vals.sum() * cell)


def weighted_complement_mass(
    state: ParetoState,
    weight: WeightFunction,
    box: BoundingBox | None = None,
    n_nodes: tuple[int, int] = (400, 400),
) -> float:
    """Weight mass of the box not yet dominated by the front, by quadrature.

    This is the natural progress measure for a weighted optimization run:
    it starts at the weight's box mass and decreases toward the mass the
    true Pareto front cannot dominate.
    """
    if box is None:
        box = weight.support_box
    if state.dimension != 2 or box.dimension != 2:
        raise ValueError("quadrature is implemented for two objectives only")
    n0, n1 = n_nodes
    e0 = np.linspace(box.lower[0], box.upper[0], n0 + 1)
    e1 = np.linspace(box.lower[1], box.upper[1], n1 + 1)
    c0 = 0.5 * (e0[:-1] + e0[1:])
    c1 = 0.5 * (e1[:-1] + e1[1:])
    G0, G1 = np.meshgrid(c0, c1, indexing="ij")
    Y = np.column_stack([G0.ravel(), G1.ravel()])
    keep = ~state.is_dominated(Y)
    cell = (e0[1] - e0[0]) * (e1[1] - e1[0])
    if not np.any(keep):
        return 0.0
    return float(np.sum(weight(Y[keep])) * cell)


def monte_carlo_complement_volume(
    state: ParetoState, box: BoundingBox, n: int, rng
) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of |box minus dominated|."""
    pts = rng.uniform(box.lower, box.upper, size=(n, box.dimension))
    frac = float((~state.is_dominated(pts)).mean())
    se = box.volume * np.sqrt(max(frac * (1.0 - frac), 0.0) / n)
    return frac * box.volume, se
