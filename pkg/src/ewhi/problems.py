"""Benchmark problems: objectives, constraints, and input bounds.

Conventions: objectives are minimized; a point is feasible when every
constraint value is <= 0.  ``evaluate`` handles one input point,
``evaluate_batch`` a stack of rows (vectorized where the problem allows).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["Problem", "bnh", "toy_sphere_pair", "evaluate"]


@dataclass(frozen=True)
class Problem:
    name: str
    bounds: np.ndarray  # (d, 2) input box
    num_objectives: int
    num_constraints: int
    _batch: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

    def __post_init__(self):
        bounds = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        if bounds.shape[1] != 2 or np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError("bounds must be rows of (lower, upper) with lower < upper")
        bounds.setflags(write=False)
        object.__setattr__(self, "bounds", bounds)

    @property
    def dimension(self) -> int:
        return self.bounds.shape[0]

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Objectives and constraint values at one input point."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dimension,):
            raise ValueError(f"expected input of shape ({self.dimension},)")
        F, G = self._batch(x[None, :])
        return F[0], G[0]

    def evaluate_batch(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Objectives (n, p) and constraints (n, q) for rows of X."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension:
            raise ValueError(f"expected inputs of dimension {self.dimension}")
        return self._batch(X)


def evaluate(problem: Problem, x) -> tuple[np.ndarray, np.ndarray]:
    return problem.evaluate(x)


def _bnh_batch(X):
    x1, x2 = X[:, 0], X[:, 1]
    f1 = 4.0 * x1**2 + 4.0 * x2**2
    f2 = (x1 - 5.0) ** 2 + (x2 - 5.0) ** 2
    g1 = (x1 - 5.0) ** 2 + x2**2 - 25.0
    g2 = 7.7 - (x1 - 8.0) ** 2 - (x2 + 3.0) ** 2
    return np.column_stack([f1, f2]), np.column_stack([g1, g2])


def bnh() -> Problem:
    """Two-objective constrained benchmark on [0, 5] x [0, 3].

    Objectives f1 = 4 x1^2 + 4 x2^2 and f2 = (x1-5)^2 + (x2-5)^2 with two
    disk constraints; objective values over the feasible set stay inside
    [0, 150] x [0, 60], which is the default preference-weight box.
    """
    return Problem(
        name="bnh",
        bounds=np.array([[0.0, 5.0], [0.0, 3.0]]),
        num_objectives=2,
        num_constraints=2,
        _batch=_bnh_batch,
    )


def toy_sphere_pair() -> Problem:
    """Unconstrained one-dimensional pair of parabolas on [0, 1].

    f1 = x^2 and f2 = (x-1)^2; every point of [0, 1] is Pareto-optimal and
    the front is the curve (t^2, (1-t)^2).  Useful as a fast smoke problem
    for the optimizer loop.
    """

    def batch(X):
        x = X[:, 0]
        f1 = x**2
        f2 = (x - 1.0) ** 2
        return np.column_stack([f1, f2]), np.empty((X.shape[0], 0))

    return Problem(
        name="toy-sphere-pair",
        bounds=np.array([[0.0, 1.0]]),
        num_objectives=2,
        num_constraints=0,
        _batch=batch,
    )
