"""Pareto domination, non-dominated front maintenance, and dominated-region geometry.

Conventions: all objectives are minimized.  A point y strictly dominates z when
y <= z componentwise with strict inequality in at least one coordinate.  The
dominated region H is the union of the (closed) upper orthants anchored at the
observed non-dominated points; the improvement region of interest is its
complement intersected with a bounding box.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoundingBox",
    "ParetoState",
    "dominates",
    "update_front",
    "in_dominated_region",
    "box_complement_volume_2d",
]


class DimensionMismatchError(ValueError):
    """Raised when objective vectors of incompatible lengths are combined."""


def _as_vector(y, dim=None):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError(f"expected a 1-d objective vector, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("objective vector must be finite")
    if dim is not None and y.shape[0] != dim:
        raise DimensionMismatchError(
            f"objective vector has length {y.shape[0]}, expected {dim}"
        )
    return y


def dominates(y, z) -> bool:
    """True when y strictly Pareto-dominates z (minimization).

    y dominates z iff y <= z in every coordinate and y < z in at least one.
    A point never dominates itself.
    """
    y = _as_vector(y)
    z = _as_vector(z, dim=y.shape[0])
    return bool(np.all(y <= z) and np.any(y < z))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box [lower_1, upper_1] x ... x [lower_p, upper_p]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("box must satisfy lower < upper in every coordinate")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, Y) -> np.ndarray:
        """Boolean mask of rows of Y that lie inside the closed box."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"points have dimension {Y.shape[1]}, box has {self.dimension}"
            )
        return np.all((Y >= self.lower) & (Y <= self.upper), axis=1)


def _nondominated_mask(Y: np.ndarray) -> np.ndarray:
    """Mask of rows of Y not strictly dominated by any other row (dedup aware)."""
    n = Y.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        le = np.all(Y <= Y[i], axis=1)
        lt = np.any(Y < Y[i], axis=1)
        if np.any(le & lt):
            keep[i] = False
    if np.any(keep):
        # collapse exact duplicates among survivors, keeping the first
        idx = np.flatnonzero(keep)
        _, first = np.unique(Y[idx], axis=0, return_index=True)
        keep = np.zeros(n, dtype=bool)
        keep[idx[np.sort(first)]] = True
    return keep


@dataclass(frozen=True)
class ParetoState:
    """Non-dominated front plus the full observation history.

    ``front`` holds the current mutually non-dominated objective vectors.  For
    two objectives it is kept sorted by the first coordinate (second coordinate
    then strictly decreasing), which the membership and volume routines rely on.
    ``all_observed`` records every vector ever passed in, duplicates included.
    """

    dimension: int
    front: np.ndarray = field(default=None)
    all_observed: np.ndarray = field(default=None)

    def __post_init__(self):
        front = self.front
        observed = self.all_observed
        if front is None:
            front = np.empty((0, self.dimension), dtype=float)
        if observed is None:
            observed = np.empty((0, self.dimension), dtype=float)
        front = np.asarray(front, dtype=float).reshape(-1, self.dimension).copy()
        observed = np.asarray(observed, dtype=float).reshape(-1, self.dimension).copy()
        if self.dimension == 2 and front.shape[0] > 1:
            front = front[np.argsort(front[:, 0], kind="stable")]
        front.setflags(write=False)
        observed.setflags(write=False)
        object.__setattr__(self, "front", front)
        object.__setattr__(self, "all_observed", observed)

    @classmethod
    def empty(cls, dimension: int) -> "ParetoState":
        if dimension < 2:
            raise ValueError("need at least two objectives")
        return cls(dimension=dimension)

    @classmethod
    def from_observations(cls, Y) -> "ParetoState":
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        state = cls.empty(Y.shape[1])
        for y in Y:
            state = update_front(state, y)
        return state

    @property
    def size(self) -> int:
        return self.front.shape[0]

    def update(self, y) -> "ParetoState":
        return update_front(self, y)

    def is_dominated(self, Y) -> np.ndarray:
        """Vectorized strict-domination test against the front.

        Returns a boolean mask over the rows of Y; a row is flagged when some
        front point strictly dominates it.  Points of the front itself are not
        dominated.
        """
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"points have dimension {Y.shape[1]}, front has {self.dimension}"
            )
        if self.front.shape[0] == 0:
            return np.zeros(Y.shape[0], dtype=bool)
        if self.dimension == 2:
            return self._is_dominated_2d(Y)
        F = self.front[None, :, :]
        P = Y[:, None, :]
        le = np.all(F <= P, axis=2)
        lt = np.any(F < P, axis=2)
        return np.any(le & lt, axis=1)

    def _is_dominated_2d(self, Y: np.ndarray) -> np.ndarray:
        # front sorted by first coordinate; second coordinate strictly decreasing
        a = self.front[:, 0]
        b = self.front[:, 1]
        bmin = np.minimum.accumulate(b)
        # j = number of front points with a_i <= y1
        j = np.searchsorted(a, Y[:, 0], side="right")
        out = np.zeros(Y.shape[0], dtype=bool)
        hit = j > 0
        if np.any(hit):
            jj = j[hit] - 1
            mb = bmin[jj]
            y1 = Y[hit, 0]
            y2 = Y[hit, 1]
            strict = mb < y2
            # bmin == y2: dominated only if the achieving point is strictly left;
            # b values on a front are distinct, so the argmin index is unique
            tie = mb == y2
            out_hit = strict.copy()
            if np.any(tie):
                argmin_prefix = np.zeros(a.shape[0], dtype=int)
                best = 0
                for i in range(1, a.shape[0]):
                    if b[i] < b[best]:
                        best = i
                    argmin_prefix[i] = best
                out_hit[tie] = a[argmin_prefix[jj[tie]]] < y1[tie]
            out[hit] = out_hit
        return out


def update_front(state: ParetoState, y) -> ParetoState:
    """Insert observation y, returning a new state with the front updated.

    The new point enters the front iff no current member strictly dominates it
    and it is not already present; members it strictly dominates are removed.
    The observation history always grows by one row.
    """
    y = _as_vector(y, dim=state.dimension)
    observed = np.vstack([state.all_observed, y[None, :]])
    front = state.front
    if front.shape[0] == 0:
        new_front = y[None, :]
    else:
        le = np.all(front <= y, axis=1)
        lt = np.any(front < y, axis=1)
        if np.any(le & lt) or np.any(np.all(front == y, axis=1)):
            new_front = front
        else:
            beaten = np.all(y <= front, axis=1) & np.any(y < front, axis=1)
            new_front = np.vstack([front[~beaten], y[None, :]])
    return ParetoState(dimension=state.dimension, front=new_front, all_observed=observed)


def in_dominated_region(state: ParetoState, y) -> bool:
    """True when y is strictly dominated by some member of the front."""
    y = _as_vector(y, dim=state.dimension)
    return bool(state.is_dominated(y[None, :])[0])


def box_complement_volume_2d(state: ParetoState, box: BoundingBox) -> float:
    """Exact area of box minus the dominated region, for two objectives.

    Sweeps the staircase boundary of the dominated region left to right: for
    each vertical strip between consecutive (clipped) front abscissae the
    dominated part is the area above the running minimum of the front
    ordinates seen so far.
    """
    if state.dimension != 2 or box.dimension != 2:
        raise ValueError("exact sweep is implemented for two objectives only")
    lo0, lo1 = box.lower
    up0, up1 = box.upper
    if state.front.shape[0] == 0:
        return box.volume
    a = np.clip(state.front[:, 0], lo0, up0)
    b = np.clip(state.front[:, 1], lo1, up1)
    # strip edges along the first coordinate; running min of b gives the strip top
    edges = np.concatenate([[lo0], a, [up0]])
    tops = np.concatenate([[up1], np.minimum.accumulate(b)])
    widths = np.diff(edges)
    total = float(np.sum(widths * (tops - lo1)))
    return max(total, 0.0)
