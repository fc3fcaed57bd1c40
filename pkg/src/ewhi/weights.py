"""Weight functions encoding user preferences over the objective space.

A weight function assigns a non-negative importance to each objective vector;
the optimizer maximizes the expected weighted improvement, so regions with
larger weight attract more refinement of the Pareto front.  Each weight
carries a ``support_box`` telling the sampler where to look: integrals and
particle systems are restricted to that box (mass outside, if any, is
deliberately ignored).

All weights evaluate vectorized on (m, p) arrays and expose an exact
``log_weight`` so downstream code can work in log space without underflow.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from ewhi.pareto import BoundingBox

__all__ = [
    "WeightFunction",
    "UniformBoxWeight",
    "ExponentialPreferenceWeight",
    "GaussianMixtureWeight",
    "ScaledWeight",
]


class WeightFunction:
    """Base class: subclasses set ``support_box`` and implement ``log_weight``."""

    support_box: BoundingBox

    def log_weight(self, Y) -> np.ndarray:
        """Natural log of the weight, -inf where the weight is zero; shape (m,)."""
        raise NotImplementedError

    def evaluate(self, Y) -> np.ndarray:
        """Weight values for rows of Y, shape (m,)."""
        return np.exp(self.log_weight(Y))

    def __call__(self, Y):
        """Evaluate on one point (returns a float) or a batch (returns (m,))."""
        Y = np.asarray(Y, dtype=float)
        if Y.ndim == 1:
            return float(self.evaluate(Y[None, :])[0])
        return self.evaluate(Y)

    def _check(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.support_box.dimension:
            raise ValueError(
                f"points have dimension {Y.shape[1]}, "
                f"weight expects {self.support_box.dimension}"
            )
        return Y


class UniformBoxWeight(WeightFunction):
    """Indicator of the support box: 1 inside, 0 outside.

    With this weight the expected weighted improvement of a candidate equals
    its expected hypervolume improvement with respect to the box upper corner
    as reference point (restricted to the box).
    """

    def __init__(self, box: BoundingBox):
        self.support_box = box

    def log_weight(self, Y):
        Y = self._check(Y)
        out = np.where(self.support_box.contains(Y), 0.0, -np.inf)
        return out


class ExponentialPreferenceWeight(WeightFunction):
    """Exponential decay in the first objective, uniform in the rest.

    Inside the support box the value is

        (1/rate) * exp(-(y_1 - lower_1)/rate) / prod_j (upper_j - lower_j)

    and zero outside.  This emphasizes solutions with a small first objective
    while remaining indifferent along the other coordinates.  The default box
    and rate reproduce the exponential preference used by the bundled
    two-objective benchmark (rate 15 on [0, 150] x [0, 60]).
    """

    def __init__(self, rate: float = 15.0, box: BoundingBox | None = None):
        if rate <= 0:
            raise ValueError("rate must be positive")
        if box is None:
            box = BoundingBox([0.0, 0.0], [150.0, 60.0])
        self.rate = float(rate)
        self.support_box = box
        self._log_norm = -np.log(self.rate) - np.sum(np.log(box.upper - box.lower))

    def log_weight(self, Y):
        Y = self._check(Y)
        inside = self.support_box.contains(Y)
        t = (Y[:, 0] - self.support_box.lower[0]) / self.rate
        out = np.where(inside, self._log_norm - t, -np.inf)
        return out


class GaussianMixtureWeight(WeightFunction):
    """Equal-weight mixture of rotated anisotropic Gaussian bumps.

    Component covariance is (R S)(R S)^T where R rotates by ``angle`` and
    S = diag(scales); all components share it.  The formula is a proper
    mixture density on the whole plane, but sampling and integration are
    restricted to ``support_box``, so a bump near the box boundary loses the
    mass that falls outside.  Defaults place two elongated diagonal ridges at
    (80, 20) and (30, 40), a preference for two separate regions of the
    front.
    """

    def __init__(
        self,
        means=((80.0, 20.0), (30.0, 40.0)),
        angle: float = np.pi / 4,
        scales=(20.0, 3.0),
        box: BoundingBox | None = None,
    ):
        if box is None:
            box = BoundingBox([0.0, 0.0], [150.0, 60.0])
        if box.dimension != 2:
            raise ValueError("gaussian mixture weight is two-dimensional")
        self.means = np.atleast_2d(np.asarray(means, dtype=float))
        if self.means.shape[1] != 2:
            raise ValueError("component means must be two-dimensional")
        self.angle = float(angle)
        self.scales = np.asarray(scales, dtype=float)
        self.support_box = box
        c, s = np.cos(self.angle), np.sin(self.angle)
        R = np.array([[c, -s], [s, c]])
        A = R @ np.diag(self.scales)
        self.covariance = A @ A.T
        self._cov_inv = np.linalg.inv(self.covariance)
        sign, logdet = np.linalg.slogdet(self.covariance)
        if sign <= 0:
            raise ValueError("component covariance must be positive definite")
        self._log_norm = -np.log(2 * np.pi) - 0.5 * logdet

    def log_weight(self, Y):
        Y = self._check(Y)
        # log of the average of component densities, computed stably
        D = Y[:, None, :] - self.means[None, :, :]
        q = np.einsum("mki,ij,mkj->mk", D, self._cov_inv, D)
        comp = self._log_norm - 0.5 * q
        return logsumexp(comp, axis=1) - np.log(self.means.shape[0])


class ScaledWeight(WeightFunction):
    """A weight multiplied by a positive constant.

    The optimal sampling density and the estimator's self-normalized ratios
    are invariant under this scaling; only the improvement values and the
    particle-system normalizing constant pick up the factor.
    """

    def __init__(self, base: WeightFunction, factor: float):
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        self.base = base
        self.factor = float(factor)
        self.support_box = base.support_box

    def log_weight(self, Y):
        return self.base.log_weight(Y) + np.log(self.factor)
