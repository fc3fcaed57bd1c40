"""Tests for the preference weight functions."""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from ewhi.pareto import BoundingBox
from ewhi.weights import (
    ExponentialPreferenceWeight,
    GaussianMixtureWeight,
    ScaledWeight,
    UniformBoxWeight,
)


def grid_integral(weight, box, n0, n1):
    """Midpoint-rule integral of the weight over the box."""
    e0 = np.linspace(box.lower[0], box.upper[0], n0 + 1)
    e1 = np.linspace(box.lower[1], box.upper[1], n1 + 1)
    c0 = 0.5 * (e0[:-1] + e0[1:])
    c1 = 0.5 * (e1[:-1] + e1[1:])
    G0, G1 = np.meshgrid(c0, c1, indexing="ij")
    pts = np.column_stack([G0.ravel(), G1.ravel()])
    cell = (e0[1] - e0[0]) * (e1[1] - e1[0])
    return float(np.sum(weight(pts)) * cell)


class TestUniformBoxWeight:
    def test_indicator_values(self):
        w = UniformBoxWeight(BoundingBox([0.0, 0.0], [150.0, 60.0]))
        assert w([10.0, 10.0]) == 1.0
        assert w([0.0, 0.0]) == 1.0
        assert w([150.0, 60.0]) == 1.0
        assert w([151.0, 10.0]) == 0.0
        assert w([-1.0, 10.0]) == 0.0

    def test_log_weight(self):
        w = UniformBoxWeight(BoundingBox([0.0, 0.0], [1.0, 1.0]))
        lw = w.log_weight([[0.5, 0.5], [2.0, 0.5]])
        assert lw[0] == 0.0
        assert lw[1] == -np.inf


class TestExponentialPreferenceWeight:
    def test_reference_values(self):
        w = ExponentialPreferenceWeight()
        assert w([0.0, 0.0]) == pytest.approx(1.0 / 135000.0, rel=1e-12)
        assert w([15.0, 30.0]) == pytest.approx(np.exp(-1.0) / 135000.0, rel=1e-12)
        assert w([15.0, 59.0]) == w([15.0, 1.0])  # flat in the second objective
        assert w([151.0, 30.0]) == 0.0
        assert w([-1.0, 30.0]) == 0.0
        assert w([10.0, 61.0]) == 0.0

    def test_total_mass(self):
        # exact mass over the box: (1 - exp(-10)) / 150
        w = ExponentialPreferenceWeight()
        approx = grid_integral(w, w.support_box, 3000, 100)
        assert approx == pytest.approx((1.0 - np.exp(-10.0)) / 150.0, rel=1e-4)

    def test_custom_rate_and_box(self):
        box = BoundingBox([1.0, 2.0], [3.0, 4.0])
        w = ExponentialPreferenceWeight(rate=0.5, box=box)
        # value at the lower corner: 1/(rate * area)
        assert w([1.0, 2.0]) == pytest.approx(1.0 / (0.5 * 4.0), rel=1e-12)
        assert w([2.0, 3.0]) == pytest.approx(np.exp(-2.0) / 2.0, rel=1e-12)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            ExponentialPreferenceWeight(rate=0.0)


class TestGaussianMixtureWeight:
    def test_covariance_matrix(self):
        w = GaussianMixtureWeight()
        np.testing.assert_allclose(
            w.covariance, [[204.5, 195.5], [195.5, 204.5]], rtol=1e-12
        )
        assert np.linalg.det(w.covariance) == pytest.approx(3600.0, rel=1e-10)

    def test_component_symmetry(self):
        w = GaussianMixtureWeight()
        assert w([80.0, 20.0]) == w([30.0, 40.0])

    def test_local_symmetry_at_component_mean(self):
        # the active bump is even about its mean and the other bump is
        # negligible there, so small offsets in opposite directions agree
        w = GaussianMixtureWeight()
        mu = np.array([80.0, 20.0])
        for v in ([1.0, 0.5], [-0.8, 1.2], [2.0, -1.5]):
            v = np.array(v)
            assert w(mu + v) == pytest.approx(w(mu - v), rel=1e-12)

    def test_peak_value(self):
        # at a component mean the other bump is ~exp(-137), so the value is
        # half the component normalization 1/(2 pi sqrt(det))
        w = GaussianMixtureWeight()
        assert w([80.0, 20.0]) == pytest.approx(0.5 / (2 * np.pi * 60.0), rel=1e-10)

    def test_matches_scipy_mixture(self):
        w = GaussianMixtureWeight()
        rng = np.random.default_rng(5)
        pts = rng.uniform([0, 0], [150, 60], size=(200, 2))
        d1 = multivariate_normal(mean=[80, 20], cov=w.covariance)
        d2 = multivariate_normal(mean=[30, 40], cov=w.covariance)
        expected = 0.5 * (d1.pdf(pts) + d2.pdf(pts))
        np.testing.assert_allclose(w(pts), expected, rtol=1e-10)

    def test_box_mass_below_one(self):
        w = GaussianMixtureWeight()
        coarse = grid_integral(w, w.support_box, 300, 120)
        fine = grid_integral(w, w.support_box, 600, 240)
        assert fine < 1.0
        assert fine > 0.8  # most of the mixture mass lies inside the box
        assert abs(fine - coarse) < 5e-3  # refinement stable


class TestCommonBehavior:
    @pytest.fixture(params=["uniform", "exponential", "mixture"])
    def weight(self, request):
        if request.param == "uniform":
            return UniformBoxWeight(BoundingBox([0.0, 0.0], [150.0, 60.0]))
        if request.param == "exponential":
            return ExponentialPreferenceWeight()
        return GaussianMixtureWeight()

    def test_non_negative(self, weight):
        rng = np.random.default_rng(17)
        pts = rng.uniform([-50, -50], [250, 150], size=(100000, 2))
        assert np.all(weight(pts) >= 0.0)

    def test_vectorized_matches_pointwise(self, weight):
        rng = np.random.default_rng(19)
        pts = rng.uniform([-10, -10], [160, 70], size=(50, 2))
        batch = weight(pts)
        single = np.array([weight(p) for p in pts])
        np.testing.assert_allclose(batch, single, rtol=1e-12, atol=1e-300)

    def test_log_weight_consistent(self, weight):
        rng = np.random.default_rng(23)
        pts = rng.uniform([-10, -10], [160, 70], size=(50, 2))
        vals = weight(pts)
        logs = weight.log_weight(pts)
        pos = vals > 0
        np.testing.assert_allclose(logs[pos], np.log(vals[pos]), rtol=1e-10)
        assert np.all(np.isneginf(logs[~pos]))


class TestScaledWeight:
    def test_scaling(self):
        base = ExponentialPreferenceWeight()
        w = ScaledWeight(base, 1000.0)
        pts = np.array([[10.0, 10.0], [200.0, 10.0]])
        np.testing.assert_allclose(w(pts), 1000.0 * base(pts), rtol=1e-12)
        np.testing.assert_allclose(
            w.log_weight(pts)[0], base.log_weight(pts)[0] + np.log(1000.0), rtol=1e-12
        )
        with pytest.raises(ValueError):
            ScaledWeight(base, 0.0)
