"""Tests for the benchmark problem definitions."""

import numpy as np
import pytest

from ewhi.problems import bnh, evaluate, toy_sphere_pair


def bnh_reference(x1, x2):
    """Independent re-typed implementation of the constrained benchmark."""
    f = (4 * x1 * x1 + 4 * x2 * x2, (x1 - 5) * (x1 - 5) + (x2 - 5) * (x2 - 5))
    g = (
        (x1 - 5) * (x1 - 5) + x2 * x2 - 25,
        7.7 - (x1 - 8) * (x1 - 8) - (x2 + 3) * (x2 + 3),
    )
    return np.array(f), np.array(g)


class TestBnh:
    def test_metadata(self):
        prob = bnh()
        assert prob.dimension == 2
        assert prob.num_objectives == 2
        assert prob.num_constraints == 2
        np.testing.assert_array_equal(prob.bounds, [[0.0, 5.0], [0.0, 3.0]])

    def test_known_points(self):
        prob = bnh()
        f, g = evaluate(prob, [0.0, 0.0])
        np.testing.assert_allclose(f, [0.0, 50.0])
        np.testing.assert_allclose(g, [0.0, -65.3])
        f, g = evaluate(prob, [5.0, 3.0])
        np.testing.assert_allclose(f, [136.0, 4.0])
        np.testing.assert_allclose(g, [9.0 - 25.0, 7.7 - 9.0 - 36.0])

    def test_matches_reference_implementation(self):
        prob = bnh()
        rng = np.random.default_rng(0)
        X = rng.uniform([0, 0], [5, 3], size=(1000, 2))
        F, G = prob.evaluate_batch(X)
        for i, x in enumerate(X):
            f_ref, g_ref = bnh_reference(x[0], x[1])
            np.testing.assert_allclose(F[i], f_ref, rtol=1e-12)
            np.testing.assert_allclose(G[i], g_ref, rtol=1e-12)

    def test_objectives_stay_in_weight_box(self):
        # every input in the box maps into [0, 150] x [0, 60]
        prob = bnh()
        g1 = np.linspace(0, 5, 1000)
        g2 = np.linspace(0, 3, 600)
        X = np.column_stack([np.repeat(g1, 600), np.tile(g2, 1000)])
        F, _ = prob.evaluate_batch(X)
        assert F[:, 0].min() >= 0.0 and F[:, 0].max() <= 150.0
        assert F[:, 1].min() >= 0.0 and F[:, 1].max() <= 60.0

    def test_feasible_points_exist(self):
        prob = bnh()
        rng = np.random.default_rng(1)
        X = rng.uniform([0, 0], [5, 3], size=(2000, 2))
        _, G = prob.evaluate_batch(X)
        feasible = np.all(G <= 0, axis=1)
        assert 0.4 < feasible.mean() < 1.0

    def test_input_validation(self):
        prob = bnh()
        with pytest.raises(ValueError):
            prob.evaluate([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            prob.evaluate_batch(np.zeros((4, 3)))


class TestToySpherePair:
    def test_values(self):
        prob = toy_sphere_pair()
        f, g = prob.evaluate([0.0])
        np.testing.assert_allclose(f, [0.0, 1.0])
        assert g.shape == (0,)
        f, _ = prob.evaluate([1.0])
        np.testing.assert_allclose(f, [1.0, 0.0])
        f, _ = prob.evaluate([0.5])
        np.testing.assert_allclose(f, [0.25, 0.25])

    def test_metadata(self):
        prob = toy_sphere_pair()
        assert prob.dimension == 1
        assert prob.num_objectives == 2
        assert prob.num_constraints == 0
        np.testing.assert_array_equal(prob.bounds, [[0.0, 1.0]])

    def test_tradeoff_along_segment(self):
        prob = toy_sphere_pair()
        t = np.linspace(0.0, 1.0, 11)
        F, _ = prob.evaluate_batch(t[:, None])
        assert np.all(np.diff(F[:, 0]) > 0)
        assert np.all(np.diff(F[:, 1]) < 0)

    def test_single_matches_batch(self):
        prob = toy_sphere_pair()
        rng = np.random.default_rng(2)
        X = rng.uniform(size=(20, 1))
        F, G = prob.evaluate_batch(X)
        for i, x in enumerate(X):
            f, g = prob.evaluate(x)
            np.testing.assert_array_equal(f, F[i])
            np.testing.assert_array_equal(g, G[i])
