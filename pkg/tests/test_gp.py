"""Tests for the Matern 5/2 Gaussian process surrogate."""

import math

import numpy as np
import pytest
from sklearn.gaussian_process.kernels import Matern

from ewhi import gp
from ewhi.gp import (
    GpModel,
    HyperPrior,
    PredictiveDistribution,
    _objective,
    fit,
    matern52,
    predict,
    predict_batch,
    prob_dominates,
    prob_feasible,
)


def normal_cdf(z):
    """Independent standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def dense_predict(model, Xq):
    """Oracle prediction with a dense solve instead of the stored Cholesky."""
    p = model.params
    n = model.X.shape[0]
    M = matern52(model.X, model.X, p.lengthscales) + p.nugget_fraction * np.eye(n)
    c = matern52(model.X, Xq, p.lengthscales)
    resid = model.y - model.mean_constant
    mean = model.mean_constant + c.T @ np.linalg.solve(M, resid)
    var = p.signal_variance * (1.0 - np.sum(c * np.linalg.solve(M, c), axis=0))
    return mean, np.sqrt(np.maximum(var, 0.0))


class TestKernel:
    def test_unit_diagonal_and_symmetry(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(size=(8, 3))
        C = matern52(X, X, [0.5, 0.2, 1.0])
        np.testing.assert_allclose(np.diag(C), 1.0, rtol=1e-12)
        np.testing.assert_allclose(C, C.T, rtol=1e-12)
        assert np.all(C > 0) and np.all(C <= 1.0 + 1e-12)

    def test_matches_sklearn(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(size=(10, 2))
        ls = np.array([0.4, 0.7])
        C = matern52(X, X, ls)
        ref = Matern(length_scale=ls, nu=2.5)(X)
        np.testing.assert_allclose(C, ref, rtol=1e-10)


class TestFit:
    def test_constant_outputs_recover_mean(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(size=(8, 2))
        y = np.full(8, 3.25)
        model = fit(X, y, rng=np.random.default_rng(0))
        assert model.mean_constant == pytest.approx(3.25, rel=1e-10)
        mean, _ = predict_batch(model, rng.uniform(size=(5, 2)))
        np.testing.assert_allclose(mean, 3.25, rtol=1e-8)

    def test_interpolates_training_data(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(size=(15, 2))
        y = np.sin(3 * X[:, 0]) * np.cos(2 * X[:, 1])
        model = fit(X, y, rng=np.random.default_rng(0))
        mean, sd = predict_batch(model, X)
        np.testing.assert_allclose(mean, y, atol=1e-6)
        assert np.all(sd <= 1e-4 * np.sqrt(model.params.signal_variance))

    def test_far_field_reverts_to_prior(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(size=(10, 1))
        y = np.sin(5 * X[:, 0])
        model = fit(X, y, rng=np.random.default_rng(0))
        mean, sd = predict(model, [1e4])
        assert mean == pytest.approx(model.mean_constant, abs=1e-8)
        assert sd == pytest.approx(np.sqrt(model.params.signal_variance), rel=0.01)

    def test_lengthscale_recovery(self):
        # draw functions from a known Matern 5/2 process and check the
        # fitted lengthscale lands within a factor of two most of the time
        true_ls = 0.3
        kernel = Matern(length_scale=true_ls, nu=2.5)
        hits = 0
        n_trials = 20
        for seed in range(n_trials):
            rng = np.random.default_rng(1000 + seed)
            X = rng.uniform(size=(50, 1))
            K = kernel(X) + 1e-10 * np.eye(50)
            y = np.linalg.cholesky(K) @ rng.standard_normal(50)
            model = fit(X, y, rng=np.random.default_rng(seed))
            ls = model.params.lengthscales[0]
            if true_ls / 2 <= ls <= true_ls * 2:
                hits += 1
        assert hits >= 0.8 * n_trials

    def test_collinear_inputs(self):
        # inputs on the diagonal of the square, linear outputs; the nugget
        # escalation keeps the factorization usable and prediction accurate
        t = np.linspace(0.0, 1.0, 5)
        X = np.column_stack([t, t])
        y = 2.0 * t + 1.0
        model = fit(X, y, rng=np.random.default_rng(0))
        mean, _ = predict(model, [0.45, 0.45])
        assert mean == pytest.approx(1.9, abs=0.05)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(size=(12, 2))
        y = X[:, 0] ** 2 + X[:, 1]
        a = fit(X, y, rng=np.random.default_rng(7))
        b = fit(X, y, rng=np.random.default_rng(7))
        assert a.params.signal_variance == b.params.signal_variance
        np.testing.assert_array_equal(a.params.lengthscales, b.params.lengthscales)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            fit(np.zeros((3, 2)), np.zeros(4))


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(size=(12, 2))
        y = np.sin(4 * X[:, 0]) + X[:, 1]
        prior = HyperPrior.from_data(X, y)
        for trial in range(3):
            u = rng.normal(scale=0.8, size=3)
            _, g, _ = _objective(u, X, y, prior)
            h = 1e-6
            for j in range(3):
                up, um = u.copy(), u.copy()
                up[j] += h
                um[j] -= h
                fd = (
                    _objective(up, X, y, prior)[0] - _objective(um, X, y, prior)[0]
                ) / (2 * h)
                assert g[j] == pytest.approx(fd, rel=1e-3, abs=1e-6)


class TestPredict:
    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(9)
        X = rng.uniform(size=(20, 2))
        y = np.cos(3 * X[:, 0]) + X[:, 1] ** 2
        model = fit(X, y, rng=np.random.default_rng(0))
        Xq = rng.uniform(-0.5, 1.5, size=(40, 2))
        mean, sd = predict_batch(model, Xq)
        ref_mean, ref_sd = dense_predict(model, Xq)
        np.testing.assert_allclose(mean, ref_mean, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(sd, ref_sd, rtol=1e-6, atol=1e-10)

    def test_variance_non_negative_everywhere(self):
        rng = np.random.default_rng(10)
        X = rng.uniform(size=(25, 2))
        y = np.sin(8 * X[:, 0] * X[:, 1])
        model = fit(X, y, rng=np.random.default_rng(0))
        Xq = rng.uniform(-1.0, 2.0, size=(10000, 2))
        _, sd = predict_batch(model, Xq)
        assert np.all(sd >= 0.0) and np.all(np.isfinite(sd))


class TestProbDominates:
    def test_at_the_mean(self):
        pred = PredictiveDistribution(means=[1.0, 2.0], sds=[0.5, 0.5])
        assert prob_dominates(pred, [1.0, 2.0]) == pytest.approx(0.25, rel=1e-12)

    def test_against_erf_oracle(self):
        pred = PredictiveDistribution(means=[0.0, 0.0], sds=[1.0, 2.0])
        got = prob_dominates(pred, [1.96, 3.92])
        assert got == pytest.approx(normal_cdf(1.96) ** 2, rel=1e-10)

    def test_degenerate_marginals(self):
        pred = PredictiveDistribution(means=[1.0, 2.0], sds=[0.0, 1.0])
        assert prob_dominates(pred, [1.0, 2.0]) == pytest.approx(0.5)
        assert prob_dominates(pred, [0.9, 2.0]) == 0.0
        both = PredictiveDistribution(means=[1.0, 2.0], sds=[0.0, 0.0])
        assert prob_dominates(both, [1.0, 2.0]) == 1.0
        assert prob_dominates(both, [2.0, 1.0]) == 0.0

    def test_monotone_in_y(self):
        rng = np.random.default_rng(11)
        pred = PredictiveDistribution(means=[0.0, 0.0], sds=[1.0, 1.0])
        for _ in range(100):
            y = rng.normal(size=2)
            step = rng.uniform(0, 1, size=2)
            assert prob_dominates(pred, y + step) >= prob_dominates(pred, y)

    def test_limits(self):
        pred = PredictiveDistribution(means=[0.0, 0.0], sds=[1.0, 1.0])
        assert prob_dominates(pred, [50.0, 50.0]) == pytest.approx(1.0, abs=1e-12)
        assert prob_dominates(pred, [-50.0, -50.0]) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        pred = PredictiveDistribution(means=[0.0, 0.0], sds=[1.0, 1.0])
        with pytest.raises(ValueError):
            prob_dominates(pred, [0.0, 0.0, 0.0])


class TestProbFeasible:
    def test_values(self):
        pred = PredictiveDistribution(means=[0.0], sds=[1.0])
        assert prob_feasible(pred) == pytest.approx(0.5, rel=1e-12)
        pred = PredictiveDistribution(means=[-8.0, -8.0], sds=[1.0, 1.0])
        assert prob_feasible(pred) == pytest.approx(1.0, abs=1e-12)
        pred = PredictiveDistribution(means=[-1.0, 1.0], sds=[1.0, 1.0])
        expected = normal_cdf(1.0) * normal_cdf(-1.0)
        assert prob_feasible(pred) == pytest.approx(expected, rel=1e-10)

    def test_degenerate(self):
        assert prob_feasible(PredictiveDistribution(means=[-1.0], sds=[0.0])) == 1.0
        assert prob_feasible(PredictiveDistribution(means=[1.0], sds=[0.0])) == 0.0
