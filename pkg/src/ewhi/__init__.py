"""Preference-weighted hypervolume-improvement Bayesian optimization toolkit.

The package computes the expected weighted hypervolume improvement of
candidate points under independent Gaussian-process surrogates, using
importance sampling from a variance-optimal density produced by a
sequential Monte Carlo sampler, and wraps the whole thing in a
constrained multi-objective optimization loop.
"""

from ewhi.acquisition import (
    CandidateSet,
    EwhiEstimate,
    estimate_batch,
    optimal_sampling_density,
    select_next,
)
from ewhi.gp import GpModel, PredictiveDistribution, fit, predict_batch
from ewhi.optimize import EvaluationError, OptimizationRun, run
from ewhi.pareto import (
    BoundingBox,
    ParetoState,
    box_complement_volume_2d,
    dominates,
    in_dominated_region,
    update_front,
)
from ewhi.problems import Problem, bnh, toy_sphere_pair
from ewhi.smc import (
    DegenerateTargetError,
    InitializationError,
    ParticleSystem,
    init_particles,
    run_smc,
)
from ewhi.weights import (
    ExponentialPreferenceWeight,
    GaussianMixtureWeight,
    ScaledWeight,
    UniformBoxWeight,
    WeightFunction,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CandidateSet",
    "DegenerateTargetError",
    "EvaluationError",
    "EwhiEstimate",
    "ExponentialPreferenceWeight",
    "GaussianMixtureWeight",
    "GpModel",
    "InitializationError",
    "OptimizationRun",
    "ParetoState",
    "ParticleSystem",
    "PredictiveDistribution",
    "Problem",
    "ScaledWeight",
    "UniformBoxWeight",
    "WeightFunction",
    "bnh",
    "box_complement_volume_2d",
    "dominates",
    "estimate_batch",
    "fit",
    "in_dominated_region",
    "init_particles",
    "optimal_sampling_density",
    "predict_batch",
    "run",
    "run_smc",
    "select_next",
    "toy_sphere_pair",
    "update_front",
    "__version__",
]
