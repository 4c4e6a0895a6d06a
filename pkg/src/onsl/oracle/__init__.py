"""Exact score fields, perturbations, and exact law propagation."""

from .distributions import (
    DiscreteSupport,
    DistributionError,
    GaussianLaw,
    GaussianMixture,
    SingularScoreError,
    load_distribution,
    mixture_marginal,
)
from .perturb import (
    PerturbedScore,
    ScoreErrorEstimate,
    measure_score_error,
    perturb_score,
)
from .propagate import (
    NonAffineScoreError,
    propagate_affine,
    propagate_algorithm1_gaussian,
)
from .scores import (
    AffineScore,
    CapabilityError,
    DiscreteScore,
    MixtureScore,
    ScoreField,
    ZSpaceView,
    exact_score_field,
    posterior_score_discrete,
    score,
    score_jacobian,
    score_laplacian,
)

__all__ = [
    "AffineScore",
    "CapabilityError",
    "DiscreteScore",
    "DiscreteSupport",
    "DistributionError",
    "GaussianLaw",
    "GaussianMixture",
    "MixtureScore",
    "NonAffineScoreError",
    "PerturbedScore",
    "ScoreErrorEstimate",
    "ScoreField",
    "SingularScoreError",
    "ZSpaceView",
    "exact_score_field",
    "load_distribution",
    "measure_score_error",
    "mixture_marginal",
    "perturb_score",
    "posterior_score_discrete",
    "propagate_affine",
    "propagate_algorithm1_gaussian",
    "score",
    "score_jacobian",
    "score_laplacian",
]
