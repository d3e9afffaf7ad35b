"""Bayesian post-processing of single-shot number-resolving detector signatures.

Model a lossy, dark-count-prone photon counter as a conditional probability
matrix P(m|n), invert it against a known photon-number prior, and read off
how each raw count should be reinterpreted and with what confidence.
"""

from .detector import (
    ConditionalMatrix,
    DetectorParams,
    build_matrix,
    conditional_prob,
    poisson_pmf,
)
from .inference import OptimisationReport, PosteriorMatrix, optimisation_map, posterior
from .montecarlo import (
    EmpiricalColumn,
    ShotConfig,
    column_stream,
    empirical_joint,
    empirical_matrix,
    joint_stream,
    sample_shot,
)
from .priors import NumberPrior, custom_prior, pdc_prior, uniform_prior

__version__ = "0.1.0"

__all__ = [
    "ConditionalMatrix",
    "DetectorParams",
    "EmpiricalColumn",
    "NumberPrior",
    "OptimisationReport",
    "PosteriorMatrix",
    "ShotConfig",
    "build_matrix",
    "column_stream",
    "conditional_prob",
    "custom_prior",
    "empirical_joint",
    "empirical_matrix",
    "joint_stream",
    "optimisation_map",
    "pdc_prior",
    "poisson_pmf",
    "posterior",
    "sample_shot",
    "uniform_prior",
    "__version__",
]
