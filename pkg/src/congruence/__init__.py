"""Conditional congruence error for probabilistic regression models.

Kernel-based estimates of the maximum conditional mean discrepancy between
ground-truth samples and samples drawn from a model's predictive
distributions, plus the calibration baselines (PIT, ECE, NLL) they are
usually compared with.
"""

from importlib import resources

from .calibration import (CalibrationReport, calibration_report, confidence_levels, ece, mean_nll,
                          pit_values, reliability_curve)
from .cce import (CongruenceReport, ModelPrediction, RejectSweepResult, build_model_sample, cce_eval,
                  default_config, point_predictions, reject_sweep)
from .distributions import (DiscreteSupport, DoublePoisson, Gaussian, InvalidSupportValue,
                            NegativeBinomial, Poisson, PredictiveDistribution, cdf, density,
                            from_params, nb_from_moments, nll, sample)
from .kernels import DegenerateOutputs, GramMatrix, KernelSpec, cross_gram, gram, kernel_eval, output_bandwidth
from .mcmd import (CholeskyFailure, ConditionalEmbedding, MCMDConfig, MCMDEstimator, SampleSet, downsample,
                   mcmd_profile, mcmd_sq_at, regularized_factor, regularized_inverse)

__version__ = "0.1.0"


def schema_path():
    """Location of the JSON schema that every emitted report validates against."""
    return resources.files(__name__).joinpath("schema", "report.schema.json")


__all__ = [
    "CalibrationReport", "calibration_report", "confidence_levels", "ece", "mean_nll", "pit_values",
    "reliability_curve",
    "CongruenceReport", "ModelPrediction", "RejectSweepResult", "build_model_sample", "cce_eval",
    "default_config", "point_predictions", "reject_sweep",
    "DiscreteSupport", "DoublePoisson", "Gaussian", "InvalidSupportValue", "NegativeBinomial", "Poisson",
    "PredictiveDistribution", "cdf", "density", "from_params", "nb_from_moments", "nll", "sample",
    "DegenerateOutputs", "GramMatrix", "KernelSpec", "cross_gram", "gram", "kernel_eval", "output_bandwidth",
    "CholeskyFailure", "ConditionalEmbedding", "MCMDConfig", "MCMDEstimator", "SampleSet", "downsample",
    "mcmd_profile", "mcmd_sq_at", "regularized_factor", "regularized_inverse", "schema_path",
]
