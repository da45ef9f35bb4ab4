"""R-sweep experiments, fits, property suites and the symmetry diagnostic."""

from .fitting import check_radii, fit_log_corrected, fit_power, predicted_exponent
from .perturbation import Bump, perturbation_experiment, tanh_layer
from .report import ExperimentReport
from .scaling import scaling_experiment, tail_estimate_check
from .suites import (SuiteResult, appendix_inequality_suite, convexity_suite, gradient_check,
                     submodularity_suite)
from .symmetry import SymmetryResult, direction, symmetry_diagnostic

__all__ = [
    "check_radii", "fit_log_corrected", "fit_power", "predicted_exponent", "Bump",
    "perturbation_experiment", "tanh_layer", "ExperimentReport", "scaling_experiment",
    "tail_estimate_check", "SuiteResult", "appendix_inequality_suite", "convexity_suite",
    "gradient_check", "submodularity_suite", "SymmetryResult", "direction",
    "symmetry_diagnostic",
]
