"""Simulation and extremal analysis of periodically controlled imputation models."""

__version__ = "0.1.0"

from .errors import (
    ArityError,
    ConfigurationError,
    PCImputeError,
    SampleTooShortError,
    StructuralError,
    UndefinedEstimateError,
    UnsupportedError,
)
from .estimation import estimate_p, plugin_theta, runs_extremal_index
from .imputation import ModelConfig, generate_mask, impute, simulate_series
from .processes import DistributionSpec, ProcessConfig, generate
from .theory import marginal_cdf_Fj, stagnation_probability, tau_combined, theta_y_closed_form

__all__ = [
    "ArityError",
    "ConfigurationError",
    "DistributionSpec",
    "ModelConfig",
    "PCImputeError",
    "ProcessConfig",
    "SampleTooShortError",
    "StructuralError",
    "UndefinedEstimateError",
    "UnsupportedError",
    "estimate_p",
    "generate",
    "generate_mask",
    "impute",
    "marginal_cdf_Fj",
    "plugin_theta",
    "runs_extremal_index",
    "simulate_series",
    "stagnation_probability",
    "tau_combined",
    "theta_y_closed_form",
]
