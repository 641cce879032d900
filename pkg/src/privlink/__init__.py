"""Privacy-preserving feature transmission over fading wireless channels.

Library + CLI implementing the full chain: random-projection encoding,
Gaussian privacy noise calibrated to a feature-level (epsilon, delta)
budget, fading-channel transmission, closed-form adversarial MSE floors,
and a Monte Carlo harness that validates every bound empirically.
"""

from . import acquisition, adversary, bounds, harness, mimo, pipeline, privacy, randmat
from .errors import (
    DegenerateError,
    DimensionError,
    InfeasibleError,
    ParameterError,
    PrivlinkError,
    RegimeError,
)
from .harness import ExperimentConfig, closed_forms, run_trials, sweep
from .privacy import PrivacyBudget, calibrate

__all__ = [
    "acquisition", "adversary", "bounds", "harness", "mimo", "pipeline",
    "privacy", "randmat",
    "PrivlinkError", "DimensionError", "ParameterError", "InfeasibleError",
    "RegimeError", "DegenerateError",
    "ExperimentConfig", "closed_forms", "run_trials", "sweep",
    "PrivacyBudget", "calibrate",
]

__version__ = "0.1.0"
