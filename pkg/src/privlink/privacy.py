"""Noise calibration for (epsilon, delta) feature-level privacy.

The privatization step adds N(0, sigma^2 I_r) to the projected feature.
sigma^2 is calibrated from the Gaussian-mechanism sensitivity chain: the
clipped-pair distance 2*C_f times the spectral-norm bound on the encoder
gives the l2 sensitivity, and the (r + d) relaxation of (sqrt(r)+sqrt(d))^2
yields the closed form

    sigma^2 = 8 * C_w^2 * b^2 * C_f^2 * (r + d) * ln(1.25/delta) / eps^2.

The guarantee is conditional on the encoder staying under its spectral
bound, which fails with probability at most delta, hence the overall
budget degrades to (eps, 2*delta).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .randmat import spectral_bound


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class NoiseCalibration:
    """Privacy noise variance with the quantities it was derived from."""

    sigma2: float       # privacy noise variance
    sensitivity: float  # l2 sensitivity bound Delta_2
    c_w: float          # spectral-bound constant
    d_z: float          # high-probability bound on ||W f||_2


def calibrate(budget: PrivacyBudget, r: int, d: int, b: float, C_f: float) -> NoiseCalibration:
    """Calibrate the Gaussian privacy noise for an r x d Laplace(0, b) encoder."""
    if r > d:
        raise DimensionError(f"calibration requires r <= d, got r={r} > d={d}")
    if C_f <= 0:
        raise ParameterError(f"clip norm C_f must be positive, got {C_f}")
    sb = spectral_bound(r, d, b, budget.delta)
    d_z = C_f * sb.norm_bound
    sensitivity = 2.0 * d_z
    sigma2 = (
        8.0 * sb.c_w**2 * b**2 * C_f**2 * (r + d)
        * np.log(1.25 / budget.delta) / budget.epsilon**2
    )
    return NoiseCalibration(
        sigma2=float(sigma2), sensitivity=float(sensitivity), c_w=sb.c_w, d_z=float(d_z)
    )


def sensitivity_bound(C_f: float, spectral_norm_bound: float) -> float:
    """l2 sensitivity of f -> W f over clipped pairs, ||f - f'|| <= 2 C_f."""
    if C_f <= 0 or spectral_norm_bound <= 0:
        raise ParameterError("C_f and the spectral bound must be positive")
    return 2.0 * C_f * spectral_norm_bound


def sigma_from_sensitivity(delta2: float, budget: PrivacyBudget) -> float:
    """Gaussian-mechanism variance for sensitivity delta2: 2 delta2^2 ln(1.25/delta)/eps^2."""
    if delta2 <= 0:
        raise ParameterError(f"sensitivity must be positive, got {delta2}")
    return float(2.0 * delta2**2 * np.log(1.25 / budget.delta) / budget.epsilon**2)
