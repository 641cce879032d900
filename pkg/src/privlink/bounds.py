"""Server-side closed forms: MSE upper bound, accuracy floor, dimension selection.

The server MSE splits into approximation, privacy and channel terms:

    ||beta h alpha D W - I||_F^2 ||f||^2
    + beta^2 h^2 alpha^2 sigma^2 ||D||_F^2 + beta^2 sigma_m^2 ||D||_F^2.

The accuracy floor is max(0, P0 (1 - MSE/margin^2)).  Dimension selection
picks the smallest r whose adversarial MSE floor still reaches a target
Omega; two solvers are provided because the closed-form ceiling treats
(nu^2, D_z) as r-independent while the calibration actually ties both to r.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import adversary, privacy
from .errors import DimensionError, InfeasibleError, ParameterError
from .randmat import EncoderMatrix


@dataclass(frozen=True)
class ServerMseBound:
    approx_term: float
    privacy_term: float
    channel_term: float
    total: float


@dataclass(frozen=True)
class AccuracyBound:
    p0: float
    margin: float
    mse: float
    lower: float


@dataclass(frozen=True)
class DimensionSolution:
    r_star: int
    omega: float
    mode: str  # "explicit" or "consistent"


def server_mse_bound(beta: float, h: float, alpha: float, Dec: np.ndarray,
                     W: EncoderMatrix, sigma2: float, sigma_m2: float,
                     f_norm2: float) -> ServerMseBound:
    """Three-term upper bound on E||f_hat - f||^2 at the server."""
    Dec = np.asarray(Dec, dtype=float)
    if Dec.shape != (W.d, W.r):
        raise DimensionError(f"decoder shape {Dec.shape} != ({W.d}, {W.r})")
    if f_norm2 < 0:
        raise ParameterError("f_norm2 must be non-negative")
    scale = beta * h * alpha
    mismatch = scale * (Dec @ W.entries) - np.eye(W.d)
    dec_f2 = float(np.sum(Dec**2))
    approx = float(np.sum(mismatch**2)) * f_norm2
    priv = scale**2 * sigma2 * dec_f2
    chan = beta**2 * sigma_m2 * dec_f2
    return ServerMseBound(
        approx_term=approx, privacy_term=priv, channel_term=chan,
        total=approx + priv + chan,
    )


def accuracy_lower_bound(p0: float, mse: float, margin: float) -> AccuracyBound:
    """Classification accuracy floor max(0, p0 (1 - mse/margin^2))."""
    if not 0.0 <= p0 <= 1.0:
        raise ParameterError(f"p0 must lie in [0, 1], got {p0}")
    if margin <= 0:
        raise ParameterError(f"margin must be positive, got {margin}")
    if mse < 0:
        raise ParameterError(f"mse must be non-negative, got {mse}")
    lower = max(0.0, p0 * (1.0 - mse / margin**2))
    return AccuracyBound(p0=p0, margin=margin, mse=mse, lower=lower)


def optimal_dim_explicit(g: float, alpha: float, d_z: float, nu2: float,
                         omega: float) -> DimensionSolution:
    """Smallest r with adversarial floor >= omega, treating (nu2, d_z) as fixed."""
    if omega <= 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    if nu2 <= 0 or d_z <= 0:
        raise ParameterError("nu2 and d_z must be positive")
    d2 = d_z**2
    if omega >= d2:
        raise InfeasibleError(
            f"target omega = {omega} unreachable: floor saturates below d_z^2 = {d2}"
        )
    r_star = max(1, math.ceil(g**2 * alpha**2 * d2 * omega / (nu2 * (d2 - omega))))
    return DimensionSolution(r_star=r_star, omega=omega, mode="explicit")


def optimal_dim_consistent(budget: privacy.PrivacyBudget, b: float, C_f: float,
                           d: int, g: float, alpha: float, sigma_a2: float,
                           omega: float, r_max: int) -> DimensionSolution:
    """Smallest r in [1, r_max] reaching omega with (sigma2, d_z) recalibrated per r."""
    if r_max > d:
        raise DimensionError(f"r_max = {r_max} exceeds d = {d}")
    if omega <= 0:
        raise ParameterError(f"omega must be positive, got {omega}")
    for r in range(1, r_max + 1):
        cal = privacy.calibrate(budget, r, d, b, C_f)
        nu2 = adversary.effective_noise(g, alpha, cal.sigma2, sigma_a2)
        mb = adversary.minimax_bound(g, alpha, cal.d_z, r, nu2)
        if mb.bound >= omega:
            return DimensionSolution(r_star=r, omega=omega, mode="consistent")
    raise InfeasibleError(
        f"no r in [1, {r_max}] reaches the adversarial MSE floor omega = {omega}"
    )
