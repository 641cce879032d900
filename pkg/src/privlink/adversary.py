"""Eavesdropper model and closed-form reconstruction-error floors.

The adversary sees y_adv = g*alpha*z + g*alpha*n + m_adv and rescales by a
factor gamma.  Over the ball ||z|| <= D_z the minimax choice is

    gamma* = g*alpha*D_z^2 / (g^2 alpha^2 D_z^2 + r nu^2),

with worst-case MSE floor r*nu^2*D_z^2 / (g^2 alpha^2 D_z^2 + r nu^2),
where nu^2 = g^2 alpha^2 sigma^2 + sigma_a^2 is the total effective noise.
Feature-space transfer divides the latent floor by c^2 (sqrt(d)-sqrt(r)-t)^2,
the high-probability bound on ||W^+||_op^-2 for Laplacian encoders.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateError, DimensionError, ParameterError, RegimeError
from .pipeline import LatentVector
from .randmat import EncoderMatrix, pseudoinverse
from .seeding import substream


@dataclass(frozen=True)
class AdversaryChannel:
    g: float
    sigma_a2: float

    def __post_init__(self):
        if self.sigma_a2 < 0:
            raise ParameterError(f"sigma_a2 must be non-negative, got {self.sigma_a2}")


@dataclass(frozen=True)
class MinimaxBound:
    """Worst-case-z, best-gamma MSE floor of the rescaling adversary."""

    nu2: float
    d_z: float
    r: int
    g: float
    alpha: float
    bound: float
    gamma_star: float


def _values(z: Union[LatentVector, np.ndarray]) -> np.ndarray:
    return np.asarray(getattr(z, "values", z), dtype=float)


def observe(z, alpha: float, adv: AdversaryChannel, sigma2: float, seed: int) -> np.ndarray:
    """Adversary observation y_adv = g alpha z + g alpha n + m_adv (fresh noise)."""
    if sigma2 < 0:
        raise ParameterError(f"sigma2 must be non-negative, got {sigma2}")
    zv = _values(z)
    rng = substream(seed, "adversary-observation")
    out = adv.g * alpha * zv
    if sigma2 > 0:
        out = out + adv.g * alpha * rng.normal(0.0, math.sqrt(sigma2), size=zv.shape)
    if adv.sigma_a2 > 0:
        out = out + rng.normal(0.0, math.sqrt(adv.sigma_a2), size=zv.shape)
    return out


def effective_noise(g: float, alpha: float, sigma2: float, sigma_a2: float) -> float:
    """Total effective noise variance nu^2 = g^2 alpha^2 sigma^2 + sigma_a^2."""
    if sigma2 < 0 or sigma_a2 < 0:
        raise ParameterError("variances must be non-negative")
    return g**2 * alpha**2 * sigma2 + sigma_a2


def estimate_latent(y_adv: np.ndarray, gamma: float) -> np.ndarray:
    """Rescaling estimate z_hat = gamma * y_adv."""
    return gamma * np.asarray(y_adv, dtype=float)


def adversary_mse(gamma: float, z_norm2: float, g: float, alpha: float,
                  r: int, nu2: float) -> float:
    """Expected ||z_hat - z||^2 of the rescaling estimator at a given ||z||^2."""
    if z_norm2 < 0:
        raise ParameterError(f"z_norm2 must be non-negative, got {z_norm2}")
    return (gamma * g * alpha - 1.0) ** 2 * z_norm2 + gamma**2 * r * nu2


def minimax_bound(g: float, alpha: float, d_z: float, r: int, nu2: float) -> MinimaxBound:
    """Closed-form minimax MSE floor over the ball ||z|| <= d_z."""
    if d_z <= 0:
        raise DegenerateError("latent-norm bound d_z must be positive (z = 0 otherwise)")
    if r < 1 or alpha <= 0 or nu2 <= 0:
        raise ParameterError("need r >= 1, alpha > 0 and nu2 > 0")
    d2 = d_z**2
    denom = g**2 * alpha**2 * d2 + r * nu2
    return MinimaxBound(
        nu2=nu2, d_z=d_z, r=r, g=g, alpha=alpha,
        bound=r * nu2 * d2 / denom,
        gamma_star=g * alpha * d2 / denom,
    )


def reconstruct_feature(W: EncoderMatrix, z_hat: np.ndarray) -> np.ndarray:
    """Feature estimate f_hat = W^+ z_hat (Moore-Penrose)."""
    z_hat = np.asarray(z_hat, dtype=float)
    if z_hat.shape[0] != W.r:
        raise DimensionError(f"latent length {z_hat.shape[0]} != encoder rows {W.r}")
    return pseudoinverse(W.entries) @ z_hat


def feature_transfer_bound(mse_adv: float, c: float, d: int, r: int, t: float) -> float:
    """Raw-feature MSE floor mse_adv / (c^2 (sqrt(d) - sqrt(r) - t)^2)."""
    if c <= 0:
        raise ParameterError(f"constant c must be positive, got {c}")
    gap = math.sqrt(d) - math.sqrt(r) - t
    if gap <= 0:
        raise RegimeError(
            f"transfer bound vacuous: sqrt(d) - sqrt(r) - t = {gap} <= 0"
        )
    return mse_adv / (c**2 * gap**2)


def default_transfer_constant(b: float) -> float:
    """Default c so that c*(sqrt(d)-sqrt(r)) estimates sigma_min(W): the entry std b*sqrt(2)."""
    return b * math.sqrt(2.0)


def estimate_sigma_min_coeff(r: int, d: int, b: float, n_draws: int, seed: int) -> float:
    """Monte Carlo estimate of E[sigma_min(W)] / (sqrt(d) - sqrt(r)) for c calibration."""
    if r >= d:
        raise DimensionError("sigma_min coefficient needs r < d")
    rng = substream(seed, "sigma-min")
    vals = [
        np.linalg.svd(rng.laplace(0.0, b, size=(r, d)), compute_uv=False)[-1]
        for _ in range(n_draws)
    ]
    return float(np.mean(vals) / (math.sqrt(d) - math.sqrt(r)))
