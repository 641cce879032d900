"""Massive-MIMO extension: vector channels, correlator adversary, hardening bound.

With M transmit antennas the legitimate channel hardens (||h||^2/M
concentrates) while independent adversary channels stay nearly orthogonal
(favorable propagation).  The adversarial MSE floor

    r (alpha^2 sigma^2 / M + sigma_a^2) / (alpha^2 (C_z^2 + sigma^2) / M + sigma_a^2)

converges to r as M grows: asymptotically the eavesdropper learns nothing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DimensionError, ParameterError
from .seeding import substream

DISTRIBUTIONS = ("half_normal", "rayleigh")


@dataclass(frozen=True)
class MimoChannel:
    M: int
    h_vec: np.ndarray      # legitimate channel, non-negative entries
    h_adv: np.ndarray      # adversary channel, non-negative entries
    sigma_m2: float
    sigma_a2: float

    def __post_init__(self):
        if self.h_vec.shape != (self.M,) or self.h_adv.shape != (self.M,):
            raise DimensionError("channel vectors must both have length M")
        if np.any(self.h_vec < 0) or np.any(self.h_adv < 0):
            raise ParameterError("channel entries must be non-negative")


@dataclass(frozen=True)
class MimoBound:
    r: int
    alpha: float
    sigma2: float
    sigma_a2: float
    c_z2: float
    M: int
    bound: float


def sample_channels(M: int, distribution: str, seed: int,
                    sigma_m2: float = 0.0, sigma_a2: float = 0.0) -> MimoChannel:
    """Draw independent legitimate and adversary channels with unit mean-square entries."""
    if M < 1:
        raise ParameterError(f"antenna count M must be >= 1, got {M}")
    rng = substream(seed, "mimo-channels")
    if distribution == "half_normal":
        h = np.abs(rng.normal(size=M))
        ha = np.abs(rng.normal(size=M))
    elif distribution == "rayleigh":
        # scale 1/sqrt(2) keeps E[h^2] = 1, matching the half-normal default
        h = rng.rayleigh(scale=1.0 / math.sqrt(2.0), size=M)
        ha = rng.rayleigh(scale=1.0 / math.sqrt(2.0), size=M)
    else:
        raise ParameterError(
            f"unknown distribution {distribution!r}, expected one of {DISTRIBUTIONS}"
        )
    return MimoChannel(M=M, h_vec=h, h_adv=ha, sigma_m2=sigma_m2, sigma_a2=sigma_a2)


def transmit_receive(z_prime: np.ndarray, ch: MimoChannel, seed: int):
    """Per-channel-use observations: columns y[:, i] = h * z'[i] + noise."""
    z_prime = np.asarray(z_prime, dtype=float)
    if z_prime.ndim != 1:
        raise DimensionError("z_prime must be a 1-d vector of channel uses")
    r = z_prime.shape[0]
    rng = substream(seed, "mimo-noise")
    y = np.outer(ch.h_vec, z_prime)
    y_adv = np.outer(ch.h_adv, z_prime)
    if ch.sigma_m2 > 0:
        y = y + rng.normal(0.0, math.sqrt(ch.sigma_m2), size=(ch.M, r))
    if ch.sigma_a2 > 0:
        y_adv = y_adv + rng.normal(0.0, math.sqrt(ch.sigma_a2), size=(ch.M, r))
    return y, y_adv


def adversary_estimate(y_adv: np.ndarray, h_adv: np.ndarray, alpha: float,
                       normalized: bool = False) -> np.ndarray:
    """Correlator estimate z_hat[i] = h_adv^T y_adv[:, i] / alpha.

    The raw correlator is biased by ||h_adv||^2; the normalized variant
    divides it out so the estimate lives on the scale of z itself.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    y_adv = np.asarray(y_adv, dtype=float)
    h_adv = np.asarray(h_adv, dtype=float)
    if y_adv.ndim != 2 or y_adv.shape[0] != h_adv.shape[0]:
        raise DimensionError("y_adv must be M x r with M matching h_adv")
    z_hat = h_adv @ y_adv / alpha
    if normalized:
        n2 = float(h_adv @ h_adv)
        if n2 == 0:
            return np.zeros(y_adv.shape[1])
        z_hat = z_hat / n2
    return z_hat


def mimo_bound(r: int, alpha: float, sigma2: float, sigma_a2: float,
               c_z2: float, M: int) -> MimoBound:
    """Closed-form adversarial MSE floor under channel hardening."""
    if M < 1 or r < 1:
        raise ParameterError("need M >= 1 and r >= 1")
    if alpha < 0 or sigma2 < 0 or sigma_a2 < 0 or c_z2 < 0:
        raise ParameterError("parameters must be non-negative")
    num = alpha**2 * sigma2 / M + sigma_a2
    den = alpha**2 * (c_z2 + sigma2) / M + sigma_a2
    if den == 0:
        raise DegenerateError("all noise and signal terms are zero; bound undefined")
    return MimoBound(r=r, alpha=alpha, sigma2=sigma2, sigma_a2=sigma_a2,
                     c_z2=c_z2, M=M, bound=r * num / den)


def simulate_correlator(r: int, alpha: float, sigma2: float, sigma_a2: float,
                        c_z2: float, M: int, trials: int, seed: int,
                        distribution: str = "half_normal") -> dict:
    """Monte Carlo MSE of the normalized correlator against a ||z|| = C_z transmission.

    Each trial draws fresh channels, a latent vector on the sphere of radius
    C_z, privacy noise, and receiver noise; returns summary statistics and
    the matching closed-form floor.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    rng = substream(seed, "mimo-simulation")
    c_z = math.sqrt(c_z2)
    errs = np.empty(trials)
    for t in range(trials):
        # fresh adversary channel per trial, drawn from the simulation stream
        h_adv = np.abs(rng.normal(size=M)) if distribution == "half_normal" \
            else rng.rayleigh(scale=1.0 / math.sqrt(2.0), size=M)
        u = rng.normal(size=r)
        z = c_z * u / np.linalg.norm(u)
        n = rng.normal(0.0, math.sqrt(sigma2), size=r) if sigma2 > 0 else 0.0
        z_prime = alpha * (z + n)
        y_adv = np.outer(h_adv, z_prime)
        if sigma_a2 > 0:
            y_adv = y_adv + rng.normal(0.0, math.sqrt(sigma_a2), size=(M, r))
        z_hat = adversary_estimate(y_adv, h_adv, alpha, normalized=True)
        errs[t] = np.sum((z_hat - z) ** 2)
    mean = float(np.mean(errs))
    se = float(np.std(errs, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    mb = mimo_bound(r, alpha, sigma2, sigma_a2, c_z2, M)
    return {"mse_emp": mean, "stderr": se, "bound": mb.bound, "trials": trials, "M": M}
