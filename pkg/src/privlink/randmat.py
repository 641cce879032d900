"""Random projection encoders and spectral utilities.

The encoder is an r x d matrix with i.i.d. Laplace(0, b) entries.  Besides
sampling, this module provides the high-probability spectral-norm bound
C_w * b * (sqrt(r) + sqrt(d)) with C_w = 4 * (1 + log(2/delta)/(sqrt(r)+sqrt(d)))
and SVD-based pseudoinversion used by both the server and the adversary.
All logarithms are natural.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .seeding import substream


@dataclass(frozen=True)
class EncoderMatrix:
    """Laplacian random projection with its sampling parameters."""

    entries: np.ndarray  # shape (r, d)
    r: int
    d: int
    b: float
    seed: int

    def __post_init__(self):
        if self.entries.shape != (self.r, self.d):
            raise DimensionError(
                f"entries shape {self.entries.shape} != ({self.r}, {self.d})"
            )


@dataclass(frozen=True)
class SpectralBound:
    """High-probability spectral-norm bound for a Laplacian encoder."""

    c_w: float
    norm_bound: float
    delta: float

    def __post_init__(self):
        if not self.c_w > 4.0:
            raise ParameterError(f"c_w must exceed 4, got {self.c_w}")


def sample_encoder(r: int, d: int, b: float, seed: int) -> EncoderMatrix:
    """Draw an r x d matrix of i.i.d. Laplace(0, b) entries, deterministic in seed."""
    if r < 1 or d < 1:
        raise DimensionError(f"need r >= 1 and d >= 1, got r={r}, d={d}")
    if r > d:
        raise DimensionError(f"encoder requires r <= d, got r={r} > d={d}")
    if b <= 0:
        raise ParameterError(f"Laplace scale b must be positive, got {b}")
    rng = substream(seed, "encoder-entries")
    entries = rng.laplace(loc=0.0, scale=b, size=(r, d))
    return EncoderMatrix(entries=entries, r=r, d=d, b=b, seed=int(seed))


def spectral_norm(M: np.ndarray) -> float:
    """Largest singular value of M."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise DimensionError("spectral norm of an empty matrix is undefined")
    return float(np.linalg.norm(M, ord=2))


def spectral_bound(r: int, d: int, b: float, delta: float) -> SpectralBound:
    """Spectral-norm tail bound holding with probability at least 1 - delta."""
    if r < 1 or d < 1:
        raise DimensionError(f"need r >= 1 and d >= 1, got r={r}, d={d}")
    if b <= 0:
        raise ParameterError(f"scale b must be positive, got {b}")
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    root_sum = np.sqrt(r) + np.sqrt(d)
    c_w = 4.0 * (1.0 + np.log(2.0 / delta) / root_sum)
    return SpectralBound(c_w=float(c_w), norm_bound=float(c_w * b * root_sum), delta=delta)


def pseudoinverse(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudoinverse; singular values below tol * sigma_max are dropped."""
    if tol < 0:
        raise ParameterError(f"tol must be non-negative, got {tol}")
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise DimensionError("pseudoinverse of an empty matrix is undefined")
    return np.linalg.pinv(M, rcond=tol)
