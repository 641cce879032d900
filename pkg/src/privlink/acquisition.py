"""Subsampled orthogonal feature acquisition and its adjoint inverse.

The feature extractor measures d of m_dim orthogonal-transform coefficients
of a raw signal, plus measurement noise.  Real orthogonal transforms
(Hadamard, DCT-II, random orthogonal) stand in for a unitary DFT so the
whole artifact stays real-valued.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DimensionError, ParameterError
from .seeding import substream

KINDS = ("hadamard", "dct", "random_orthogonal")


@dataclass(frozen=True)
class AcquisitionOperator:
    transform: np.ndarray    # orthogonal m_dim x m_dim
    selection: np.ndarray    # d distinct row indices
    sigma_w2: float

    @property
    def m_dim(self) -> int:
        return self.transform.shape[0]

    @property
    def d(self) -> int:
        return self.selection.shape[0]

    @property
    def rows(self) -> np.ndarray:
        """The d selected transform rows (the measurement matrix A)."""
        return self.transform[self.selection]


def build(m_dim: int, d: int, kind: str, seed: int,
          sigma_w2: float = 0.0) -> AcquisitionOperator:
    """Construct an orthogonal transform with a seeded random row selection."""
    if d < 1 or d > m_dim:
        raise DimensionError(f"need 1 <= d <= m_dim, got d={d}, m_dim={m_dim}")
    if sigma_w2 < 0:
        raise ParameterError(f"sigma_w2 must be non-negative, got {sigma_w2}")
    if kind == "hadamard":
        if m_dim & (m_dim - 1) != 0:
            raise ParameterError(f"hadamard requires a power-of-two size, got {m_dim}")
        T = scipy.linalg.hadamard(m_dim).astype(float) / np.sqrt(m_dim)
    elif kind == "dct":
        T = scipy.fft.dct(np.eye(m_dim), axis=0, norm="ortho")
    elif kind == "random_orthogonal":
        rng = substream(seed, "acquisition-transform")
        Q, R = np.linalg.qr(rng.normal(size=(m_dim, m_dim)))
        T = Q * np.sign(np.diag(R))  # fix the sign ambiguity of QR
    else:
        raise ParameterError(f"unknown transform kind {kind!r}, expected one of {KINDS}")
    sel_rng = substream(seed, "acquisition-selection")
    selection = sel_rng.permutation(m_dim)[:d]
    return AcquisitionOperator(transform=T, selection=selection, sigma_w2=sigma_w2)


def acquire(op: AcquisitionOperator, x: np.ndarray, seed: int) -> np.ndarray:
    """Measure the selected transform coefficients of x, plus N(0, sigma_w2) noise."""
    x = np.asarray(x, dtype=float)
    if x.shape != (op.m_dim,):
        raise DimensionError(f"signal length {x.shape} != ({op.m_dim},)")
    f = op.rows @ x
    if op.sigma_w2 > 0:
        rng = substream(seed, "acquisition-noise")
        f = f + rng.normal(0.0, np.sqrt(op.sigma_w2), size=op.d)
    return f


def invert(op: AcquisitionOperator, f_hat: np.ndarray) -> np.ndarray:
    """Adjoint inverse: zero-fill the unobserved coefficients, then apply T^T."""
    f_hat = np.asarray(f_hat, dtype=float)
    if f_hat.shape != (op.d,):
        raise DimensionError(f"measurement length {f_hat.shape} != ({op.d},)")
    filled = np.zeros(op.m_dim)
    filled[op.selection] = f_hat
    return op.transform.T @ filled


def subspace_projector(op: AcquisitionOperator) -> np.ndarray:
    """Orthogonal projector onto the span of the selected transform rows."""
    A = op.rows
    return A.T @ A
