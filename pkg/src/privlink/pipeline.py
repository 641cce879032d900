"""Device-to-server transmission chain.

Six stages: clip, encode, privatize, power-scale, fading channel, server
rescale + linear decode.  Each randomized stage takes an explicit seed and
draws from its own tagged substream, so a full trial is a pure function of
(config, seed).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, ParameterError
from .randmat import EncoderMatrix, pseudoinverse
from .seeding import substream


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    clip_norm: float


@dataclass(frozen=True)
class LatentVector:
    values: np.ndarray
    privatized: bool = False


@dataclass(frozen=True)
class ChannelRealization:
    """Block-fading scalar channel to the server.

    alpha is the amplitude scaling sqrt(P); P is always alpha**2 so the two
    stay consistent by construction.
    """

    h: float
    sigma_m2: float
    alpha: float
    P: float = field(init=False)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.sigma_m2 < 0:
            raise ParameterError(f"sigma_m2 must be non-negative, got {self.sigma_m2}")
        object.__setattr__(self, "P", self.alpha**2)


@dataclass(frozen=True)
class ServerEstimate:
    z_hat: np.ndarray
    f_hat: np.ndarray
    beta: float


def alpha_from_dbm(p_dbm: float) -> float:
    """Amplitude scaling for a transmit power given in dBm (linear units: mW)."""
    return float(np.sqrt(10.0 ** (p_dbm / 10.0)))


def clip_feature(raw: np.ndarray, C_f: float) -> FeatureVector:
    """Project raw onto the l2 ball of radius C_f (zero input maps to zero)."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size == 0:
        raise DimensionError("feature must be a non-empty 1-d vector")
    if C_f <= 0:
        raise ParameterError(f"clip norm must be positive, got {C_f}")
    norm = np.linalg.norm(raw)
    # tiny tolerance keeps re-clipping an already-projected vector bit-exact
    factor = 1.0 if norm <= C_f * (1.0 + 1e-12) else C_f / norm
    return FeatureVector(values=factor * raw, clip_norm=C_f)


def encode(W: EncoderMatrix, f: FeatureVector) -> LatentVector:
    """Project the clipped feature: z = W f."""
    if f.values.shape[0] != W.d:
        raise DimensionError(f"feature length {f.values.shape[0]} != encoder cols {W.d}")
    return LatentVector(values=W.entries @ f.values, privatized=False)


def privatize(z: LatentVector, sigma2: float, seed: int) -> LatentVector:
    """Add N(0, sigma2 I) privacy noise."""
    if sigma2 < 0:
        raise ParameterError(f"sigma2 must be non-negative, got {sigma2}")
    if sigma2 == 0:
        return LatentVector(values=z.values.copy(), privatized=True)
    rng = substream(seed, "privacy-noise")
    noise = rng.normal(0.0, np.sqrt(sigma2), size=z.values.shape)
    return LatentVector(values=z.values + noise, privatized=True)


def transmit(z_tilde: LatentVector, alpha: float) -> np.ndarray:
    """Scale by the transmit amplitude: z' = alpha * z~."""
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return alpha * z_tilde.values


def channel_apply(z_prime: np.ndarray, ch: ChannelRealization, seed: int) -> np.ndarray:
    """Fading channel with additive receiver noise: y = h z' + m."""
    z_prime = np.asarray(z_prime, dtype=float)
    if ch.sigma_m2 == 0:
        return ch.h * z_prime
    rng = substream(seed, "channel-noise")
    return ch.h * z_prime + rng.normal(0.0, np.sqrt(ch.sigma_m2), size=z_prime.shape)


def server_postprocess(y: np.ndarray, beta: float) -> np.ndarray:
    """Rescale the received signal: z_hat = beta * y."""
    if beta <= 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return beta * np.asarray(y, dtype=float)


def decode(Dec: np.ndarray, z_hat: np.ndarray, beta: float = 1.0) -> ServerEstimate:
    """Apply the linear decoder: f_hat = Dec z_hat."""
    Dec = np.asarray(Dec, dtype=float)
    z_hat = np.asarray(z_hat, dtype=float)
    if Dec.ndim != 2 or Dec.shape[1] != z_hat.shape[0]:
        raise DimensionError(
            f"decoder shape {Dec.shape} incompatible with latent length {z_hat.shape[0]}"
        )
    return ServerEstimate(z_hat=z_hat, f_hat=Dec @ z_hat, beta=beta)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one transmission trial needs besides its seed."""

    encoder: EncoderMatrix
    raw: np.ndarray
    clip_norm: float
    sigma2: float
    channel: ChannelRealization
    beta: Optional[float] = None       # None: 1/(alpha * h), perfect channel knowledge
    decoder: Optional[np.ndarray] = None  # None: Moore-Penrose pseudoinverse of W
    csi_error: float = 0.0             # relative perturbation of h used for beta


@dataclass(frozen=True)
class PipelineRecord:
    """Per-stage outputs and server-side squared errors of one trial."""

    f: np.ndarray
    z: np.ndarray
    z_tilde: np.ndarray
    z_prime: np.ndarray
    y: np.ndarray
    z_hat: np.ndarray
    f_hat: np.ndarray
    beta: float
    z_err2: float  # || z_hat/(beta h alpha) - z ||^2
    f_err2: float  # || f_hat - f ||^2


def run_pipeline(cfg: PipelineConfig, seed: int) -> PipelineRecord:
    """Run one end-to-end trial; all randomness derives from seed via stage substreams."""
    ch = cfg.channel
    f = clip_feature(cfg.raw, cfg.clip_norm)
    z = encode(cfg.encoder, f)
    z_tilde = privatize(z, cfg.sigma2, seed)
    z_prime = transmit(z_tilde, ch.alpha)
    y = channel_apply(z_prime, ch, seed)

    if cfg.beta is not None:
        beta = cfg.beta
    else:
        if ch.h == 0:
            raise ParameterError("beta = 1/(alpha h) requested with h = 0")
        h_est = ch.h
        if cfg.csi_error != 0.0:
            rng = substream(seed, "csi-error")
            h_est = ch.h * (1.0 + cfg.csi_error * rng.normal())
        beta = 1.0 / (ch.alpha * h_est)

    # beta = 1/(alpha h) inherits the sign of h, so rescale directly here
    # rather than through server_postprocess (which requires beta > 0).
    z_hat = beta * y
    Dec = cfg.decoder if cfg.decoder is not None else pseudoinverse(cfg.encoder.entries)
    est = decode(Dec, z_hat, beta=beta)

    z_err2 = float(np.sum((z_hat / (beta * ch.h * ch.alpha) - z.values) ** 2))
    f_err2 = float(np.sum((est.f_hat - f.values) ** 2))
    return PipelineRecord(
        f=f.values, z=z.values, z_tilde=z_tilde.values, z_prime=z_prime, y=y,
        z_hat=z_hat, f_hat=est.f_hat, beta=beta, z_err2=z_err2, f_err2=f_err2,
    )
