"""Monte Carlo experiment engine, parameter sweeps and the synthetic margin task.

Trials are vectorized: each randomized stage owns a tagged substream of the
master seed and draws a (trials x dim) block, with row i belonging to trial
i.  Aggregation uses exact compensated summation, so results are identical
regardless of how the per-trial records are ordered.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import acquisition, adversary, bounds, privacy
from .errors import DimensionError, ParameterError
from .pipeline import alpha_from_dbm
from .randmat import pseudoinverse, sample_encoder
from .seeding import subseed, substream


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment; defaults follow the epsilon-sweep setup."""

    d: int = 50
    r: int = 10
    m_dim: int = 0              # 0 disables the acquisition front end
    M: int = 1                  # antennas, used by the MIMO report only
    epsilon: float = 1.0
    delta: float = 1e-5
    b: float = 0.01
    C_f: float = 2.0
    alpha: Optional[float] = None    # amplitude scaling; exclusive with P_dbm
    P_dbm: Optional[float] = None    # transmit power in dBm (linear units: mW)
    h: float = 1.0
    g: float = 1.0
    sigma_m2: float = 1.0
    sigma_a2: float = 1.0
    sigma_w2: float = 0.0
    omega: float = 1.0
    c_z2: Optional[float] = None     # None: use d_z^2 from the calibration
    margin: float = 1.0
    p_flip: float = 0.05
    trials: int = 1000
    master_seed: int = 0
    decoder: str = "pseudoinverse"
    beta_mode: str = "perfect_csi"   # or "perturbed"
    csi_error: float = 0.0
    acquisition_kind: str = "dct"

    def resolved_alpha(self) -> float:
        if self.alpha is not None and self.P_dbm is not None:
            raise ParameterError("set either alpha or P_dbm, not both")
        if self.P_dbm is not None:
            return alpha_from_dbm(self.P_dbm)
        return self.alpha if self.alpha is not None else 1.0

    def validate(self) -> "ExperimentConfig":
        if self.r < 1 or self.r > self.d:
            raise ParameterError(f"r: need 1 <= r <= d, got r={self.r}, d={self.d}")
        if self.m_dim and self.d > self.m_dim:
            raise ParameterError(
                f"m_dim: need d <= m_dim when acquisition is enabled, got "
                f"d={self.d}, m_dim={self.m_dim}"
            )
        if self.M < 1:
            raise ParameterError(f"M: antenna count must be >= 1, got {self.M}")
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon: must satisfy epsilon > 0, got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta: must lie in (0, 1), got {self.delta}")
        for name in ("b", "C_f", "margin"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name}: must be positive, got {getattr(self, name)}")
        for name in ("sigma_m2", "sigma_a2", "sigma_w2"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name}: must be non-negative, got {getattr(self, name)}")
        if not 0.0 <= self.p_flip < 0.5:
            raise ParameterError(f"p_flip: must lie in [0, 0.5), got {self.p_flip}")
        if self.trials < 1:
            raise ParameterError(f"trials: must be >= 1, got {self.trials}")
        if self.omega <= 0:
            raise ParameterError(f"omega: must be positive, got {self.omega}")
        if self.decoder != "pseudoinverse":
            raise ParameterError(f"decoder: unknown decoder {self.decoder!r}")
        if self.beta_mode not in ("perfect_csi", "perturbed"):
            raise ParameterError(f"beta_mode: unknown mode {self.beta_mode!r}")
        if self.h == 0:
            raise ParameterError("h: channel inversion requires h != 0")
        self.resolved_alpha()
        return self


@dataclass(frozen=True)
class MetricSummary:
    n: int
    mean: float
    variance: float
    ci95_low: float
    ci95_high: float

    @property
    def ci95_halfwidth(self) -> float:
        return (self.ci95_high - self.ci95_low) / 2.0


@dataclass(frozen=True)
class TrialStats:
    """Per-metric aggregates over one batch of independent trials."""

    n: int
    metrics: dict  # name -> MetricSummary


METRIC_NAMES = (
    "server_z_mse", "server_f_mse", "adv_z_mse", "adv_f_mse", "raw_mse", "accuracy",
)


def summarize(values, ci_min_n: int = 30) -> MetricSummary:
    """Order-independent mean/variance/CI via exact compensated summation."""
    vals = [float(v) for v in np.asarray(values).ravel()]
    n = len(vals)
    if n == 0:
        raise ParameterError("cannot summarize an empty sample")
    mean = math.fsum(vals) / n
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
    if n >= ci_min_n:
        half = 1.96 * math.sqrt(var / n)
        lo, hi = mean - half, mean + half
    else:
        lo = hi = float("nan")
    return MetricSummary(n=n, mean=mean, variance=var, ci95_low=lo, ci95_high=hi)


@dataclass(frozen=True)
class MarginTask:
    """Two-class nearest-centroid task with centroids +/- margin * axis."""

    d: int
    margin: float
    p_flip: float
    axis: np.ndarray            # unit vector
    tangent_max: float          # largest tangential magnitude keeping ||f|| <= C_f

    def sample(self, n: int, rng: np.random.Generator):
        """Draw n features at exact boundary distance `margin`, with noisy labels."""
        true = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        V = rng.normal(size=(n, self.d))
        V -= np.outer(V @ self.axis, self.axis)
        norms = np.linalg.norm(V, axis=1)
        norms[norms == 0] = 1.0
        mags = rng.random(n) * self.tangent_max
        F = np.outer(true * self.margin, self.axis) + V * (mags / norms)[:, None]
        observed = np.where(rng.random(n) < self.p_flip, -true, true)
        return F, observed

    def classify(self, F: np.ndarray) -> np.ndarray:
        """Nearest-centroid decision: sign of the projection on the axis."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        proj = F @ self.axis
        return np.where(proj >= 0, 1.0, -1.0)


def synth_margin_task(d: int, margin: float, p_flip: float, seed: int,
                      C_f: Optional[float] = None) -> MarginTask:
    """Build a margin task whose clean features survive clipping at C_f untouched."""
    if margin <= 0:
        raise ParameterError(f"margin must be positive, got {margin}")
    if not 0.0 <= p_flip < 0.5:
        raise ParameterError(f"p_flip must lie in [0, 0.5), got {p_flip}")
    rng = substream(seed, "margin-task")
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    if C_f is None:
        tangent_max = margin
    else:
        tangent_max = math.sqrt(max(C_f**2 - margin**2, 0.0))
    return MarginTask(d=d, margin=margin, p_flip=p_flip, axis=u, tangent_max=tangent_max)


@dataclass(frozen=True)
class ClosedForms:
    """Closed-form companion values for one configuration."""

    sigma2: float
    c_w: float
    d_z: float
    sensitivity: float
    nu2: float
    bound_adv: float
    gamma_star: float
    server_bound: bounds.ServerMseBound
    acc_bound: bounds.AccuracyBound
    bound_mimo: float
    p0: float
    alpha: float


def closed_forms(cfg: ExperimentConfig) -> ClosedForms:
    """Evaluate every bound for cfg, using the same seeded encoder as run_trials."""
    cfg.validate()
    alpha = cfg.resolved_alpha()
    budget = privacy.PrivacyBudget(cfg.epsilon, cfg.delta)
    cal = privacy.calibrate(budget, cfg.r, cfg.d, cfg.b, cfg.C_f)
    nu2 = adversary.effective_noise(cfg.g, alpha, cal.sigma2, cfg.sigma_a2)
    mb = adversary.minimax_bound(cfg.g, alpha, cal.d_z, cfg.r, nu2)
    W = sample_encoder(cfg.r, cfg.d, cfg.b, subseed(cfg.master_seed, "encoder"))
    Dec = pseudoinverse(W.entries)
    beta = 1.0 / (alpha * cfg.h)
    sb = bounds.server_mse_bound(beta, cfg.h, alpha, Dec, W, cal.sigma2,
                                 cfg.sigma_m2, cfg.C_f**2)
    p0 = 1.0 - cfg.p_flip
    ab = bounds.accuracy_lower_bound(p0, sb.total, cfg.margin)
    c_z2 = cfg.c_z2 if cfg.c_z2 is not None else cal.d_z**2
    from .mimo import mimo_bound
    mmb = mimo_bound(cfg.r, alpha, cal.sigma2, cfg.sigma_a2, c_z2, cfg.M)
    return ClosedForms(
        sigma2=cal.sigma2, c_w=cal.c_w, d_z=cal.d_z, sensitivity=cal.sensitivity,
        nu2=nu2, bound_adv=mb.bound, gamma_star=mb.gamma_star,
        server_bound=sb, acc_bound=ab, bound_mimo=mmb.bound, p0=p0, alpha=alpha,
    )


def run_trials(cfg: ExperimentConfig, task: Optional[MarginTask] = None) -> TrialStats:
    """Run cfg.trials independent end-to-end trials and aggregate every metric."""
    cfg.validate()
    if task is not None and task.d != cfg.d:
        raise DimensionError(f"task dimension {task.d} != config d {cfg.d}")
    cf = closed_forms(cfg)
    alpha, ms, n = cf.alpha, cfg.master_seed, cfg.trials
    r, d = cfg.r, cfg.d

    W = sample_encoder(r, d, cfg.b, subseed(ms, "encoder"))
    Winv = pseudoinverse(W.entries)
    if task is None:
        task = synth_margin_task(d, cfg.margin, cfg.p_flip, subseed(ms, "task"),
                                 C_f=cfg.C_f)

    F_clean, labels = task.sample(n, substream(ms, "features"))

    op = None
    if cfg.m_dim:
        op = acquisition.build(cfg.m_dim, d, cfg.acquisition_kind,
                               subseed(ms, "acquisition"), cfg.sigma_w2)
        # raw inputs are lifted into the sampled subspace, so acquiring them
        # returns the task feature exactly (plus measurement noise)
        X = F_clean @ op.rows
        F_raw = F_clean.copy()
        if cfg.sigma_w2 > 0:
            F_raw += substream(ms, "acquisition-noise").normal(
                0.0, math.sqrt(cfg.sigma_w2), size=(n, d))
    else:
        F_raw = F_clean

    norms = np.linalg.norm(F_raw, axis=1)
    factors = np.minimum(1.0, np.divide(cfg.C_f, norms, out=np.ones_like(norms),
                                        where=norms > 0))
    F = F_raw * factors[:, None]

    Z = F @ W.entries.T
    Zt = Z + substream(ms, "privacy").normal(0.0, math.sqrt(cf.sigma2), size=(n, r))
    Zp = alpha * Zt
    Y = cfg.h * Zp
    if cfg.sigma_m2 > 0:
        Y = Y + substream(ms, "channel").normal(0.0, math.sqrt(cfg.sigma_m2), size=(n, r))

    if cfg.beta_mode == "perturbed" and cfg.csi_error != 0.0:
        xi = substream(ms, "csi").normal(size=n)
        beta = 1.0 / (alpha * cfg.h * (1.0 + cfg.csi_error * xi))
    else:
        beta = np.full(n, 1.0 / (alpha * cfg.h))

    Zhat = beta[:, None] * Y
    Fhat = Zhat @ Winv.T

    server_z = np.sum((Zhat / (beta * cfg.h * alpha)[:, None] - Z) ** 2, axis=1)
    server_f = np.sum((Fhat - F) ** 2, axis=1)
    preds = task.classify(Fhat)
    acc = (preds == labels).astype(float)

    # adversary at the saddle point: worst-case ||z|| = d_z, gamma = gamma*
    rng_adv = substream(ms, "adversary")
    U = rng_adv.normal(size=(n, r))
    Zw = cf.d_z * U / np.linalg.norm(U, axis=1)[:, None]
    noise_w = cfg.g * alpha * rng_adv.normal(0.0, math.sqrt(cf.sigma2), size=(n, r))
    if cfg.sigma_a2 > 0:
        noise_w = noise_w + rng_adv.normal(0.0, math.sqrt(cfg.sigma_a2), size=(n, r))
    adv_z = np.sum((cf.gamma_star * (cfg.g * alpha * Zw + noise_w) - Zw) ** 2, axis=1)

    # adversary feature reconstruction of the actually transmitted latents
    rng_af = substream(ms, "adversary-feature")
    noise_f = cfg.g * alpha * rng_af.normal(0.0, math.sqrt(cf.sigma2), size=(n, r))
    if cfg.sigma_a2 > 0:
        noise_f = noise_f + rng_af.normal(0.0, math.sqrt(cfg.sigma_a2), size=(n, r))
    Zhat_adv = cf.gamma_star * (cfg.g * alpha * Z + noise_f)
    Fhat_adv = Zhat_adv @ Winv.T
    adv_f = np.sum((Fhat_adv - F) ** 2, axis=1)

    metrics = {
        "server_z_mse": summarize(server_z),
        "server_f_mse": summarize(server_f),
        "adv_z_mse": summarize(adv_z),
        "adv_f_mse": summarize(adv_f),
        "accuracy": summarize(acc),
    }
    if op is not None:
        Xhat = Fhat_adv @ op.rows
        metrics["raw_mse"] = summarize(np.sum((Xhat - X) ** 2, axis=1))
    return TrialStats(n=n, metrics=metrics)


def empirical_accuracy(task: MarginTask, cfg: ExperimentConfig) -> float:
    """Accuracy of the task classifier on server-decoded features."""
    return run_trials(cfg, task=task).metrics["accuracy"].mean


SWEEP_AXES = ("epsilon", "r", "M", "d", "omega")


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    sigma2: float
    c_w: float
    d_z: float
    nu2: float
    bound_adv: float
    gamma_star: float
    mse_adv_emp: float
    mse_server_emp: float
    bound_server: float
    acc_emp: float
    acc_bound: float
    ci95_mse_adv: float
    bound_mimo: float = field(repr=False, default=float("nan"))  # not emitted to CSV/JSON


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: list
    rows: list          # SweepRow per value
    stats: list         # TrialStats per value


def sweep(cfg: ExperimentConfig, axis: str, values,
          mse_source: str = "bound") -> SweepResult:
    """One TrialStats + closed-form row per axis value."""
    if axis not in SWEEP_AXES:
        raise ParameterError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one axis value")
    if mse_source not in ("bound", "empirical"):
        raise ParameterError(f"mse_source must be 'bound' or 'empirical', got {mse_source!r}")
    rows, stats = [], []
    for v in values:
        if axis in ("r", "M", "d"):
            if float(v) != int(v):
                raise ParameterError(f"axis {axis}: value {v} is not an integer")
            v = int(v)
        cfg_v = replace(cfg, **{axis: v})
        try:
            cfg_v.validate()
        except ParameterError as exc:
            raise ParameterError(f"axis {axis}: invalid value {v}: {exc}") from exc
        ts = run_trials(cfg_v)
        cf = closed_forms(cfg_v)
        mse_for_acc = cf.server_bound.total if mse_source == "bound" \
            else ts.metrics["server_f_mse"].mean
        ab = bounds.accuracy_lower_bound(cf.p0, mse_for_acc, cfg_v.margin)
        rows.append(SweepRow(
            axis_value=float(v),
            sigma2=cf.sigma2, c_w=cf.c_w, d_z=cf.d_z, nu2=cf.nu2,
            bound_adv=cf.bound_adv, gamma_star=cf.gamma_star,
            mse_adv_emp=ts.metrics["adv_z_mse"].mean,
            mse_server_emp=ts.metrics["server_f_mse"].mean,
            bound_server=cf.server_bound.total,
            acc_emp=ts.metrics["accuracy"].mean,
            acc_bound=ab.lower,
            ci95_mse_adv=ts.metrics["adv_z_mse"].ci95_halfwidth,
            bound_mimo=cf.bound_mimo,
        ))
        stats.append(ts)
    return SweepResult(axis=axis, values=values, rows=rows, stats=stats)
