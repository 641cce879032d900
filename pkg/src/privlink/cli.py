"""Command-line front end.

Subcommands: calibrate, bound, simulate, sweep, dimension, mimo, acquire-demo.
Configuration is plain key=value text (one pair per line, # comments), with
--set KEY=VALUE overrides applied afterwards.  Output is CSV or JSON, written
to stdout or --out; --plot renders a matplotlib figure next to the data.

Exit codes: 0 success, 1 configuration error, 2 numerical/infeasibility error.
"""

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import acquisition, adversary, bounds, harness, mimo, privacy
from .errors import (
    DegenerateError, DimensionError, InfeasibleError, ParameterError, RegimeError,
)
from .seeding import subseed, substream

_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(harness.ExperimentConfig)}
_INT_FIELDS = {"d", "r", "m_dim", "M", "trials", "master_seed"}
_STR_FIELDS = {"decoder", "beta_mode", "acquisition_kind"}
_OPTIONAL_FLOAT_FIELDS = {"alpha", "P_dbm", "c_z2"}

SWEEP_CSV_COLUMNS = [
    "axis_value", "sigma2", "c_w", "d_z", "nu2", "bound_adv", "gamma_star",
    "mse_adv_emp", "mse_server_emp", "bound_server", "acc_emp", "acc_bound",
    "ci95_mse_adv",
]


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key not in _CONFIG_FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        if key in _STR_FIELDS:
            return raw
        if key in _OPTIONAL_FLOAT_FIELDS:
            return None if raw.lower() == "none" else float(raw)
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: cannot parse value {raw!r}") from exc


def parse_config(path, overrides=()) -> harness.ExperimentConfig:
    """Build a validated ExperimentConfig from a key=value file plus overrides."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key in values:
                print(f"warning: duplicate config key {key!r}, last occurrence wins",
                      file=sys.stderr)
            values[key] = _parse_value(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        values[key] = _parse_value(key, raw)
    try:
        cfg = harness.ExperimentConfig(**values)
        cfg.validate()
    except (ParameterError, DimensionError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(rows, columns, fmt: str, out_path):
    """Write rows (dicts) as CSV or JSON with shortest round-trip numbers."""
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(row[c]) for c in columns) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        payload = [{c: row[c] for c in columns} for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_calibrate(cfg, args):
    cf = harness.closed_forms(cfg)
    row = {"c_w": cf.c_w, "sigma2": cf.sigma2, "sensitivity": cf.sensitivity,
           "d_z": cf.d_z}
    return [row], list(row)


def _cmd_bound(cfg, args):
    cf = harness.closed_forms(cfg)
    c = adversary.default_transfer_constant(cfg.b)
    if math.sqrt(cfg.d) - math.sqrt(cfg.r) > 0:
        transfer = adversary.feature_transfer_bound(cf.bound_adv, c, cfg.d, cfg.r, 0.0)
    else:
        transfer = float("nan")
    row = {
        "bound_adv": cf.bound_adv, "gamma_star": cf.gamma_star, "nu2": cf.nu2,
        "d_z": cf.d_z, "sigma2": cf.sigma2,
        "approx_term": cf.server_bound.approx_term,
        "privacy_term": cf.server_bound.privacy_term,
        "channel_term": cf.server_bound.channel_term,
        "bound_server": cf.server_bound.total,
        "acc_bound": cf.acc_bound.lower,
        "transfer_c": c, "bound_adv_feature": transfer,
    }
    return [row], list(row)


def _cmd_simulate(cfg, args):
    ts = harness.run_trials(cfg)
    rows = []
    for name in harness.METRIC_NAMES:
        if name not in ts.metrics:
            continue
        m = ts.metrics[name]
        rows.append({"metric": name, "n": m.n, "mean": m.mean, "variance": m.variance,
                     "ci95_low": m.ci95_low, "ci95_high": m.ci95_high})
    return rows, ["metric", "n", "mean", "variance", "ci95_low", "ci95_high"]


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse --values {text!r}") from exc


def _cmd_sweep(cfg, args):
    values = _parse_values(args.values)
    result = harness.sweep(cfg, args.axis, values, mse_source=args.mse_source)
    rows = [{c: getattr(r, c) for c in SWEEP_CSV_COLUMNS} for r in result.rows]
    if args.plot:
        from .report import render_sweep_figure
        render_sweep_figure(result, args.plot)
    return rows, SWEEP_CSV_COLUMNS


def _cmd_dimension(cfg, args):
    cf = harness.closed_forms(cfg)
    explicit = bounds.optimal_dim_explicit(cfg.g, cf.alpha, cf.d_z, cf.nu2, cfg.omega)
    budget = privacy.PrivacyBudget(cfg.epsilon, cfg.delta)
    consistent = bounds.optimal_dim_consistent(
        budget, cfg.b, cfg.C_f, cfg.d, cfg.g, cf.alpha, cfg.sigma_a2,
        cfg.omega, cfg.d)
    rows = [{"mode": s.mode, "r_star": s.r_star, "omega": s.omega}
            for s in (explicit, consistent)]
    return rows, ["mode", "r_star", "omega"]


def _cmd_mimo(cfg, args):
    cf = harness.closed_forms(cfg)
    c_z2 = cfg.c_z2 if cfg.c_z2 is not None else cf.d_z**2
    antennas = [int(v) for v in _parse_values(args.antennas)]
    rows = []
    for M in antennas:
        mb = mimo.mimo_bound(cfg.r, cf.alpha, cf.sigma2, cfg.sigma_a2, c_z2, M)
        if M <= args.sim_max_antennas:
            sim = mimo.simulate_correlator(
                cfg.r, cf.alpha, cf.sigma2, cfg.sigma_a2, c_z2, M,
                trials=cfg.trials, seed=subseed(cfg.master_seed, "mimo", M))
            mse_emp, stderr = sim["mse_emp"], sim["stderr"]
        else:
            mse_emp = stderr = float("nan")
        rows.append({"M": M, "bound_mimo": mb.bound, "mse_emp": mse_emp,
                     "stderr": stderr, "trials": cfg.trials})
    if args.plot:
        from .report import render_mimo_figure
        render_mimo_figure(rows, args.plot)
    return rows, ["M", "bound_mimo", "mse_emp", "stderr", "trials"]


def _cmd_acquire_demo(cfg, args):
    m_dim = cfg.m_dim if cfg.m_dim else 64
    if cfg.d > m_dim:
        raise ConfigError(f"acquire-demo needs d <= m_dim, got d={cfg.d}, m_dim={m_dim}")
    op = acquisition.build(m_dim, cfg.d, cfg.acquisition_kind,
                           subseed(cfg.master_seed, "acquire-demo"), cfg.sigma_w2)
    rng = substream(cfg.master_seed, "acquire-demo-input")
    x = rng.normal(size=m_dim)
    f = op.rows @ x
    x_back = acquisition.invert(op, f)
    proj_gap2 = float(np.sum((x_back - x) ** 2))
    # Pythagoras check with a perturbed measurement
    f_hat = f + rng.normal(size=cfg.d)
    x_hat = acquisition.invert(op, f_hat)
    resid = abs(np.sum((x_hat - x) ** 2)
                - (np.sum((f_hat - f) ** 2) + proj_gap2))
    cfg_acq = dataclasses.replace(cfg, m_dim=m_dim)
    ts = harness.run_trials(cfg_acq)
    row = {
        "m_dim": m_dim, "d": cfg.d, "kind": cfg.acquisition_kind,
        "unsampled_energy": proj_gap2, "pythagoras_residual": float(resid),
        "raw_mse_emp": ts.metrics["raw_mse"].mean,
        "adv_f_mse_emp": ts.metrics["adv_f_mse"].mean,
    }
    return [row], list(row)


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "dimension": _cmd_dimension,
    "mimo": _cmd_mimo,
    "acquire-demo": _cmd_acquire_demo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privlink",
        description="Privacy-preserving feature transmission: calibration, "
                    "bounds, and Monte Carlo validation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key (repeatable)")
        p.add_argument("--output", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=None, help="override master_seed")
        p.add_argument("--trials", type=int, default=None, help="override trials")
        if name in ("sweep", "mimo"):
            p.add_argument("--plot", default=None, metavar="PATH",
                           help="render a figure of the report to PATH")
        if name == "sweep":
            p.add_argument("--axis", choices=harness.SWEEP_AXES, required=True)
            p.add_argument("--values", required=True,
                           help="comma-separated axis values")
            p.add_argument("--mse-source", dest="mse_source",
                           choices=("bound", "empirical"), default="bound",
                           help="MSE fed into the accuracy floor")
        if name == "mimo":
            p.add_argument("--antennas", default="1,10,100,10000,1000000",
                           help="comma-separated antenna counts")
            p.add_argument("--sim-max-antennas", dest="sim_max_antennas",
                           type=int, default=1024,
                           help="simulate the correlator only up to this M")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, args.overrides)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=args.seed)
        if args.trials is not None:
            cfg = dataclasses.replace(cfg, trials=args.trials)
        cfg.validate()
        rows, columns = _COMMANDS[args.command](cfg, args)
    except (ConfigError, ParameterError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleError, DegenerateError, RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(rows, columns, args.output, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
