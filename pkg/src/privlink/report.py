"""Figure rendering for sweep and MIMO reports.

Figures are written next to the delimited output; the CSV/JSON remains the
primary artifact and every curve here can be re-derived from it.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .harness import SweepResult  # noqa: E402


def render_sweep_figure(result: SweepResult, path: str) -> None:
    """Two-panel figure: adversarial MSE (bound vs empirical) and accuracy."""
    xs = [row.axis_value for row in result.rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 7.0), sharex=True)

    ax1.plot(xs, [r.bound_adv for r in result.rows], "k-", lw=1.5,
             label="adversarial MSE floor")
    ax1.errorbar(xs, [r.mse_adv_emp for r in result.rows],
                 yerr=[r.ci95_mse_adv for r in result.rows],
                 fmt="o", ms=4, capsize=3, label="empirical (saddle)")
    ax1.set_ylabel("adversarial MSE")
    if result.axis == "epsilon":
        ax1.set_xscale("log")
        ax1.set_yscale("log")
    ax1.legend(frameon=False)
    ax1.grid(alpha=0.3)

    ax2.plot(xs, [r.acc_emp for r in result.rows], "o-", ms=4, label="empirical accuracy")
    ax2.plot(xs, [r.acc_bound for r in result.rows], "k--", lw=1.2, label="accuracy floor")
    ax2.set_ylim(-0.02, 1.02)
    ax2.set_xlabel(result.axis)
    ax2.set_ylabel("accuracy")
    ax2.legend(frameon=False)
    ax2.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_mimo_figure(rows, path: str) -> None:
    """Adversarial MSE floor (and simulation, where present) versus antenna count."""
    xs = [row["M"] for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xs, [row["bound_mimo"] for row in rows], "k-o", ms=4, label="MSE floor")
    sim = [(row["M"], row["mse_emp"], row.get("stderr", 0.0))
           for row in rows if row.get("mse_emp") == row.get("mse_emp")]
    if sim:
        ax.errorbar([s[0] for s in sim], [s[1] for s in sim],
                    yerr=[3 * s[2] for s in sim], fmt="s", ms=4, capsize=3,
                    label="correlator simulation")
    ax.set_xscale("log")
    ax.set_xlabel("antennas M")
    ax.set_ylabel("adversarial MSE")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
