"""Figure rendering for the CLI report paths.

Figures are written next to the delimited output; plotting stays out of
the numerical modules so library users can ignore it entirely.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVEFIG = dict(dpi=150, bbox_inches="tight", metadata={"Software": "sigmaforest"})


def plot_sweep(sweep, path) -> None:
    """Pinning-comparison estimates against epsilon, log-x, with error bars."""
    eps = [r.epsilon for r in sweep.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    series = [
        ("eps*E[G] general pinning", [r.eps_green for r in sweep.rows], "o-"),
        ("single-pin x + y", None, "s--"),
        ("one-root part", [r.one_root for r in sweep.rows], "^:"),
        ("multi-root part", [r.multi_root for r in sweep.rows], "v:"),
    ]
    for label, ests, style in series:
        if ests is None:
            m = [r.single_pin_x.mean + r.single_pin_y.mean for r in sweep.rows]
            e = [np.hypot(r.single_pin_x.std_error, r.single_pin_y.std_error)
                 for r in sweep.rows]
        else:
            m = [est.mean for est in ests]
            e = [est.std_error for est in ests]
        ax.errorbar(eps, m, yerr=e, fmt=style, capsize=3, label=label)
    ax.set_xscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("estimate")
    ax.set_title(f"pinning comparison, pair ({sweep.x},{sweep.y})")
    ax.legend(fontsize=8)
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def plot_decay(fit, path) -> None:
    """Log estimates vs horizontal distance with the fitted decay line."""
    d = np.array(fit.distances)
    m = np.array([e.mean for e in fit.estimates])
    se = np.array([e.std_error for e in fit.estimates])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(d, m, yerr=se, fmt="o", capsize=3, label="eps*E[G]")
    grid = np.linspace(max(d.min(), 1), d.max(), 50)
    ax.plot(grid, np.exp(fit.intercept + fit.slope * grid), "-",
            label=f"fit slope {fit.slope:.3f} +/- {fit.slope_se:.3f}")
    ax.set_yscale("log")
    ax.set_xlabel("horizontal distance")
    ax.set_ylabel("estimate")
    ax.set_title("correlation decay on the ladder")
    ax.legend(fontsize=8)
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def plot_trace(batch, path) -> None:
    """Trace of each t coordinate plus a histogram of t_1."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    n_show = min(len(batch), 5000)
    for j in range(batch.t.shape[1]):
        axes[0].plot(batch.t[:n_show, j], lw=0.4)
    axes[0].set_xlabel("draw")
    axes[0].set_ylabel("t")
    axes[1].hist(batch.t[:, 0], bins=80, density=True)
    axes[1].set_xlabel("t_1")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def plot_independence(report, path) -> None:
    """Bar chart of the test p-values on a log scale with the level line."""
    labels = list(report.correlation_pvalues) + ["KS t_x"] + \
        [f"KS2 {k}" for k in report.ks_pvalues_gradients]
    pvals = list(report.correlation_pvalues.values()) + [report.ks_pvalue_tx] + \
        list(report.ks_pvalues_gradients.values())
    fig, ax = plt.subplots(figsize=(max(6, 0.7 * len(labels)), 4))
    ax.bar(range(len(pvals)), pvals)
    ax.axhline(report.level, color="red", ls="--", label=f"level {report.level}")
    ax.set_yscale("log")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("p-value")
    ax.legend()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
