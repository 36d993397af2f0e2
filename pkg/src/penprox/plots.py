"""Figure rendering for fit, path and operator-surface reports.

All functions return a matplotlib Figure; the CLI saves them as PNG next
to the delimited outputs.  The Agg backend is forced so rendering works
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "fit_figure",
    "path_figure",
    "prox_surface_figure",
    "penalty_profile_figure",
    "save_figure",
]


def save_figure(fig, path, dpi=150):
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)


def fit_figure(result):
    """Objective and held-out NLL traces of a single fit."""
    has_heldout = result.heldout_trace.size > 0
    fig, axes = plt.subplots(1, 2 if has_heldout else 1, figsize=(9, 3.2))
    axes = np.atleast_1d(axes)
    axes[0].plot(result.objective_trace, lw=1.0)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    axes[0].set_title("optimization trace")
    if has_heldout:
        axes[1].plot(result.heldout_trace, lw=1.0, color="C1")
        if result.best_iteration >= 1:
            axes[1].axvline(result.best_iteration - 1, color="k", ls=":", lw=0.8)
        axes[1].set_xlabel("iteration")
        axes[1].set_ylabel("held-out NLL")
        axes[1].set_title("early-stopping trace")
    fig.tight_layout()
    return fig


def path_figure(result, smoothed=True, max_lines=60):
    """Coefficient trajectories and held-out NLL along the strength grid."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6))
    coefs = result.smoothed if smoothed else result.coefficients
    order = np.argsort(-np.abs(coefs).max(axis=0))[:max_lines]
    for j in order:
        ax1.plot(result.taus, coefs[:, j], lw=0.9)
    ax1.set_xscale("log")
    ax1.invert_xaxis()
    ax1.set_xlabel("penalty strength")
    ax1.set_ylabel("coefficient")
    ax1.set_title("coefficient trajectories" + (" (median-smoothed)" if smoothed else ""))
    ok = np.isfinite(result.heldout_nll)
    ax2.plot(result.taus[ok], result.heldout_nll[ok], marker="o", ms=3, lw=1.0)
    ax2.axvline(result.selected_tau, color="k", ls=":", lw=0.8)
    ax2.set_xscale("log")
    ax2.invert_xaxis()
    ax2.set_xlabel("penalty strength")
    ax2.set_ylabel("held-out NLL")
    ax2.set_title("selection curve")
    fig.tight_layout()
    return fig


def prox_surface_figure(lam0, aa, lam_star, b, a=0.0):
    """Heatmap of the weight map over (lam0, |beta0|/s_beta) at fixed b."""
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    pc = ax.pcolormesh(aa, lam0, lam_star, shading="auto")
    fig.colorbar(pc, ax=ax, label="updated weight")
    ax.set_xlabel("coefficient pull |beta0|/s_beta")
    ax.set_ylabel("incoming weight lam0")
    title = f"step product b={b:g}"
    if a > 0:
        title += f", barrier a={a:g}"
    ax.set_title(title)
    fig.tight_layout()
    return fig


def penalty_profile_figure(table, tau):
    """Profiled penalty value and derivative against |beta|."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ax1.plot(table[:, 0], table[:, 1], lw=1.2)
    ax1.set_xlabel("|beta|")
    ax1.set_ylabel("penalty")
    ax1.set_title(f"profiled penalty, strength {tau:g}")
    ax2.plot(table[:, 0], table[:, 2], lw=1.2, color="C1")
    ax2.set_xlabel("|beta|")
    ax2.set_ylabel("penalty derivative")
    ax2.set_title("shrinkage profile")
    fig.tight_layout()
    return fig
