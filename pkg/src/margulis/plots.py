"""Figure rendering for the report paths (headless, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dim4 import LiouvilleTable, SlopeEstimate


def render_boundary_curve(radii, values, convergent_flags, path: str, title: str = ""):
    """Log-log plot of the radial boundary function; convergent-denominator
    minimizers are marked."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    flags = np.asarray(convergent_flags, dtype=bool)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(radii, values, "-", color="tab:blue", lw=1.2, label="B(r)")
    if flags.any():
        ax.loglog(radii[flags], values[flags], ".", color="tab:red", ms=5,
                  label="minimizer is a convergent denominator")
    ax.set_xlabel("r")
    ax.set_ylabel("B(r)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_slope(estimate: SlopeEstimate, path: str, title: str = ""):
    """Boundary curve with its least-squares power-law fit and a sqrt guide."""
    radii = np.asarray(estimate.radii)
    values = np.asarray(estimate.values)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(radii, values, "o", color="tab:blue", ms=4, label="B(r)")
    fit = np.exp(np.polyval(
        np.polyfit(np.log(radii), np.log(values), 1), np.log(radii)))
    ax.loglog(radii, fit, "-", color="tab:orange", lw=1.0,
              label=f"fit, exponent {estimate.exponent:.3f}")
    guide = values[0] * np.sqrt(radii / radii[0])
    ax.loglog(radii, guide, "--", color="gray", lw=0.8, label="slope 1/2 guide")
    ax.set_xlabel("r")
    ax.set_ylabel("B(r)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_local_slopes(table: LiouvilleTable, path: str, title: str = ""):
    """Curve plus sliding-window local slopes; flagged slow windows shaded."""
    fig, (ax0, ax1) = plt.subplots(
        2, 1, figsize=(6.0, 5.6), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]},
    )
    ax0.loglog(table.radii, table.values, "-", color="tab:blue", lw=1.2)
    ax0.set_ylabel("B(r)")
    ax0.grid(True, which="both", alpha=0.3)
    mids = [np.sqrt(w.r_lo * w.r_hi) for w in table.windows]
    slopes = [w.slope for w in table.windows]
    ax1.semilogx(mids, slopes, "-o", color="tab:blue", ms=3, lw=1.0)
    ax1.axhline(table.flag_threshold, color="tab:red", lw=0.8, ls="--",
                label=f"flag threshold {table.flag_threshold}")
    for w in table.windows:
        if w.flagged:
            ax1.axvspan(w.r_lo, w.r_hi, color="tab:red", alpha=0.08)
            ax0.axvspan(w.r_lo, w.r_hi, color="tab:red", alpha=0.08)
    ax1.set_xlabel("r")
    ax1.set_ylabel("local slope")
    ax1.legend(loc="best", fontsize=8)
    ax1.grid(True, which="both", alpha=0.3)
    if title:
        ax0.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
