"""Static SVG figures for the CLI reports."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_marginals", "plot_scaling", "plot_trace", "plot_double_well"]


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_marginals(profiles, path, reference=None) -> Path:
    """Detector-time position marginals, one curve per gamma."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for prof in profiles:
        ax.plot(prof.z, prof.marginal, lw=1.0, label=f"gamma={prof.gamma:.3f}  V={prof.visibility:.3f}")
    if reference is not None:
        ax.plot(reference.z, reference.marginal, "k--", lw=0.8, label="Schrodinger")
    if profiles:
        lo, hi = profiles[0].window
        ax.axvspan(lo, hi, color="0.9", zorder=0)
        ax.set_xlim(1.5 * lo, 1.5 * hi)
    ax.set_xlabel("z")
    ax.set_ylabel("probability density")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_scaling(results, fit, path) -> Path:
    """log width against log sin^2(gamma) with the fitted line."""
    pts = [(math.sin(r.gamma) ** 2, r.width) for r in results if r.gamma > 0 and r.width > 0]
    fig, ax = plt.subplots(figsize=(5, 4))
    if pts:
        x, y = map(np.array, zip(*pts))
        ax.loglog(x, y, "o", label="width")
        if fit is not None:
            xs = np.geomspace(x.min(), x.max(), 50)
            ax.loglog(xs, np.exp(fit.intercept) * xs ** fit.slope, "-",
                      label=f"slope {fit.slope:.3f}, R^2 {fit.r_squared:.4f}")
    ax.set_xlabel("sin^2 gamma")
    ax.set_ylabel("energy width")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_trace(report, path) -> Path:
    """Every recorded column of an evolution report against time."""
    cols = [c for c in report.columns() if c != "time"]
    fig, axes = plt.subplots(len(cols), 1, figsize=(6, 1.6 * len(cols)), sharex=True, squeeze=False)
    t = np.asarray(report.time)
    for ax, col in zip(axes[:, 0], cols):
        values = np.asarray(report.norm if col == "norm" else report.boundary_mass if col == "boundary_mass"
                            else report.observables[col])
        ax.plot(t, values, lw=1.0)
        ax.set_ylabel(col, fontsize=8)
    axes[-1, 0].set_xlabel("t")
    return _save(fig, path)


def plot_double_well(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(report.gammas, report.ratios, "o-")
    ax.axhline(1.0, color="0.5", lw=0.8)
    if report.crossing_gamma is not None:
        ax.axvline(report.crossing_gamma, color="r", lw=0.8, ls="--")
    ax.set_xlabel("gamma")
    ax.set_ylabel("width / (E1 - E0)")
    return _save(fig, path)
