"""SVG figures for growth series, sweeps and certificate chains."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed hash salt and no date metadata keep the SVG bytes reproducible
matplotlib.rcParams["svg.hashsalt"] = "switchgrowth"
_META = {"Date": None, "Creator": None}

KIND_COLORS = {
    "MarginallyStableEvenP": "tab:blue",
    "MarginallyUnstableLinearOddP": "tab:red",
    "DegenerateOddP": "tab:orange",
    "OutOfScopeAngle": "tab:gray",
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)
    return path


def plot_growth(series, path, title: str = "") -> Path:
    """``beta_t / t`` with the alpha bracket, plus ``beta_t`` on a second axis."""
    t = series.t[1:]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    if t.size:
        ax0.plot(t, series.beta[1:], lw=1, label=r"$\beta_t$")
        ax0.fill_between(t, series.alpha_lo[1:], series.alpha_hi[1:], alpha=0.25,
                         label=r"$\alpha_t$ bracket")
        ax1.plot(t, series.beta[1:] / t, lw=1, color="k")
    ax0.set_xlabel("t")
    ax0.legend(frameon=False)
    ax1.set_xlabel("t")
    ax1.set_ylabel(r"$\beta_t / t$")
    for ax in (ax0, ax1):
        if t.size > 1:
            ax.set_xscale("log")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_sweep(rows, path) -> Path:
    """Atlas of classified angles: theta against q, colored by kind."""
    fig, ax = plt.subplots(figsize=(8, 3.6), constrained_layout=True)
    for kind, color in KIND_COLORS.items():
        sel = [r for r in rows if r["kind"] == kind]
        if sel:
            ax.scatter([r["theta"] for r in sel], [r["q"] for r in sel], s=14, color=color,
                       label=kind)
    ax.set_xlim(0, 2 * math.pi)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("q")
    ax.legend(frameon=False, fontsize=7, loc="upper right")
    return _save(fig, path)


def plot_chain(chain, path) -> Path:
    """Nested stage intervals, one row per stage, widths on a log scale."""
    stages = chain.stages
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.2), constrained_layout=True)
    lo, hi = chain.initial_interval
    ax0.hlines(0, lo, hi, color="k", lw=3)
    for i, st in enumerate(stages, start=1):
        color = "tab:blue" if st.kind.value == "Stabilizing" else "tab:red"
        ax0.hlines(i, *st.interval, color=color, lw=3)
        ax0.plot(st.anchor.value, i, "k|")
    ax0.set_xlabel(r"$\theta$")
    ax0.set_ylabel("stage")
    widths = [hi - lo] + [st.width for st in stages]
    ax1.semilogy(np.arange(len(widths)), widths, "o-", color="k")
    ax1.set_xlabel("stage")
    ax1.set_ylabel("interval width")
    return _save(fig, path)
