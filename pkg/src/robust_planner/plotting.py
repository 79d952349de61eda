"""Figures for the experiment report; each function writes one image file."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def new(width=6.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
    return fig, ax


def save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(series: dict[str, list[tuple[float, float]]], path):
    """Mean execution value against execution probability, one line per plan."""
    fig, ax = new()
    for label, rows in series.items():
        xs, ys = zip(*rows) if rows else ((), ())
        ax.plot(xs, ys, marker="o", ms=3, label=label)
    ax.set_xlabel("execution probability")
    ax.set_ylabel("mean final value")
    ax.legend(frameon=False)
    save(fig, path)


def plot_histogram(series: dict[str, dict[float, int]], path):
    fig, ax = new()
    n = max(len(series), 1)
    width = 0.8 / n
    for j, (label, hist) in enumerate(series.items()):
        total = sum(hist.values()) or 1
        xs = np.array(sorted(hist), dtype=float)
        ys = np.array([hist[x] / total for x in sorted(hist)])
        ax.bar(xs + (j - (n - 1) / 2) * width, ys, width=width, label=label)
    ax.set_xlabel("final value")
    ax.set_ylabel("fraction of runs")
    ax.legend(frameon=False)
    save(fig, path)


def plot_exceedance(series: dict[str, list[tuple[float, float]]], path):
    """Step curves of P[value >= v]."""
    fig, ax = new()
    for label, points in series.items():
        if not points:
            continue
        xs, ys = zip(*points)
        ax.step(xs, [100 * y for y in ys], where="pre", label=label)
    ax.set_xlabel("value")
    ax.set_ylabel("% of runs reaching at least value")
    ax.set_ylim(0, 105)
    ax.legend(frameon=False)
    save(fig, path)


def plot_utility_curves(robustness_values, path, points=201):
    fig, ax = new(4.5)
    v = np.linspace(0.0, 1.0, points)
    for r in robustness_values:
        ax.plot(v, v ** (1.0 - r), label=f"R = {r:g}")
    ax.set_xlabel("normalized value V")
    ax.set_ylabel("utility")
    ax.legend(frameon=False)
    save(fig, path)
