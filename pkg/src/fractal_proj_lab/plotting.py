"""Matplotlib figure output for experiment reports.

Figures are rendered headless to files next to the CSV artifacts. Every
helper takes a path and writes a single PNG; none of them show windows.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_DPI = 130


def _new_axes(title, xlabel, ylabel, figsize=(5.2, 3.6)):
    fig, ax = plt.subplots(figsize=figsize)
    ax.set_title(title, fontsize=10)
    ax.set_xlabel(xlabel, fontsize=9)
    ax.set_ylabel(ylabel, fontsize=9)
    ax.tick_params(labelsize=8)
    ax.grid(True, alpha=0.3, linewidth=0.5)
    return fig, ax


def save_loglog_fit(fits: dict, path: str, title: str = "box-counting fits") -> None:
    """Scatter of log2(count) against level with the fitted lines.

    fits maps a label to a ScalingFit-like object (levels, counts, slope,
    intercept).
    """
    fig, ax = _new_axes(title, "level (log2 of 1/scale)", "log2 count")
    for label, fit in fits.items():
        base = getattr(fit, "base", 2)
        x = np.asarray(fit.levels, dtype=float)
        if hasattr(fit, "counts"):
            y = np.log2(np.asarray(fit.counts, dtype=float))
        else:
            y = np.asarray(fit.log_counts, dtype=float)
        pts = ax.plot(x, y, "o", ms=4, label=f"{label}: slope {fit.slope:.3f}")
        xs = np.linspace(x.min(), x.max(), 50)
        ax.plot(xs, fit.slope * xs * math.log2(base) + fit.intercept, "-", lw=1, color=pts[0].get_color())
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_ratio_plot(labels, ratios, reference: float | None, path: str, title: str) -> None:
    """Per-case ratio estimates with an optional reference line."""
    fig, ax = _new_axes(title, "", "ratio", figsize=(5.2, 3.2))
    xs = np.arange(len(labels))
    ax.plot(xs, ratios, "o", ms=6)
    if reference is not None:
        ax.axhline(reference, color="crimson", lw=1, label=f"reference {reference:.5f}")
        ax.legend(fontsize=8)
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, fontsize=8, rotation=20)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_fraction_by_angle(angles, values, path: str, title: str, ylabel: str = "value") -> None:
    """Per-line experiment outcomes against the line angle."""
    fig, ax = _new_axes(title, "line angle (radians)", ylabel)
    ax.plot(np.asarray(angles), np.asarray(values, dtype=float), ".", ms=3, alpha=0.7)
    ax.set_xlim(0, math.pi)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_slope_histogram(slopes, markers: dict, path: str, title: str) -> None:
    """Histogram of per-slice slopes with vertical reference markers."""
    fig, ax = _new_axes(title, "slice box-count slope", "slices", figsize=(5.2, 3.2))
    ax.hist(np.asarray(slopes), bins=40, color="steelblue", alpha=0.85)
    for label, x in markers.items():
        ax.axvline(x, lw=1, ls="--", color="crimson")
        ax.text(x, ax.get_ylim()[1] * 0.95, f" {label}", fontsize=7, color="crimson", va="top")
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_heatmap_png(field, path: str, title: str = "visibility") -> None:
    """Visibility field as an image (grid fractions in [0, 1])."""
    fig, ax = _new_axes(title, "x", "y", figsize=(4.8, 4.2))
    extent = (field.xs[0], field.xs[-1], field.ys[0], field.ys[-1])
    im = ax.imshow(field.fractions, origin="lower", extent=extent, vmin=0.0, vmax=1.0, cmap="viridis", aspect="auto")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_interval_union(lo, hi, highlights, path: str, title: str) -> None:
    """Interval union on the line with highlighted sample points."""
    fig, ax = _new_axes(title, "value", "", figsize=(5.6, 2.2))
    for a, b in zip(np.asarray(lo), np.asarray(hi)):
        ax.plot([a, b], [0, 0], lw=6, color="steelblue", solid_capstyle="butt")
    if len(highlights):
        ax.plot(np.asarray(highlights), np.zeros(len(highlights)), "x", ms=5, color="crimson")
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
