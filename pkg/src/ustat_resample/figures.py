"""Figure rendering for experiment reports.

Every renderer writes one PNG with the non-interactive backend and a
fixed metadata block, so reruns of the same experiment produce
byte-identical files.  Rendering is presentation only: the delimited
outputs carry the numbers and the figures must never feed back into
results.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = {"dpi": 110, "metadata": {"Software": "ustat-resample"}}


def _finish(fig, path) -> str:
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_value_bars(labels: Sequence[str], values: Sequence[float],
                      title: str, path) -> str:
    """Bar chart of a handful of scalar results."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    pos = np.arange(len(values))
    ax.bar(pos, values, color="#4878d0")
    ax.set_xticks(pos)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)


def _ecdf(ax, values: np.ndarray, label: str, color: str) -> None:
    x = np.sort(np.asarray(values, dtype=np.float64))
    y = np.arange(1, x.size + 1) / x.size
    ax.step(x, y, where="post", label=label, color=color, lw=1.2)


def render_ecdf_pair(sample_a: np.ndarray, sample_b: np.ndarray,
                     label_a: str, label_b: str, ks: float, title: str,
                     path) -> str:
    """Overlaid empirical CDFs with the two-sample KS distance."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    _ecdf(ax, sample_a, label_a, "#4878d0")
    _ecdf(ax, sample_b, label_b, "#d65f5f")
    ax.set_title(f"{title}  (KS = {ks:.4f})")
    ax.set_xlabel("value")
    ax.set_ylabel("empirical CDF")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)


def render_ecdf_grid(pairs: Sequence[tuple[np.ndarray, np.ndarray]],
                     label_a: str, label_b: str, ks_values: Sequence[float],
                     title: str, path) -> str:
    """One ECDF overlay per coordinate, side by side."""
    k = len(pairs)
    fig, axes = plt.subplots(1, k, figsize=(5.0 * k, 4.0), squeeze=False)
    for j, ((a, b), ax) in enumerate(zip(pairs, axes[0])):
        _ecdf(ax, a, label_a, "#4878d0")
        _ecdf(ax, b, label_b, "#d65f5f")
        ax.set_title(f"coordinate {j + 1}  (KS = {ks_values[j]:.4f})")
        ax.grid(alpha=0.3)
        if j == 0:
            ax.set_ylabel("empirical CDF")
            ax.legend(loc="lower right", fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    return _finish(fig, path)


def render_bound_scatter(lhs: Sequence[float], rhs: Sequence[float],
                         passed: Sequence[bool], title: str, path) -> str:
    """Observed suprema against their bounds on log axes; points below
    the diagonal satisfy the bound."""
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    ok = np.asarray(passed, dtype=bool)
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    lo = max(min(lhs.min(), rhs.min()), 1e-12)
    hi = max(lhs.max(), rhs.max())
    grid = np.array([lo * 0.5, hi * 2.0])
    ax.loglog(grid, grid, "k--", lw=1.0, label="bound = observed")
    ax.loglog(lhs[ok], rhs[ok], "o", color="#4878d0", ms=5, label="pass")
    if np.any(~ok):
        ax.loglog(lhs[~ok], rhs[~ok], "x", color="#d65f5f", ms=7, label="fail")
    ax.set_xlabel("observed supremum")
    ax.set_ylabel("bound")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    return _finish(fig, path)


def render_decay(n_values: Sequence[int],
                 series: dict[str, Sequence[float]], ylabel: str,
                 title: str, path,
                 reference_slope: Optional[float] = None) -> str:
    """Magnitudes against population size on log axes, optionally with a
    power-law guide anchored at the first point of the first series."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n = np.asarray(n_values, dtype=np.float64)
    colors = ["#4878d0", "#d65f5f", "#6acc64", "#956cb4"]
    for (label, vals), color in zip(series.items(), colors):
        ax.loglog(n, np.abs(np.asarray(vals, dtype=np.float64)), "o-",
                  color=color, label=label)
    if reference_slope is not None and series:
        first = np.abs(np.asarray(next(iter(series.values())), dtype=np.float64))
        guide = first[0] * (n / n[0]) ** reference_slope
        ax.loglog(n, guide, "k:", lw=1.0,
                  label=f"slope {reference_slope:g} guide")
    ax.set_xlabel("population size")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    return _finish(fig, path)


def render_quantile_band(n_values: Sequence[int], medians: Sequence[float],
                         lower: Sequence[float], upper: Sequence[float],
                         ylabel: str, title: str, path) -> str:
    """Median with an interquartile band against population size."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    n = np.asarray(n_values, dtype=np.float64)
    ax.fill_between(n, lower, upper, color="#4878d0", alpha=0.25,
                    label="interquartile band")
    ax.plot(n, medians, "o-", color="#4878d0", label="median")
    ax.set_xscale("log")
    ax.set_xlabel("population size")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _finish(fig, path)
