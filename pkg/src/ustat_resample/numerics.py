"""Shared numeric helpers: compensated summation and the two-sample
Kolmogorov-Smirnov distance.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


def compensated_sum(values: np.ndarray) -> float:
    """Exactly rounded sum of a float array.

    ``math.fsum`` tracks all partial round-off, so the result is the
    correctly rounded true sum and therefore independent of summand
    order.  Large accumulations use this so that enumeration order and
    chunk partitioning cannot change results.
    """
    return math.fsum(np.asarray(values, dtype=np.float64).ravel())


def merge_partials(partials: Iterable[float]) -> float:
    """Combine per-chunk sums; exactly rounded, order-independent."""
    return math.fsum(partials)


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance sup_t |F_a(t) - F_b(t)|.

    Exactly 0 for identical samples and exactly 1 for samples with
    disjoint supports separated in value.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("ks_statistic needs non-empty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))
