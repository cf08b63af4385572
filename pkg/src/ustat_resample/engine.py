"""U-statistic evaluation engine.

Computes U-statistics by exact enumeration over increasing index
tuples, multiplier-weighted variants with an O(n) elementary-symmetric
fast path for separable kernels, and decoupled symmetrized partial sums
over index boxes.  All large accumulations use exactly rounded
summation so results are independent of enumeration order and chunk
partitioning.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (DimensionMismatch, EnumerationTooLarge, OrderMismatch,
                     SampleTooSmall)
from .kernels import Kernel
from .laws import Law
from .numerics import compensated_sum, merge_partials

ENUMERATION_CAP = 10**9
DECOUPLED_CAP = 10**8
_CHUNK = 1 << 16


class Normalization(Enum):
    """How the sum over index tuples is scaled.

    ``BINOMIAL_AVERAGE``: sum over increasing tuples / C(n, m).
    ``RAW_SUM``: sum over increasing tuples.
    ``DISTINCT_TUPLE_SUM``: sum over all distinct ordered tuples,
    i.e. m! times the raw sum for a symmetric kernel.
    """

    BINOMIAL_AVERAGE = "binomial_average"
    RAW_SUM = "raw_sum"
    DISTINCT_TUPLE_SUM = "distinct_tuple_sum"


@dataclass(frozen=True)
class UStatValue:
    """A computed U-statistic with its normalization."""

    value: float
    order: int
    n: int
    normalization: Normalization


def _sample_size(points: np.ndarray, kernel: Kernel) -> int:
    points = np.asarray(points)
    if kernel.arg_dim == 1:
        if points.ndim != 1:
            raise DimensionMismatch("scalar kernel needs a 1-d sample")
    else:
        if points.ndim != 2 or points.shape[1] != kernel.arg_dim:
            raise DimensionMismatch(
                f"kernel expects observations of dimension {kernel.arg_dim}")
    return points.shape[0]


def _iter_combination_chunks(n: int, m: int) -> Iterator[np.ndarray]:
    it = itertools.combinations(range(n), m)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.intp)


def _check_enumeration(n: int, m: int) -> None:
    if math.comb(n, m) > ENUMERATION_CAP:
        raise EnumerationTooLarge(
            f"C({n},{m}) = {math.comb(n, m)} exceeds cap {ENUMERATION_CAP}")


def _normalize(raw: float, n: int, m: int, normalization: Normalization) -> float:
    if normalization is Normalization.BINOMIAL_AVERAGE:
        return raw / math.comb(n, m)
    if normalization is Normalization.RAW_SUM:
        return raw
    return raw * math.factorial(m)


def ustat(points: np.ndarray, kernel: Kernel,
          normalization: Normalization = Normalization.BINOMIAL_AVERAGE) -> UStatValue:
    """U-statistic of ``kernel`` by exact enumeration.

    Deterministic and invariant under permutations of the sample: every
    increasing index tuple is visited once and the partial sums merge
    through exactly rounded summation.
    """
    points = np.asarray(points, dtype=np.float64)
    m = kernel.order
    if m == 0:
        return UStatValue(float(kernel.constant), 0, points.shape[0],
                          normalization)
    n = _sample_size(points, kernel)
    if n < m:
        raise SampleTooSmall(f"need at least {m} observations, got {n}")
    _check_enumeration(n, m)
    partials = []
    for idx in _iter_combination_chunks(n, m):
        partials.append(compensated_sum(kernel.eval_tuples(points, idx)))
    raw = merge_partials(partials)
    return UStatValue(_normalize(raw, n, m, normalization), m, n, normalization)


def elementary_symmetric(values: np.ndarray, m: int) -> float:
    """m-th elementary symmetric polynomial via the Newton recurrence.

    O(n m) instead of C(n, m) enumeration.  Returns 0 for m > len(values)
    and 1 for m = 0.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if m < 0:
        raise OrderMismatch("m must be non-negative")
    if m == 0:
        return 1.0
    if m > values.size:
        return 0.0
    power_sums = [compensated_sum(values**j) for j in range(1, m + 1)]
    return newton_from_power_sums(power_sums)


def newton_from_power_sums(power_sums: Sequence) -> float:
    """Evaluate the polynomial expressing e_m in the first m power sums.

    ``power_sums[j-1]`` plays the role of p_j.  Entries may be scalars
    or broadcastable arrays; the result has the broadcast shape.
    """
    m = len(power_sums)
    if m == 0:
        return 1.0
    ps = [np.asarray(p, dtype=np.float64) for p in power_sums]
    e = [np.float64(1.0)]
    for k in range(1, m + 1):
        acc = 0.0
        for j in range(1, k + 1):
            term = e[k - j] * ps[j - 1]
            acc = acc + (term if j % 2 == 1 else -term)
        e.append(acc / k)
    out = e[m]
    return float(out) if np.ndim(out) == 0 else out


def multiplier_ustat(points: np.ndarray, weights: np.ndarray, kernel: Kernel,
                     center_weights: bool = False,
                     normalization: Normalization = Normalization.BINOMIAL_AVERAGE,
                     ) -> UStatValue:
    """Weighted U-statistic with per-observation multipliers.

    Computes ``sum over i_1 < ... < i_m of w_{i_1} ... w_{i_m} f`` under
    the chosen normalization; ``center_weights`` replaces each w_i by
    w_i - 1 first (the bootstrap-centered form).  Separable kernels use
    the elementary-symmetric fast path, everything else enumerates.
    """
    points = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64).ravel()
    m = kernel.order
    n = _sample_size(points, kernel)
    if weights.shape[0] != n:
        raise DimensionMismatch("weights must be one per observation")
    if n < m:
        raise SampleTooSmall(f"need at least {m} observations, got {n}")
    w = weights - 1.0 if center_weights else weights
    if kernel.is_separable:
        partial = [
            c * elementary_symmetric(w * factor.fn(points), m)
            for c, factor in zip(kernel.coeffs, kernel.factors)
        ]
        raw = merge_partials(partial)
    else:
        _check_enumeration(n, m)
        partials = []
        for idx in _iter_combination_chunks(n, m):
            wprod = w[idx].prod(axis=1)
            partials.append(compensated_sum(wprod * kernel.eval_tuples(points, idx)))
        raw = merge_partials(partials)
    return UStatValue(_normalize(raw, n, m, normalization), m, n, normalization)


@dataclass(frozen=True)
class FunctionClass:
    """A finite class of kernels sharing one order and observation
    dimension; suprema are exact maxima over the members."""

    kernels: tuple[Kernel, ...]

    def __post_init__(self):
        if not self.kernels:
            raise OrderMismatch("function class must not be empty")
        orders = {k.order for k in self.kernels}
        dims = {k.arg_dim for k in self.kernels}
        if len(orders) != 1 or len(dims) != 1:
            raise OrderMismatch("function class members must share order and dimension")

    @property
    def order(self) -> int:
        return self.kernels[0].order

    @property
    def arg_dim(self) -> int:
        return self.kernels[0].arg_dim

    def __len__(self) -> int:
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)


@dataclass(frozen=True)
class DecoupledData:
    """Independent copies and sign arrays for decoupled sums: copy k
    supplies the k-th index axis."""

    copies: tuple[np.ndarray, ...]
    signs: tuple[np.ndarray, ...]

    @property
    def order(self) -> int:
        return len(self.copies)

    @property
    def n(self) -> int:
        return self.copies[0].shape[0]


def draw_decoupled(law: Law, order: int, n: int, rng: np.random.Generator) -> DecoupledData:
    """Draw ``order`` independent samples of size ``n`` plus independent
    sign arrays."""
    copies = tuple(law.sample(rng, n) for _ in range(order))
    signs = tuple(rng.integers(0, 2, size=n) * 2.0 - 1.0 for _ in range(order))
    return DecoupledData(copies=copies, signs=signs)


def _capped_tensor_sum(kernel: Kernel, data: DecoupledData,
                       caps: Sequence[int]) -> float:
    arrs = [data.copies[k][:caps[k]] for k in range(data.order)]
    sgns = [data.signs[k][:caps[k]] for k in range(data.order)]
    if kernel.is_separable:
        partial = []
        for c, factor in zip(kernel.coeffs, kernel.factors):
            prod = c
            for k in range(data.order):
                prod = prod * compensated_sum(sgns[k] * factor.fn(arrs[k]))
            partial.append(prod)
        return merge_partials(partial)
    m = data.order
    # broadcast args to the full index box, chunking along the first axis
    partials = []
    first_cap = caps[0]
    step = max(1, _CHUNK // max(1, int(np.prod(caps[1:], dtype=np.int64)))) if m > 1 else first_cap
    for lo in range(0, first_cap, step):
        hi = min(first_cap, lo + step)
        args = []
        sign_block = None
        for k in range(m):
            a = arrs[k] if k > 0 else arrs[0][lo:hi]
            s = sgns[k] if k > 0 else sgns[0][lo:hi]
            shape = [1] * m
            shape[k] = a.shape[0]
            if kernel.arg_dim > 1:
                args.append(a.reshape(shape + [kernel.arg_dim]))
            else:
                args.append(a.reshape(shape))
            s_shaped = s.reshape(shape)
            sign_block = s_shaped if sign_block is None else sign_block * s_shaped
        vals = kernel.fn(*[np.broadcast_to(a, sign_block.shape + ((kernel.arg_dim,) if kernel.arg_dim > 1 else ()))
                           for a in args])
        partials.append(compensated_sum(sign_block * vals))
    return merge_partials(partials)


def decoupled_sym_sup(fclass: FunctionClass, data: DecoupledData,
                      caps: Sequence[int]) -> float:
    """sup over the class of |sum over the index box prod_k eps f|.

    ``caps[k]`` truncates the k-th index axis; any zero cap gives an
    empty sum.  The enumeration cap bounds the box volume.
    """
    if len(caps) != data.order:
        raise OrderMismatch("need one cap per index axis")
    caps = [int(c) for c in caps]
    if any(c < 0 or c > data.n for c in caps):
        raise OrderMismatch("caps must lie in [0, n]")
    if any(c == 0 for c in caps):
        return 0.0
    if int(np.prod([max(c, 1) for c in caps], dtype=np.int64)) > DECOUPLED_CAP:
        raise EnumerationTooLarge(f"index box {caps} exceeds cap {DECOUPLED_CAP}")
    if fclass.order != data.order:
        raise OrderMismatch("class order must match decoupled data order")
    return max(abs(_capped_tensor_sum(k, data, caps)) for k in fclass)


def weighted_distinct_sum(points: np.ndarray, weights: np.ndarray,
                          kernel: Kernel) -> float:
    """Sum over all distinct ordered index tuples of
    ``prod_k w_{i_k} f(X_tuple)`` (m! times the increasing-tuple sum)."""
    return multiplier_ustat(points, weights, kernel,
                            normalization=Normalization.DISTINCT_TUPLE_SUM).value
