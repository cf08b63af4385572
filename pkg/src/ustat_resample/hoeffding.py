"""Hoeffding decomposition of symmetric kernels.

The order-k projection of an order-m kernel applies the centering
operator (point mass minus law) to k argument slots and integrates the
rest, which expands by inclusion-exclusion over the partial
expectations

    g_j(x_1, ..., x_j) = E f(x_1, ..., x_j, X_{j+1}, ..., X_m).

Three routes compute the g_j: closed-form factor moments for separable
kernels, exact summation for finite-support laws, and frozen Monte
Carlo draws otherwise.  The projections are centered, completely
degenerate up to the method's error, and reconstruct the original
U-statistic exactly through the binomial recombination identity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .engine import Normalization, UStatValue, ustat
from .errors import ConfigInvalid, OrderMismatch, SampleTooSmall
from .kernels import Factor, Kernel, constant_kernel, separable_from_factors
from .laws import Law
from .rngutil import derive_seed, substream

_GRID_COUNT = 32
_MC_CHUNK = 1 << 22


class ProjectionMethod(Enum):
    SYMBOLIC = "symbolic"
    FINITE_EXACT = "finite_exact"
    MONTE_CARLO = "monte_carlo"


def _auto_method(kernel: Kernel, law: Law) -> ProjectionMethod:
    if kernel.is_separable and law.kind != "bivariate_normal":
        return ProjectionMethod.SYMBOLIC
    if law.kind == "finite":
        return ProjectionMethod.FINITE_EXACT
    return ProjectionMethod.MONTE_CARLO


def _symbolic_projection(kernel: Kernel, law: Law, k: int) -> Kernel:
    means = [law.expect(f.fn) for f in kernel.factors]
    m = kernel.order
    if k == 0:
        return constant_kernel(sum(c * mu**m for c, mu in zip(kernel.coeffs, means)))
    coeffs = [c * mu ** (m - k) for c, mu in zip(kernel.coeffs, means)]
    centered = [
        Factor(f.name + "~centered", (lambda x, f=f, mu=mu: f.fn(x) - mu))
        for f, mu in zip(kernel.factors, means)
    ]
    return separable_from_factors(coeffs, centered, order=k,
                                  name=f"proj{k}[{kernel.name}]")


class _FinitePartialMeans:
    """Exact partial expectations over a finite-support law."""

    def __init__(self, kernel: Kernel, law: Law):
        self.kernel = kernel
        self.pts = law.params["points"]
        self.probs = law.params["probs"]

    def g(self, j: int, args: list[np.ndarray]) -> np.ndarray:
        m = self.kernel.order
        if j == m:
            return self.kernel(*args)
        shape = np.broadcast(*[np.asarray(a)[..., 0] if self.kernel.arg_dim > 1
                               else np.asarray(a) for a in args]).shape if args else ()
        total = np.zeros(shape)
        for combo in itertools.product(range(self.pts.shape[0]), repeat=m - j):
            weight = math.prod(self.probs[s] for s in combo)
            rest = [np.broadcast_to(self.pts[s], shape + ((self.kernel.arg_dim,)
                    if self.kernel.arg_dim > 1 else ())) for s in combo]
            total = total + weight * self.kernel(*args, *rest)
        return total


class _MonteCarloPartialMeans:
    """Partial expectations from frozen Monte Carlo draws.

    Draws are frozen per integration depth at construction, so the
    resulting projections are deterministic functions; the binomial
    reconstruction identity holds exactly regardless of the draws, and
    the Monte Carlo error only moves the projections within the
    degeneracy tolerance.
    """

    def __init__(self, kernel: Kernel, law: Law, n_mc: int, rng_seed: int):
        self.kernel = kernel
        self.n_mc = n_mc
        m = kernel.order
        self.draws = {}
        for j in range(m):
            rng = substream(rng_seed, "hoeffding-draws", j)
            flat = law.sample(rng, n_mc * (m - j))
            shape = (n_mc, m - j) + ((kernel.arg_dim,) if kernel.arg_dim > 1 else ())
            self.draws[j] = flat.reshape(shape)

    def g(self, j: int, args: list[np.ndarray], with_se: bool = False):
        m = self.kernel.order
        if j == m:
            vals = self.kernel(*args)
            return (vals, np.zeros_like(vals)) if with_se else vals
        draws = self.draws[j]
        vec = self.kernel.arg_dim > 1
        tail = (self.kernel.arg_dim,) if vec else ()
        if args:
            lead = np.broadcast(*[(np.asarray(a)[..., 0] if vec else np.asarray(a))
                                  for a in args]).shape
        else:
            lead = ()
        t = int(np.prod(lead)) if lead else 1
        # fixed args flattened to (1, t) so draw blocks broadcast on axis 0
        flat_args = [np.broadcast_to(np.asarray(a, dtype=np.float64), lead + tail)
                     .reshape((1, t) + tail) for a in args]
        acc = np.zeros(t)
        acc2 = np.zeros(t)
        step = max(1, _MC_CHUNK // max(t, 1))
        for lo in range(0, self.n_mc, step):
            hi = min(self.n_mc, lo + step)
            block = draws[lo:hi]
            rest = [block[:, r].reshape((hi - lo, 1) + tail) for r in range(m - j)]
            vals = np.broadcast_to(self.kernel(*flat_args, *rest), (hi - lo, t))
            acc += vals.sum(axis=0)
            acc2 += (vals * vals).sum(axis=0)
        mean = acc / self.n_mc
        var = np.maximum(acc2 / self.n_mc - mean**2, 0.0)
        se = np.sqrt(var / self.n_mc)
        if lead:
            mean, se = mean.reshape(lead), se.reshape(lead)
        else:
            mean, se = float(mean[0]), float(se[0])
        return (mean, se) if with_se else mean


def _inclusion_exclusion_kernel(kernel: Kernel, partial, k: int) -> Kernel:
    """Projection of order k as the alternating sum of partial
    expectations over subsets of the k fixed slots."""
    if k == 0:
        return constant_kernel(float(np.asarray(partial.g(0, []))))
    subsets = [(len(s), s) for r in range(k + 1)
               for s in itertools.combinations(range(k), r)]

    def fn(*args):
        # the full subset contributes g_k(args) itself, so for array
        # inputs the total always carries the broadcast array shape
        total = None
        for size, subset in subsets:
            term = partial.g(size, [args[i] for i in subset])
            signed = term if (k - size) % 2 == 0 else -term
            total = signed if total is None else total + signed
        return total

    return Kernel(order=k, arg_dim=kernel.arg_dim, fn=fn,
                  name=f"proj{k}[{kernel.name}]")


def hoeffding_project(kernel: Kernel, law: Law, k: int,
                      method: Optional[ProjectionMethod] = None,
                      n_mc: int = 20000, rng_seed: int = 0) -> Kernel:
    """Order-k Hoeffding projection of ``kernel`` under ``law``."""
    m = kernel.order
    if not 0 <= k <= m:
        raise OrderMismatch(f"projection order {k} outside 0..{m}")
    method = method or _auto_method(kernel, law)
    if method is ProjectionMethod.SYMBOLIC:
        if not kernel.is_separable:
            raise ConfigInvalid("method", "symbolic projection needs a separable kernel")
        if k == m:
            # the top projection keeps the kernel's own shape
            return _symbolic_top(kernel, law)
        return _symbolic_projection(kernel, law, k)
    if method is ProjectionMethod.FINITE_EXACT:
        if law.kind != "finite":
            raise ConfigInvalid("method", "finite_exact projection needs a finite-support law")
        return _inclusion_exclusion_kernel(kernel, _FinitePartialMeans(kernel, law), k)
    partial = _MonteCarloPartialMeans(kernel, law, n_mc, rng_seed)
    return _inclusion_exclusion_kernel(kernel, partial, k)


def _symbolic_top(kernel: Kernel, law: Law) -> Kernel:
    return _symbolic_projection(kernel, law, kernel.order)


@dataclass(frozen=True)
class HoeffdingDecomposition:
    """All projections of one kernel under one law.

    ``projections[k]`` has order k (index 0 is the constant term);
    ``error_estimates[k]`` is a conservative per-evaluation standard
    error (0 for exact methods).
    """

    kernel: Kernel
    law: Law
    method: ProjectionMethod
    projections: tuple[Kernel, ...]
    error_estimates: tuple[float, ...]


def decompose(kernel: Kernel, law: Law,
              method: Optional[ProjectionMethod] = None,
              n_mc: int = 20000, rng_seed: int = 0) -> HoeffdingDecomposition:
    """Compute every projection 0..m plus error estimates."""
    m = kernel.order
    method = method or _auto_method(kernel, law)
    if method is ProjectionMethod.MONTE_CARLO:
        partial = _MonteCarloPartialMeans(kernel, law, n_mc, rng_seed)
        projections = [_inclusion_exclusion_kernel(kernel, partial, k)
                       for k in range(m + 1)]
        errors = [_mc_projection_error(kernel, law, partial, k) for k in range(m + 1)]
    else:
        projections = [hoeffding_project(kernel, law, k, method=method)
                       for k in range(m + 1)]
        errors = [0.0] * (m + 1)
    return HoeffdingDecomposition(kernel=kernel, law=law, method=method,
                                  projections=tuple(projections),
                                  error_estimates=tuple(errors))


def _mc_projection_error(kernel: Kernel, law: Law,
                         partial: _MonteCarloPartialMeans, k: int) -> float:
    """Conservative standard error of the order-k projection on a probe
    grid: per-subset standard errors added without cancellation."""
    if k == 0:
        _, se = partial.g(0, [], with_se=True)
        return float(se)
    grid = law.fixed_tuples(k, 8)
    worst = 0.0
    for row in grid:
        args = [row[i] * np.ones(1) if kernel.arg_dim == 1 else
                np.repeat(row[i][None, :], 1, axis=0) for i in range(k)]
        total_se = 0.0
        for r in range(k + 1):
            for subset in itertools.combinations(range(k), r):
                _, se = partial.g(r, [args[i] for i in subset], with_se=True)
                total_se += float(np.max(se))
        worst = max(worst, total_se)
    return worst


@dataclass(frozen=True)
class ReconstructionReport:
    """Residual of recombining projections into the original U-statistic."""

    value: float
    reconstruction: float
    residual: float
    rel_residual: float
    terms: tuple[float, ...]


def reconstruct(decomp: HoeffdingDecomposition, points: np.ndarray) -> ReconstructionReport:
    """Evaluate U_n(f) and the binomial recombination of the projections
    on one sample; returns both plus the residual."""
    m = decomp.kernel.order
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < m:
        raise SampleTooSmall(f"need at least {m} observations, got {n}")
    base = ustat(points, decomp.kernel).value
    terms = []
    for k in range(m + 1):
        proj = decomp.projections[k]
        if k == 0:
            terms.append(float(proj.constant))
        else:
            terms.append(math.comb(m, k) * ustat(points, proj).value)
    recon = math.fsum(terms)
    residual = abs(base - recon)
    return ReconstructionReport(value=base, reconstruction=recon,
                                residual=residual,
                                rel_residual=residual / (1.0 + abs(base)),
                                terms=tuple(terms))


@dataclass(frozen=True)
class DegeneracyLevel:
    """Worst conditional-mean deviation with ``fixed`` fixed arguments."""

    fixed: int
    max_standardized: float
    worst_point: object
    worst_mean: float
    worst_se: float


@dataclass(frozen=True)
class DegeneracyReport:
    """Monte Carlo check of centering and conditional-mean constancy."""

    passed: bool
    max_standardized: float
    tol_sd: float
    n_mc: int
    global_mean: float
    global_se: float
    levels: tuple[DegeneracyLevel, ...]


def check_degeneracy(kernel: Kernel, law: Law, claimed_order: int,
                     n_mc: int = 100000, tol_sd: float = 4.0,
                     rng_seed: int = 0, grid_count: int = _GRID_COUNT) -> DegeneracyReport:
    """Check that ``kernel`` is centered and degenerate of order
    ``claimed_order`` under ``law``.

    The overall mean is compared against zero, and for each number of
    fixed arguments j = 1..claimed_order the conditional means on a
    quasi-random grid are compared against the overall mean, all in
    standard-error units.  An order-1 kernel reduces to the centering
    check.  Grid points use independent derived RNG streams so the
    loop parallelizes without changing results.
    """
    m = kernel.order
    if not 0 <= claimed_order <= max(m - 1, 0):
        raise OrderMismatch(
            f"claimed degeneracy order {claimed_order} outside 0..{m - 1}")
    rng = substream(rng_seed, "degeneracy", "global")
    flat = law.sample(rng, n_mc * m)
    shape = (n_mc, m) + ((kernel.arg_dim,) if kernel.arg_dim > 1 else ())
    draws = flat.reshape(shape)
    vals = kernel(*[draws[:, r] for r in range(m)])
    gmean = float(vals.mean())
    gse = float(vals.std(ddof=1) / np.sqrt(n_mc))
    centering_z = abs(gmean) / max(gse, 1e-300)
    levels = [DegeneracyLevel(fixed=0, max_standardized=centering_z,
                              worst_point=None, worst_mean=gmean, worst_se=gse)]
    for j in range(1, min(claimed_order, m - 1) + 1):
        grid = law.fixed_tuples(j, grid_count)
        worst = (0.0, None, 0.0, 0.0)
        for p_idx in range(grid.shape[0]):
            prng = substream(rng_seed, "degeneracy", j, p_idx)
            flat = law.sample(prng, n_mc * (m - j))
            rest = flat.reshape((n_mc, m - j) +
                                ((kernel.arg_dim,) if kernel.arg_dim > 1 else ()))
            fixed_args = [np.broadcast_to(grid[p_idx, i], (n_mc,) +
                          ((kernel.arg_dim,) if kernel.arg_dim > 1 else ()))
                          for i in range(j)]
            cvals = kernel(*fixed_args, *[rest[:, r] for r in range(m - j)])
            cmean = float(cvals.mean())
            cse = float(cvals.std(ddof=1) / np.sqrt(n_mc))
            z = abs(cmean - gmean) / max(np.hypot(cse, gse), 1e-300)
            if z > worst[0]:
                worst = (z, grid[p_idx], cmean, cse)
        levels.append(DegeneracyLevel(fixed=j, max_standardized=worst[0],
                                      worst_point=worst[1], worst_mean=worst[2],
                                      worst_se=worst[3]))
    max_z = max(level.max_standardized for level in levels)
    return DegeneracyReport(passed=bool(max_z <= tol_sd), max_standardized=max_z,
                            tol_sd=tol_sd, n_mc=n_mc, global_mean=gmean,
                            global_se=gse, levels=tuple(levels))
