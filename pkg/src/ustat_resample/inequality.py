"""Monte Carlo lab for the sharp multiplier inequality on U-processes.

The inequality bounds the expected supremum of a weighted sum over all
index tuples,

    E sup_f |sum_{1 <= i_1,...,i_m <= n} xi_{i_1} ... xi_{i_m} f(X_tuple)|,

by ``K_m`` times a t-integral of an envelope ``psi_n`` evaluated at the
exceedance counts ``N(t_k) = #{i : |xi_i| > t_k}``, where ``psi_n(l)``
upper-bounds the expected supremum of the decoupled symmetrized sum over
the truncated index box ``{i_k <= l_k}``.  The constant is
``K_m = 2^{2m} prod_{k=2}^m (k^k - 1)`` (so ``K_2 = 48``; the empty
product gives ``K_1 = 4``).

The lab estimates both sides by Monte Carlo.  The envelope is tabulated
as MC mean plus a ``z``-SE inflation and then monotonized, so it is an
upper bound for the true ``psi_n`` only up to the recorded confidence
level; reports carry the inflation used.  The t-integral per weight draw
is exact: the counts are piecewise constant between the order statistics
of ``|xi|``, so the integral collapses to a finite sum over breakpoints.

A companion check covers the permutation-moment bound used for
exchangeable weights: for non-negative weights summing to ``n`` and a
uniformly random permutation ``R``,

    |E_R prod_i (xi_{R_i} - 1)^{alpha_i}|
        <= C n^{-l} [sum_i (xi_i - 1)^2]^{(sum_i alpha_i)/2}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import (ENUMERATION_CAP, DecoupledData, FunctionClass,
                     draw_decoupled)
from .errors import (ConfigInvalid, DegeneracyCheckFailed, EnumerationTooLarge,
                     EnvelopeIncomplete, OrderMismatch, SumConstraintViolated)
from .hoeffding import check_degeneracy
from .kernels import Kernel, separable_kernel
from .laws import Law, uniform01
from .numerics import compensated_sum, merge_partials
from .rngutil import derive_seed, substream
from .weights import (WeightScheme, iid_gaussian, iid_pareto, iid_rademacher,
                      require_finite_lp1)

_MIN_INFLATION_Z = 3.0
_GENERAL_TABLE_CAP = 10**8


def inequality_constant(m: int) -> float:
    """``K_m = 2^{2m} prod_{k=2}^m (k^k - 1)``; the order-1 case keeps
    the empty product, giving ``K_1 = 4``."""
    if m < 1:
        raise OrderMismatch("the inequality constant needs order >= 1")
    prod = 1
    for k in range(2, m + 1):
        prod *= k**k - 1
    return float(2 ** (2 * m) * prod)


@dataclass(frozen=True)
class PsiEnvelope:
    """Tabulated envelope ``psi_hat(l_1, ..., l_m)`` on the full cap grid
    ``{0, ..., n}^m``.

    ``values[l]`` upper-bounds the expected supremum of the decoupled
    symmetrized sum truncated at caps ``l`` (MC mean plus ``inflation_z``
    standard errors, then a coordinate-wise running maximum).  Caps with
    any zero coordinate are exactly zero since the sum is empty.  Power
    form envelopes ``kappa0 * (prod_k l_k)^(1/gamma)`` carry the fitted
    exponents instead of MC metadata.
    """

    order: int
    n: int
    values: np.ndarray
    monotonized: bool
    inflation_z: Optional[float] = None
    reps: Optional[int] = None
    power_gamma: Optional[float] = None
    kappa0: Optional[float] = None

    def __post_init__(self):
        if self.values.shape != (self.n + 1,) * self.order:
            raise EnvelopeIncomplete(
                f"envelope table shape {self.values.shape} does not cover "
                f"caps grid (0..{self.n})^{self.order}")
        if np.any(self.values < 0):
            raise ConfigInvalid("envelope.values", "must be non-negative")
        if self.inflation_z is not None and self.inflation_z < _MIN_INFLATION_Z:
            raise ConfigInvalid(
                "envelope.inflation_z",
                f"MC envelopes must inflate by at least {_MIN_INFLATION_Z} SE")

    def value(self, caps: Sequence[int]) -> float:
        """Envelope value at one cap tuple."""
        caps = tuple(int(c) for c in caps)
        if len(caps) != self.order:
            raise OrderMismatch("need one cap per index axis")
        if any(c < 0 or c > self.n for c in caps):
            raise EnvelopeIncomplete(f"caps {caps} outside tabulated grid")
        return float(self.values[caps])


def power_envelope(order: int, n: int, kappa0: float, gamma: float) -> PsiEnvelope:
    """Envelope of the power form ``kappa0 * (prod_k l_k)^(1/gamma)``."""
    if gamma <= 0:
        raise ConfigInvalid("envelope.gamma", "must be positive")
    if kappa0 < 0:
        raise ConfigInvalid("envelope.kappa0", "must be non-negative")
    axis = np.arange(n + 1, dtype=np.float64)
    values = np.ones((n + 1,) * order)
    for k in range(order):
        shape = [1] * order
        shape[k] = n + 1
        values = values * axis.reshape(shape)
    return PsiEnvelope(order=order, n=n, values=kappa0 * values ** (1.0 / gamma),
                       monotonized=True, power_gamma=float(gamma),
                       kappa0=float(kappa0))


def _class_sup_table(fclass: FunctionClass, data: DecoupledData) -> np.ndarray:
    """sup over the class of |capped decoupled symmetrized sum| at every
    cap tuple, as an array of shape ``(n+1,)**m``.

    Separable kernels reduce to products of cumulative signed factor
    sums; general kernels take cumulative sums of the full sign-weighted
    value tensor along every axis.
    """
    m, n = fclass.order, data.n
    shape = (n + 1,) * m
    best = np.zeros(shape)
    for kernel in fclass:
        if kernel.is_separable:
            total = np.zeros(shape)
            for c, factor in zip(kernel.coeffs, kernel.factors):
                term = np.asarray(c, dtype=np.float64)
                for k in range(m):
                    cum = np.concatenate(
                        [[0.0], np.cumsum(data.signs[k] * factor.fn(data.copies[k]))])
                    axes = [1] * m
                    axes[k] = n + 1
                    term = term * cum.reshape(axes)
                total += term
            table = np.abs(total)
        else:
            if (n + 1) ** m > _GENERAL_TABLE_CAP:
                raise EnumerationTooLarge(
                    f"general-kernel cap table (n+1)^m = {(n + 1) ** m} "
                    f"exceeds {_GENERAL_TABLE_CAP}")
            args = []
            sign = np.ones(1)
            for k in range(m):
                a = data.copies[k]
                axes = [1] * m
                axes[k] = n
                if kernel.arg_dim > 1:
                    args.append(a.reshape(axes + [kernel.arg_dim]))
                else:
                    args.append(a.reshape(axes))
                sign = sign * data.signs[k].reshape(axes)
            full = [np.broadcast_to(
                a, sign.shape + ((kernel.arg_dim,) if kernel.arg_dim > 1 else ()))
                for a in args]
            tensor = kernel.fn(*full) * sign
            for k in range(m):
                tensor = np.cumsum(tensor, axis=k)
            table = np.zeros(shape)
            table[(slice(1, None),) * m] = np.abs(tensor)
        best = np.maximum(best, table)
    return best


def estimate_psi(fclass: FunctionClass, law: Law, n: int, reps: int = 200,
                 inflation_z: float = 4.0, rng_seed: int = 0,
                 check_kernels: bool = True,
                 degeneracy_n_mc: int = 20000) -> PsiEnvelope:
    """Tabulate the decoupled-supremum envelope on ``{0,...,n}^m``.

    Each replicate draws ``m`` independent samples plus sign arrays and
    evaluates the class supremum at every cap tuple at once.  The
    envelope is the per-cap MC mean plus ``inflation_z`` standard
    errors, monotonized by running maxima along each axis.
    """
    if n < 1:
        raise ConfigInvalid("envelope.n", "need n >= 1")
    if reps < 2:
        raise ConfigInvalid("envelope.reps", "need at least 2 replicates for an SE")
    m = fclass.order
    if check_kernels:
        for kernel in fclass:
            report = check_degeneracy(kernel, law, claimed_order=m - 1,
                                      n_mc=degeneracy_n_mc,
                                      rng_seed=derive_seed(rng_seed, "degeneracy",
                                                           kernel.name))
            if not report.passed:
                raise DegeneracyCheckFailed(
                    f"kernel {kernel.name!r} is not completely degenerate: "
                    f"max standardized deviation {report.max_standardized:.2f}")
    shape = (n + 1,) * m
    acc = np.zeros(shape)
    acc2 = np.zeros(shape)
    for r in range(reps):
        data = draw_decoupled(law, m, n, substream(rng_seed, "envelope", r))
        table = _class_sup_table(fclass, data)
        acc += table
        acc2 += table * table
    mean = acc / reps
    var = np.maximum(acc2 / reps - mean * mean, 0.0) * (reps / (reps - 1))
    values = mean + inflation_z * np.sqrt(var / reps)
    for k in range(m):
        np.maximum.accumulate(values, axis=k, out=values)
    return PsiEnvelope(order=m, n=n, values=values, monotonized=True,
                       inflation_z=float(inflation_z), reps=int(reps))


def envelope_tail_integral(env: PsiEnvelope, weights: np.ndarray) -> float:
    """Exact value of ``int psi_hat(N(t_1), ..., N(t_m)) dt`` for one
    weight draw.

    ``N(t) = #{i : |xi_i| > t}`` equals ``l`` exactly on the interval
    between the ``(l+1)``-th and ``l``-th largest absolute weights, so
    the integral is the breakpoint sum
    ``sum_l prod_k (a_{l_k} - a_{l_k+1}) psi_hat(l)`` with ``a`` the
    absolute weights sorted decreasingly and ``a_{n+1} = 0``.
    """
    w = np.abs(np.asarray(weights, dtype=np.float64))
    if w.ndim != 1:
        raise ConfigInvalid("weights", "expected a flat weight vector")
    n = w.shape[0]
    if n > env.n:
        raise EnvelopeIncomplete(
            f"envelope tabulated to n = {env.n} but got {n} weights")
    a = np.sort(w)[::-1]
    gaps = a - np.concatenate([a[1:], [0.0]])
    out = env.values[(slice(1, n + 1),) * env.order]
    for _ in range(env.order):
        out = np.tensordot(gaps, out, axes=([0], [0]))
    return float(out)


def multiplier_bound_rhs(env: PsiEnvelope, scheme: WeightScheme, n: int,
                         reps: int = 200, rng_seed: int = 0) -> float:
    """``K_m`` times the MC mean over weight draws of the exact
    breakpoint t-integral of the envelope."""
    if n > env.n:
        raise EnvelopeIncomplete(
            f"envelope tabulated to n = {env.n} but bound requested at n = {n}")
    vals = [envelope_tail_integral(env, scheme.sample(substream(rng_seed, "rhs", r), n))
            for r in range(reps)]
    return inequality_constant(env.order) * float(np.mean(vals))


def power_envelope_bound(kappa0: float, gamma: float, scheme: WeightScheme,
                         m: int, n: int) -> float:
    """Closed-form bound ``K_m kappa0 ||xi||_{m*gamma,1}^m n^{m/gamma}``
    for the power-form envelope; requires the moment norm to be finite."""
    if gamma <= 0:
        raise ConfigInvalid("envelope.gamma", "must be positive")
    norm = require_finite_lp1(scheme, m * gamma, n=n)
    return inequality_constant(m) * kappa0 * norm**m * float(n) ** (m / gamma)


@dataclass(frozen=True)
class LhsEstimate:
    """MC estimate of the expected class supremum of the all-tuple
    weighted sum."""

    mean: float
    se: float
    reps: int


def _all_tuple_sup(fclass: FunctionClass, points: np.ndarray,
                   weights: np.ndarray) -> float:
    """sup over the class of |sum over ALL index tuples (repeats
    included) of prod_k w_{i_k} f(X_tuple)|."""
    m = fclass.order
    n = points.shape[0]
    best = 0.0
    for kernel in fclass:
        if kernel.is_separable:
            parts = [c * compensated_sum(weights * factor.fn(points)) ** m
                     for c, factor in zip(kernel.coeffs, kernel.factors)]
            val = merge_partials(parts)
        else:
            if n**m > _GENERAL_TABLE_CAP:
                raise EnumerationTooLarge(
                    f"all-tuple box n^m = {n ** m} exceeds {_GENERAL_TABLE_CAP}")
            args = []
            wprod = np.ones(1)
            for k in range(m):
                axes = [1] * m
                axes[k] = n
                if kernel.arg_dim > 1:
                    args.append(points.reshape(axes + [kernel.arg_dim]))
                else:
                    args.append(points.reshape(axes))
                wprod = wprod * weights.reshape(axes)
            full = [np.broadcast_to(
                a, wprod.shape + ((kernel.arg_dim,) if kernel.arg_dim > 1 else ()))
                for a in args]
            val = compensated_sum(kernel.fn(*full) * wprod)
        best = max(best, abs(val))
    return best


def multiplier_sup_lhs(fclass: FunctionClass, law: Law, scheme: WeightScheme,
                       n: int, reps: int = 200, rng_seed: int = 0) -> LhsEstimate:
    """MC mean and SE of the expected all-tuple class supremum.

    Each replicate draws a fresh sample and fresh weights, matching the
    unconditional expectation on the inequality's left side.
    """
    m = fclass.order
    if float(n) ** m * len(fclass) * reps > ENUMERATION_CAP:
        raise EnumerationTooLarge(
            f"n^m * |class| * reps = {float(n) ** m * len(fclass) * reps:.3g} "
            f"exceeds {ENUMERATION_CAP}")
    vals = np.empty(reps)
    for r in range(reps):
        rng = substream(rng_seed, "lhs", r)
        x = law.sample(rng, n)
        w = scheme.sample(rng, n)
        vals[r] = _all_tuple_sup(fclass, x, w)
    return LhsEstimate(mean=float(np.mean(vals)),
                       se=float(np.std(vals, ddof=1) / math.sqrt(reps)),
                       reps=reps)


@dataclass(frozen=True)
class InequalityConfig:
    """One configured experiment comparing both sides of the bound."""

    name: str
    fclass: FunctionClass
    law: Law
    scheme: WeightScheme
    n: int
    envelope_reps: int = 160
    rhs_reps: int = 160
    lhs_reps: int = 240
    inflation_z: float = 4.0
    rng_seed: int = 0
    check_kernels: bool = True
    degeneracy_n_mc: int = 20000


@dataclass(frozen=True)
class InequalityReport:
    """Both sides of the bound for one config.

    ``margin = rhs - (lhs_mean - 4 lhs_se)``; the check passes when the
    margin is non-negative, i.e. the bound holds within MC uncertainty.
    """

    config_name: str
    order: int
    n: int
    scheme_name: str
    class_size: int
    lhs_mean: float
    lhs_se: float
    k_m: float
    rhs: float
    margin: float
    passed: bool
    inflation_z: float
    envelope_reps: int

    def to_row(self) -> dict:
        return {
            "config": self.config_name,
            "order": self.order,
            "n": self.n,
            "scheme": self.scheme_name,
            "class_size": self.class_size,
            "lhs": self.lhs_mean,
            "se": self.lhs_se,
            "k_m": self.k_m,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
        }


def check_inequality(config: InequalityConfig) -> InequalityReport:
    """Estimate the envelope, both sides, and the margin for one config."""
    env = estimate_psi(config.fclass, config.law, config.n,
                       reps=config.envelope_reps,
                       inflation_z=config.inflation_z,
                       rng_seed=derive_seed(config.rng_seed, "envelope"),
                       check_kernels=config.check_kernels,
                       degeneracy_n_mc=config.degeneracy_n_mc)
    rhs = multiplier_bound_rhs(env, config.scheme, config.n,
                               reps=config.rhs_reps,
                               rng_seed=derive_seed(config.rng_seed, "rhs"))
    lhs = multiplier_sup_lhs(config.fclass, config.law, config.scheme, config.n,
                             reps=config.lhs_reps,
                             rng_seed=derive_seed(config.rng_seed, "lhs"))
    margin = rhs - (lhs.mean - 4.0 * lhs.se)
    return InequalityReport(config_name=config.name,
                            order=config.fclass.order,
                            n=config.n,
                            scheme_name=config.scheme.name,
                            class_size=len(config.fclass),
                            lhs_mean=lhs.mean,
                            lhs_se=lhs.se,
                            k_m=inequality_constant(config.fclass.order),
                            rhs=rhs,
                            margin=margin,
                            passed=bool(margin >= 0.0),
                            inflation_z=config.inflation_z,
                            envelope_reps=config.envelope_reps)


def _degenerate_class(order: int, size: int) -> FunctionClass:
    """Completely degenerate classes on Uniform01 built from centered
    orthonormal polynomial factors."""
    names = ["legendre1", "legendre2", "legendre3"][:size]
    kernels = tuple(separable_kernel((1.0,), (fname,), order,
                                     name=f"{fname}_pow{order}")
                    for fname in names)
    return FunctionClass(kernels=kernels)


def default_inequality_configs(rng_seed: int = 0) -> tuple[InequalityConfig, ...]:
    """The standard suite: m in {1,2} x n in {10,20,40} x three weight
    laws x two class sizes, 36 configs in all."""
    law = uniform01()
    schemes = (iid_gaussian(), iid_rademacher(), iid_pareto(5.0))
    configs = []
    for m in (1, 2):
        for n in (10, 20, 40):
            for scheme in schemes:
                for size in (1, 3):
                    name = f"m{m}-n{n}-{scheme.name}-k{size}"
                    configs.append(InequalityConfig(
                        name=name,
                        fclass=_degenerate_class(m, size),
                        law=law,
                        scheme=scheme,
                        n=n,
                        rng_seed=derive_seed(rng_seed, "config", name)))
    return tuple(configs)


def run_inequality_suite(configs: Sequence[InequalityConfig],
                         threads: int = 1) -> list[InequalityReport]:
    """Run every config; margins should all be non-negative."""
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(check_inequality, configs))
    return [check_inequality(c) for c in configs]


@dataclass(frozen=True)
class PermutationMomentResult:
    """Observed permutation moment against the scaled bound.

    ``fitted_c`` is the smallest constant making
    ``lhs_abs <= fitted_c * base`` an equality, where
    ``base = n^{-l} [sum (xi_i - 1)^2]^{(sum alpha)/2}``.
    """

    lhs_abs: float
    base: float
    fitted_c: float
    alpha: tuple[int, ...]
    n: int
    mode: str
    reps: Optional[int] = None
    se: Optional[float] = None


def permutation_moment_check(weights: np.ndarray, alpha: Sequence[int],
                             mode: str = "exhaustive", reps: int = 4000,
                             rng_seed: int = 0) -> PermutationMomentResult:
    """Average ``prod_i (xi_{R_i} - 1)^{alpha_i}`` over random injective
    index tuples and fit the constant of the moment bound.

    Exhaustive mode enumerates all ordered distinct tuples (the uniform
    law of the first ``l`` entries of a random permutation) and is exact;
    MC mode averages over ``reps`` random permutations.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1:
        raise ConfigInvalid("weights", "expected a flat weight vector")
    n = w.shape[0]
    if abs(compensated_sum(w) - n) > 1e-9:
        raise SumConstraintViolated(
            f"weights sum to {compensated_sum(w)!r}, expected n = {n}")
    alpha = tuple(int(a) for a in alpha)
    if not alpha or any(a < 1 for a in alpha):
        raise ConfigInvalid("alpha", "need positive integer exponents")
    l = len(alpha)
    if l > n:
        raise ConfigInvalid("alpha", f"need at most n = {n} exponents, got {l}")
    d = w - 1.0
    if mode == "exhaustive":
        if n > 8:
            raise EnumerationTooLarge(
                f"exhaustive permutation enumeration is limited to n <= 8, got {n}")
        total = math.fsum(
            math.prod(d[i] ** a for i, a in zip(idx, alpha))
            for idx in itertools.permutations(range(n), l))
        mean = total / math.perm(n, l)
        reps_used, se = None, None
    elif mode == "mc":
        rng = substream(rng_seed, "permutation-moment")
        vals = np.empty(reps)
        for r in range(reps):
            idx = rng.permutation(n)[:l]
            vals[r] = math.prod(d[i] ** a for i, a in zip(idx, alpha))
        mean = float(np.mean(vals))
        reps_used = reps
        se = float(np.std(vals, ddof=1) / math.sqrt(reps))
    else:
        raise ConfigInvalid("mode", f"expected 'exhaustive' or 'mc', got {mode!r}")
    lhs = abs(mean)
    base = float(n) ** (-l) * float(d @ d) ** (sum(alpha) / 2.0)
    if base > 0:
        fitted_c = lhs / base
    else:
        fitted_c = 0.0 if lhs == 0.0 else math.inf
    return PermutationMomentResult(lhs_abs=lhs, base=base, fitted_c=fitted_c,
                                   alpha=alpha, n=n, mode=mode,
                                   reps=reps_used, se=se)
