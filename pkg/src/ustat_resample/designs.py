"""Sampling designs and inverse-inclusion-probability weighting.

A design draws 0/1 inclusion indicators for a finite population with
known first-order inclusion probabilities ``pi_i >= pi_floor > 0``.
Dividing each indicator by its inclusion probability gives weights whose
products are design-unbiased over distinct index tuples for independent
designs, which turns any U-statistic, M-estimator, or empirical risk
into its observed-units-only counterpart.

Four designs are built in: Bernoulli sampling, Poisson sampling with
unequal probabilities driven by an auxiliary variable through a floored
logistic map, simple random sampling without replacement, and stratified
without-replacement sampling.  Without-replacement designs have
dependent indicators and a known O(1/N) bias for pair statistics, which
the bias experiment measures against the exact second-order inclusion
probabilities.

The module also hosts two experiment drivers: a linearization check
comparing ``sqrt(N)(theta_hat - theta0)`` against the weighted empirical
process of the influence function, and an excess-risk study of
empirical risk minimization over a finite kernel class under a design.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import Normalization, multiplier_ustat, ustat
from .errors import (ConfigInvalid, DesignInvalid, DimensionMismatch,
                     MissingAnalyticFields, SampleTooSmall)
from .kernels import Kernel, general_kernel
from .laws import Law, _legendre_rule
from .mestimation import MCriterion, fit_m_estimator, GridRefine
from .rngutil import substream

__all__ = [
    "Design", "DesignDraw", "bernoulli_design", "poisson_unequal_design",
    "srswor_design", "stratified_design", "draw_design", "ht_ustat",
    "ht_m_estimator", "ht_bias_curve", "BiasPoint", "linearization_check",
    "LinearizationReport", "ErmProblem", "threshold_ranking_problem",
    "ranking_risk", "monotone_ranking_law", "erm_experiment", "ErmReport",
    "validate_design", "DesignValidation", "load_population",
    "design_from_config", "builtin_design_names", "full_sample_draw",
]


# ---------------------------------------------------------------------------
# designs and draws


@dataclass(frozen=True)
class DesignDraw:
    """One realized set of inclusion indicators with its probabilities.

    ``independent`` marks designs whose indicators are independent, so
    pair inclusion factorizes; ``pair_inclusion`` carries the constant
    second-order probability of without-replacement designs when one
    exists.
    """

    xi: np.ndarray
    pi: np.ndarray
    pi_floor: float
    independent: bool
    pair_inclusion: Optional[float] = None

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=np.float64)
        pi = np.asarray(self.pi, dtype=np.float64)
        if xi.shape != pi.shape or xi.ndim != 1:
            raise DesignInvalid("indicators and probabilities must align")
        if not np.all((xi == 0.0) | (xi == 1.0)):
            raise DesignInvalid("indicators must be 0 or 1")
        if np.any(pi <= 0.0) or np.any(pi > 1.0):
            raise DesignInvalid("inclusion probabilities must lie in (0, 1]")
        if pi.min() < self.pi_floor - 1e-12:
            raise DesignInvalid(
                f"inclusion probability {pi.min():.6g} falls below the "
                f"declared floor {self.pi_floor:.6g}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "pi", pi)

    @property
    def n_population(self) -> int:
        return self.xi.shape[0]

    @property
    def ht_weights(self) -> np.ndarray:
        """Inverse-inclusion-probability weights, zero off-sample."""
        return self.xi / self.pi


@dataclass(frozen=True)
class Design:
    """A sampling design: named parameters plus a draw rule.

    ``needs_z`` designs require one auxiliary value per population unit.
    """

    name: str
    pi_floor: float
    needs_z: bool
    _draw: Callable[[np.random.Generator, int, Optional[np.ndarray]], DesignDraw]
    params: dict = field(default_factory=dict)


def bernoulli_design(p: float) -> Design:
    """Independent inclusion with probability ``p`` for every unit."""
    if not 0.0 < p <= 1.0:
        raise DesignInvalid("bernoulli probability must lie in (0, 1]")

    def draw(rng, N, z):
        xi = (rng.random(N) < p).astype(np.float64)
        pi = np.full(N, p)
        return DesignDraw(xi=xi, pi=pi, pi_floor=p, independent=True,
                          pair_inclusion=None if N < 2 else p * p)

    return Design(name=f"bernoulli({p:g})", pi_floor=p, needs_z=False,
                  _draw=draw, params={"p": p})


def poisson_unequal_design(pi0: float) -> Design:
    """Independent inclusion with unit-specific probabilities
    ``pi_i = clamp(pi0 + (1 - pi0) * logistic(z_i), pi0, 1)``."""
    if not 0.0 < pi0 < 1.0:
        raise DesignInvalid("probability floor must lie in (0, 1)")

    def draw(rng, N, z):
        if z is None:
            raise DesignInvalid("unequal-probability sampling needs auxiliary z")
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (N,):
            raise DesignInvalid(f"need {N} auxiliary values, got {z.shape}")
        pi = np.clip(pi0 + (1.0 - pi0) / (1.0 + np.exp(-z)), pi0, 1.0)
        xi = (rng.random(N) < pi).astype(np.float64)
        return DesignDraw(xi=xi, pi=pi, pi_floor=pi0, independent=True)

    return Design(name=f"poisson_unequal({pi0:g})", pi_floor=pi0, needs_z=True,
                  _draw=draw, params={"pi0": pi0})


def srswor_design(n_of_N: int) -> Design:
    """Simple random sample of exactly ``n_of_N`` units without
    replacement; pair inclusion is ``n(n-1)/(N(N-1))``."""
    if n_of_N < 1:
        raise DesignInvalid("sample size must be positive")

    def draw(rng, N, z):
        if n_of_N > N:
            raise DesignInvalid(f"cannot draw {n_of_N} of {N} units")
        xi = np.zeros(N)
        xi[rng.choice(N, size=n_of_N, replace=False)] = 1.0
        pi = np.full(N, n_of_N / N)
        pair = None if N < 2 else \
            n_of_N * (n_of_N - 1) / (N * (N - 1))
        return DesignDraw(xi=xi, pi=pi, pi_floor=n_of_N / N,
                          independent=False, pair_inclusion=pair)

    return Design(name=f"srswor({n_of_N})", pi_floor=0.0, needs_z=False,
                  _draw=draw, params={"n_of_N": n_of_N})


def stratified_design(z_bounds: Sequence[float],
                      sizes: Sequence[int]) -> Design:
    """Independent without-replacement samples of the given sizes from
    strata cut on the auxiliary variable at ``z_bounds``."""
    bounds = tuple(float(b) for b in z_bounds)
    sizes = tuple(int(s) for s in sizes)
    if sorted(bounds) != list(bounds):
        raise DesignInvalid("stratum bounds must be sorted")
    if len(sizes) != len(bounds) + 1 or any(s < 1 for s in sizes):
        raise DesignInvalid("need one positive sample size per stratum")

    def draw(rng, N, z):
        if z is None:
            raise DesignInvalid("stratified sampling needs auxiliary z")
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (N,):
            raise DesignInvalid(f"need {N} auxiliary values, got {z.shape}")
        stratum = np.digitize(z, bounds)
        xi = np.zeros(N)
        pi = np.empty(N)
        for h, n_h in enumerate(sizes):
            members = np.flatnonzero(stratum == h)
            if members.size < n_h:
                raise DesignInvalid(
                    f"stratum {h} has {members.size} units, needs {n_h}")
            xi[rng.choice(members, size=n_h, replace=False)] = 1.0
            pi[members] = n_h / members.size
        return DesignDraw(xi=xi, pi=pi, pi_floor=float(pi.min()),
                          independent=False)

    return Design(name=f"stratified({len(sizes)})", pi_floor=0.0, needs_z=True,
                  _draw=draw, params={"z_bounds": bounds, "sizes": sizes})


def draw_design(design: Design, N: int, z=None,
                rng: Optional[np.random.Generator] = None) -> DesignDraw:
    """Realize inclusion indicators for a population of ``N`` units."""
    if N < 1:
        raise DesignInvalid("population size must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    return design._draw(rng, N, z)


def full_sample_draw(N: int) -> DesignDraw:
    """The census draw: every unit observed with probability one."""
    return DesignDraw(xi=np.ones(N), pi=np.ones(N), pi_floor=1.0,
                      independent=True, pair_inclusion=1.0)


# ---------------------------------------------------------------------------
# weighted statistics


def ht_ustat(points: np.ndarray, draw: DesignDraw, kernel: Kernel) -> float:
    """Inverse-probability-weighted U-statistic over the population:
    ``(1 / (m! C(N, m))) sum over distinct ordered tuples of
    prod(xi/pi) f``; terms with any unobserved unit vanish."""
    pts = np.asarray(points, dtype=np.float64)
    N = pts.shape[0]
    if N != draw.n_population:
        raise DimensionMismatch("population and draw sizes differ")
    m = kernel.order
    if N < m:
        raise SampleTooSmall(f"need at least {m} units, got {N}")
    raw = multiplier_ustat(pts, draw.ht_weights, kernel,
                           normalization=Normalization.DISTINCT_TUPLE_SUM).value
    return raw / (math.factorial(m) * math.comb(N, m))


def ht_m_estimator(problem: MCriterion, points: np.ndarray, draw: DesignDraw,
                   optimizer=None) -> np.ndarray:
    """Fit the criterion with inverse-inclusion-probability weights."""
    if np.asarray(points).shape[0] != draw.n_population:
        raise DimensionMismatch("population and draw sizes differ")
    return fit_m_estimator(problem, points, weights=draw.ht_weights,
                           optimizer=optimizer)


@dataclass(frozen=True)
class BiasPoint:
    """Design bias of the weighted pair statistic at one population
    size, measured against the full-sample value."""

    N: int
    full_value: float
    mc_mean: float
    mc_se: float
    draws: int
    exact_bias: Optional[float]

    @property
    def bias(self) -> float:
        return self.mc_mean - self.full_value


def _level1_values(points: np.ndarray, kernel: Kernel) -> np.ndarray:
    """Leave-one-out averages ``(1/(N-1)) sum_{j != i} f(x_i, x_j)``."""
    pts = np.asarray(points, dtype=np.float64)
    N = pts.shape[0]
    rows = np.empty(N)
    for i in range(N):
        others = np.delete(np.arange(N), i)
        pairs = np.column_stack([np.full(N - 1, i), others])
        rows[i] = kernel.eval_tuples(pts, pairs).mean()
    return rows


def ht_bias_curve(kernel: Kernel, law: Law, designs: Sequence[tuple[int, Design]],
                  draws: int = 10000, rng_seed: int = 0,
                  control_variate: bool = True) -> list[BiasPoint]:
    """Monte Carlo design bias of the weighted pair U-statistic on one
    frozen sample per population size.

    The control variate subtracts ``m (P_N^pi - P_N)`` of the empirical
    leave-one-out kernel average, which has exact zero design
    expectation and removes the dominant first-order design noise, so
    the O(1/N) without-replacement bias resolves with few draws.  For
    designs with a constant pair-inclusion probability the exact bias
    ``full_value * (N pi_pair / (m-th order factor) - 1)`` is attached.
    """
    if kernel.order != 2:
        raise ConfigInvalid("kernel", "the bias experiment is a pair study")
    out = []
    for N, design in designs:
        pts = np.asarray(law.sample(substream(rng_seed, "population", N), N))
        full = ustat(pts, kernel,
                     normalization=Normalization.DISTINCT_TUPLE_SUM).value \
            / (2 * math.comb(N, 2))
        lvl1 = _level1_values(pts, kernel) if control_variate else None
        vals = np.empty(draws)
        for r in range(draws):
            rng = substream(rng_seed, "draw", N, r)
            d = draw_design(design, N, z=None if not design.needs_z
                            else pts.reshape(N, -1)[:, 0], rng=rng)
            t = ht_ustat(pts, d, kernel)
            if control_variate:
                t -= 2.0 * float(((d.ht_weights - 1.0) * lvl1).mean())
            vals[r] = t
        probe = draw_design(design, N, z=None if not design.needs_z
                            else pts.reshape(N, -1)[:, 0],
                            rng=substream(rng_seed, "probe", N))
        exact = None
        if probe.pair_inclusion is not None and not probe.independent:
            ratio = probe.pair_inclusion / float(probe.pi[0] * probe.pi[1])
            exact = full * (ratio - 1.0)
        elif probe.independent:
            exact = 0.0
        out.append(BiasPoint(N=N, full_value=full, mc_mean=float(vals.mean()),
                             mc_se=float(vals.std(ddof=1) / math.sqrt(draws)),
                             draws=draws, exact_bias=exact))
    return out


# ---------------------------------------------------------------------------
# linearization of weighted M-estimators


@dataclass(frozen=True)
class LinearizationReport:
    """Root-mean-square of ``sqrt(N)(theta_hat - theta0) -
    m V^{-1} G_N(influence)`` per population size, where ``G_N`` is the
    weighted centered empirical process ``sqrt(N)(P_N^pi - P)``."""

    problem_name: str
    design_name: str
    n_values: tuple[int, ...]
    residual_rms: tuple[float, ...]
    mc_reps: int
    rng_seed: int


def linearization_check(problem: MCriterion, law: Law, design: Design,
                        N_list: Sequence[int], mc_reps: int = 200,
                        rng_seed: int = 0, optimizer=None,
                        threads: int = 1) -> LinearizationReport:
    """Measure how fast the weighted M-estimator approaches its linear
    expansion in the weighted empirical process of the influence
    function."""
    if problem.theta0 is None or problem.hessian_v is None \
            or problem.influence is None:
        raise MissingAnalyticFields(
            "linearization needs theta0, hessian_v, and influence")
    theta0 = np.asarray(problem.theta0, dtype=np.float64)
    v_inv = np.linalg.inv(np.asarray(problem.hessian_v, dtype=np.float64))
    if optimizer is None:
        optimizer = GridRefine(levels=6, points_per_axis=21)

    def rms_for(N: int) -> float:
        def one(r):
            rng = substream(rng_seed, "linearize", N, r)
            x = np.asarray(law.sample(rng, N))
            z = x.reshape(N, -1)[:, 0] if design.needs_z else None
            d = draw_design(design, N, z=z, rng=rng)
            theta = fit_m_estimator(problem, x, weights=d.ht_weights,
                                    optimizer=optimizer)
            infl = np.asarray(problem.influence(x), dtype=np.float64)
            infl = infl.reshape(N, -1)
            g = math.sqrt(N) * (d.ht_weights[:, None] * infl).mean(axis=0)
            resid = math.sqrt(N) * (theta - theta0) \
                - problem.order * (v_inv @ g)
            return float(resid @ resid)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                sq = list(pool.map(one, range(mc_reps)))
        else:
            sq = [one(r) for r in range(mc_reps)]
        return math.sqrt(float(np.mean(sq)))

    rms = tuple(rms_for(int(N)) for N in N_list)
    return LinearizationReport(problem_name=problem.name,
                               design_name=design.name,
                               n_values=tuple(int(N) for N in N_list),
                               residual_rms=rms, mc_reps=mc_reps,
                               rng_seed=rng_seed)


# ---------------------------------------------------------------------------
# empirical risk minimization over a finite class


@dataclass(frozen=True)
class ErmProblem:
    """A finite kernel class with an exact excess-risk oracle.

    ``criterion_batch(points, weights)`` returns the weighted
    distinct-pair empirical risk of every class member at once;
    ``kernels`` optionally carries the members as plain kernels for
    slow cross-checks.
    """

    name: str
    order: int
    labels: tuple[str, ...]
    excess_risk: tuple[float, ...]
    criterion_batch: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kernels: Optional[tuple[Kernel, ...]] = None

    def __post_init__(self):
        if len(self.labels) != len(self.excess_risk) or not self.labels:
            raise ConfigInvalid("erm.labels", "need one label per class member")
        if any(e < -1e-12 for e in self.excess_risk):
            raise ConfigInvalid("erm.excess_risk", "must be non-negative")

    def __len__(self) -> int:
        return len(self.labels)


def ranking_risk(t: float) -> float:
    """Population pairwise ranking risk of the threshold rule
    ``1{x >= t}`` when x is uniform on [0, 1] and P(y=1 | x) = x, with
    discordant pairs costing 1 and unordered mixed pairs costing 1/2."""
    return (t**2 * (1.0 - t)**2 / 2.0
            + (1.0 - t**2) * (1.0 - t)**2 / 4.0
            + t**3 * (2.0 - t) / 4.0)


def _ranking_loss_kernel(t: float) -> Kernel:
    def fn(a, b):
        xa, ya = a[..., 0], a[..., 1]
        xb, yb = b[..., 0], b[..., 1]
        ra = (xa >= t).astype(np.float64)
        rb = (xb >= t).astype(np.float64)
        discordant = ((ya - yb) * (ra - rb) < 0).astype(np.float64)
        tied = ((ra == rb) & (ya != yb)).astype(np.float64)
        return discordant + 0.5 * tied

    return general_kernel(2, fn, name=f"ranking_loss({t:g})", arg_dim=2)


def threshold_ranking_problem(thresholds: Sequence[float] = tuple(
        np.round(np.linspace(0.05, 0.95, 19), 10)),
        baseline_risk: Optional[float] = None,
        with_kernels: bool = False) -> ErmProblem:
    """Pairwise ranking by threshold rules on the monotone uniform law.

    Risks come from the closed form; the excess is measured against the
    best risk in the class (or ``baseline_risk`` when given, e.g. to
    embed a singleton subclass in the full problem's scale).
    """
    ts = tuple(float(t) for t in thresholds)
    if not ts:
        raise ConfigInvalid("erm.thresholds", "need at least one threshold")
    risks = np.array([ranking_risk(t) for t in ts])
    base = float(risks.min()) if baseline_risk is None else float(baseline_risk)
    excess = tuple(float(r - base) for r in risks)

    def criterion_batch(points, weights):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DimensionMismatch("ranking observations are (x, y) rows")
        u = np.asarray(weights, dtype=np.float64)
        N = pts.shape[0]
        order = np.argsort(pts[:, 0], kind="stable")
        xs = pts[order, 0]
        ys = pts[order, 1]
        us = u[order]
        pref0 = np.concatenate([[0.0], np.cumsum(us * (ys == 0.0))])
        pref1 = np.concatenate([[0.0], np.cumsum(us * (ys == 1.0))])
        cut = np.searchsorted(xs, np.asarray(ts), side="left")
        s00, s01 = pref0[cut], pref1[cut]
        s10, s11 = pref0[-1] - s00, pref1[-1] - s01
        raw = 2.0 * s10 * s01 + s00 * s01 + s10 * s11
        return raw / (N * (N - 1))

    kernels = tuple(_ranking_loss_kernel(t) for t in ts) if with_kernels else None
    return ErmProblem(name="threshold_ranking", order=2,
                      labels=tuple(f"t={t:g}" for t in ts),
                      excess_risk=excess, criterion_batch=criterion_batch,
                      kernels=kernels)


def monotone_ranking_law() -> Law:
    """Joint law of (x, y) with x uniform on [0, 1] and
    P(y = 1 | x) = x; rows are (x, y) pairs."""

    def sampler(rng, n):
        x = rng.random(n)
        y = (rng.random(n) < x).astype(np.float64)
        return np.column_stack([x, y])

    def expect(fn):
        x, w = _legendre_rule(64)
        zero = fn(np.column_stack([x, np.zeros_like(x)]))
        one = fn(np.column_stack([x, np.ones_like(x)]))
        return float(np.dot(w, (1.0 - x) * zero + x * one))

    def quantile(u):
        u = np.atleast_2d(u)
        x = u[:, 0]
        y = (u[:, 1] < x).astype(np.float64)
        return np.column_stack([x, y])

    return Law(kind="ranking_monotone_uniform", dim=2, _sampler=sampler,
               _expect=expect, _quantile=quantile)


@dataclass(frozen=True)
class ErmReport:
    """Excess risk of the weighted empirical risk minimizer per
    population size; ``excess[i, r]`` is replicate ``r`` at
    ``n_values[i]``."""

    problem_name: str
    design_name: str
    n_values: tuple[int, ...]
    medians: tuple[float, ...]
    excess: np.ndarray
    mc_reps: int
    rng_seed: int


def erm_experiment(problem: ErmProblem, design: Design,
                   N_list: Sequence[int], mc_reps: int = 200,
                   rng_seed: int = 0, law: Optional[Law] = None,
                   threads: int = 1) -> ErmReport:
    """Excess risk of the exact weighted argmin over the finite class,
    replicated over fresh populations and design draws."""
    if law is None:
        law = monotone_ranking_law()
    n_values = tuple(int(N) for N in N_list)
    excess = np.empty((len(n_values), mc_reps))

    def one(args):
        row, N, r = args
        rng = substream(rng_seed, "erm", N, r)
        pts = np.asarray(law.sample(rng, N))
        z = pts.reshape(N, -1)[:, 0] if design.needs_z else None
        d = draw_design(design, N, z=z, rng=rng)
        crits = problem.criterion_batch(pts, d.ht_weights)
        return row, r, problem.excess_risk[int(np.argmin(crits))]

    jobs = [(row, N, r) for row, N in enumerate(n_values)
            for r in range(mc_reps)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    for row, r, e in results:
        excess[row, r] = e
    medians = tuple(float(np.median(excess[row])) for row in range(len(n_values)))
    return ErmReport(problem_name=problem.name, design_name=design.name,
                     n_values=n_values, medians=medians, excess=excess,
                     mc_reps=mc_reps, rng_seed=rng_seed)


# ---------------------------------------------------------------------------
# design validation and population ingestion


@dataclass(frozen=True)
class DesignValidation:
    """Floor check plus the spread of the weighted-mean residual
    ``N^{-1} sum(xi_i/pi_i - 1)``, which must shrink with N for the
    design to support weighted limit theory."""

    design_name: str
    n_values: tuple[int, ...]
    pi_floor_ok: bool
    min_pi: float
    lln_sd: tuple[float, ...]
    mc_reps: int
    rng_seed: int


def validate_design(design: Design, N_list: Sequence[int], mc_reps: int = 400,
                    rng_seed: int = 0) -> DesignValidation:
    """Check the probability floor exactly and measure the Monte Carlo
    SD of the weighted-mean residual at each population size."""
    n_values = tuple(int(N) for N in N_list)
    sds = []
    min_pi = 1.0
    for N in n_values:
        vals = np.empty(mc_reps)
        for r in range(mc_reps):
            rng = substream(rng_seed, "validate", N, r)
            z = rng.standard_normal(N) if design.needs_z else None
            d = draw_design(design, N, z=z, rng=rng)
            min_pi = min(min_pi, float(d.pi.min()))
            vals[r] = float((d.ht_weights - 1.0).mean())
        sds.append(float(vals.std(ddof=1)))
    return DesignValidation(design_name=design.name, n_values=n_values,
                            pi_floor_ok=min_pi >= design.pi_floor - 1e-12,
                            min_pi=min_pi, lln_sd=tuple(sds),
                            mc_reps=mc_reps, rng_seed=rng_seed)


def design_from_config(table: dict) -> Design:
    """Build a design from a config table ``{kind: ..., <params>}``."""
    kind = table.get("kind")
    try:
        if kind == "bernoulli":
            return bernoulli_design(float(table["p"]))
        if kind == "poisson_unequal":
            return poisson_unequal_design(float(table["pi0"]))
        if kind == "srswor":
            return srswor_design(int(table["n_of_N"]))
        if kind == "stratified":
            return stratified_design(table["z_bounds"], table["sizes"])
    except KeyError as exc:
        raise ConfigInvalid("design", f"missing field {exc.args[0]!r}") from exc
    raise ConfigInvalid(
        "design.kind", f"unknown design {kind!r}; choose from "
        "['bernoulli', 'poisson_unequal', 'srswor', 'stratified']")


def builtin_design_names() -> list[str]:
    return ["bernoulli", "poisson_unequal", "srswor", "stratified"]


def load_population(path) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Read a population CSV with observation columns ``x`` or
    ``x1..xk`` and an optional auxiliary column ``z``.

    Returns the observations (1-d for a single x column) and the
    auxiliary vector or None.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigInvalid("population", f"{path} has no header row")
        names = [c.strip() for c in reader.fieldnames]
        x_cols = [c for c in names if c == "x" or
                  (c.startswith("x") and c[1:].isdigit())]
        if not x_cols:
            raise ConfigInvalid("population",
                                "need an 'x' column or 'x1..xk' columns")
        x_cols.sort(key=lambda c: 0 if c == "x" else int(c[1:]))
        has_z = "z" in names
        rows, zs = [], []
        for rec in reader:
            rows.append([float(rec[c]) for c in x_cols])
            if has_z:
                zs.append(float(rec["z"]))
    pts = np.asarray(rows, dtype=np.float64)
    if pts.shape[0] == 0:
        raise ConfigInvalid("population", f"{path} has no data rows")
    if pts.shape[1] == 1:
        pts = pts[:, 0]
    return pts, (np.asarray(zs) if has_z else None)
