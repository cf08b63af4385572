"""Multiplier and bootstrap weight schemes, and L_{p,1} norms.

Two families of weights feed the resampling experiments: iid
multipliers (Gaussian, Rademacher, Pareto) and exchangeable bootstrap
weights that are non-negative and sum to n (multinomial counts,
normalized exponentials).  The L_{p,1} norm integrates the p-th root of
the |weight| tail; built-in tails are closed-form or quadrature,
everything else goes through an empirical-tail route with documented
truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

from .errors import ConfigInvalid, InfiniteMomentNorm
from .laws import Law
from .numerics import ks_statistic
from .rngutil import substream

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class WeightScheme:
    """A distribution over weight vectors of a given length.

    ``centered_unit_variance`` marks iid schemes with mean 0 and
    variance 1 (multiplier-limit eligible).  ``exchangeable_sum_n``
    marks non-negative exchangeable schemes summing to n (bootstrap
    eligible); for those ``declared_c2`` is the limit of
    n^{-1} sum (w_i - 1)^2.
    """

    name: str
    _sampler: Callable[[np.random.Generator, int], np.ndarray]
    centered_unit_variance: bool
    exchangeable_sum_n: bool
    declared_c2: Optional[float] = None
    _abs_tail: Optional[Callable[[np.ndarray], np.ndarray]] = None
    _tail_upper: Optional[float] = None
    params: Optional[dict] = None

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self._sampler(rng, n)


def iid_gaussian() -> WeightScheme:
    return WeightScheme(
        name="iid_gaussian",
        _sampler=lambda rng, n: rng.standard_normal(n),
        centered_unit_variance=True,
        exchangeable_sum_n=False,
        _abs_tail=lambda t: 2.0 * ndtr(-np.maximum(t, 0.0)),
        _tail_upper=np.inf,
    )


def iid_rademacher() -> WeightScheme:
    return WeightScheme(
        name="iid_rademacher",
        _sampler=lambda rng, n: rng.integers(0, 2, size=n) * 2.0 - 1.0,
        centered_unit_variance=True,
        exchangeable_sum_n=False,
        _abs_tail=lambda t: (np.maximum(t, 0.0) < 1.0).astype(np.float64),
        _tail_upper=1.0,
    )


def iid_pareto(alpha: float) -> WeightScheme:
    """Classical Pareto on [1, inf) with tail t^(-alpha); included to
    exercise the moment-norm boundary, so it is neither centered nor
    bootstrap eligible."""
    if alpha <= 0:
        raise ConfigInvalid("scheme.alpha", "must be positive")

    def tail(t):
        t = np.maximum(np.asarray(t, dtype=np.float64), 0.0)
        return np.where(t < 1.0, 1.0, t**-alpha)

    return WeightScheme(
        name=f"iid_pareto({alpha:g})",
        _sampler=lambda rng, n: rng.pareto(alpha, size=n) + 1.0,
        centered_unit_variance=False,
        exchangeable_sum_n=False,
        _abs_tail=tail,
        _tail_upper=np.inf,
        params={"alpha": alpha},
    )


def efron_multinomial() -> WeightScheme:
    return WeightScheme(
        name="efron_multinomial",
        _sampler=lambda rng, n: rng.multinomial(n, np.full(n, 1.0 / n)).astype(np.float64),
        centered_unit_variance=False,
        exchangeable_sum_n=True,
        declared_c2=1.0,
    )


def bayesian_bootstrap() -> WeightScheme:
    def sampler(rng, n):
        y = rng.standard_exponential(n)
        return y / y.mean()

    return WeightScheme(
        name="bayesian_bootstrap",
        _sampler=sampler,
        centered_unit_variance=False,
        exchangeable_sum_n=True,
        declared_c2=1.0,
    )


_SCHEME_BUILDERS = {
    "iid_gaussian": iid_gaussian,
    "iid_rademacher": iid_rademacher,
    "iid_pareto": iid_pareto,
    "efron_multinomial": efron_multinomial,
    "bayesian_bootstrap": bayesian_bootstrap,
}


def scheme_from_config(table: dict) -> WeightScheme:
    name = table.get("name")
    if name not in _SCHEME_BUILDERS:
        raise ConfigInvalid("scheme.name", f"unknown scheme {name!r}; "
                            f"choose from {sorted(_SCHEME_BUILDERS)}")
    kwargs = {k: v for k, v in table.items() if k != "name"}
    try:
        return _SCHEME_BUILDERS[name](**kwargs)
    except TypeError as exc:
        raise ConfigInvalid("scheme", str(exc)) from exc


def builtin_scheme_names() -> list[str]:
    return sorted(_SCHEME_BUILDERS)


def gen_weights(scheme: WeightScheme, n: int, rng_seed: int) -> np.ndarray:
    """One weight vector from a derived stream."""
    return scheme.sample(substream(rng_seed, "weights", scheme.name, n), n)


@dataclass(frozen=True)
class C2Estimate:
    mean: float
    se: float
    reps: int
    n: int


def estimate_c2(scheme: WeightScheme, n: int, reps: int = 200,
                rng_seed: int = 0) -> C2Estimate:
    """Monte Carlo estimate of E[n^{-1} sum (w_i - 1)^2]."""
    vals = np.empty(reps)
    for r in range(reps):
        w = scheme.sample(substream(rng_seed, "c2", r), n)
        vals[r] = np.mean((w - 1.0) ** 2)
    return C2Estimate(mean=float(vals.mean()),
                      se=float(vals.std(ddof=1) / math.sqrt(reps)),
                      reps=reps, n=n)


@dataclass(frozen=True)
class WeightTrendRow:
    n: int
    max_sq_over_n: float
    c2_mean: float
    c2_se: float


@dataclass(frozen=True)
class WeightValidation:
    """Exact bootstrap-eligibility checks plus the variance trend.

    ``w1_pass`` requires every draw non-negative with sum n within
    1e-9 relative.  Exchangeability holds by construction for the
    builtin schemes; ``swap_ks`` reports the coordinate-swap KS
    distance as an empirical witness.
    """

    scheme: str
    w1_pass: bool
    min_weight: float
    worst_sum_gap: float
    swap_ks: float
    trend: tuple[WeightTrendRow, ...]


def validate_W(scheme: WeightScheme, n: int, reps: int = 200,
               rng_seed: int = 0) -> WeightValidation:
    min_w = np.inf
    worst_gap = 0.0
    first = np.empty(reps)
    second = np.empty(reps)
    for r in range(reps):
        w = scheme.sample(substream(rng_seed, "w1", r), n)
        min_w = min(min_w, float(w.min()))
        worst_gap = max(worst_gap, abs(float(w.sum()) - n) / n)
        first[r], second[r] = w[0], w[1]
    w1 = bool(min_w >= 0.0 and worst_gap <= _SUM_TOL)
    trend = []
    for nn in sorted({max(n // 4, 2), max(n // 2, 2), n}):
        maxes = np.empty(reps)
        c2 = np.empty(reps)
        for r in range(reps):
            w = scheme.sample(substream(rng_seed, "trend", nn, r), nn)
            maxes[r] = np.max((w - 1.0) ** 2) / nn
            c2[r] = np.mean((w - 1.0) ** 2)
        trend.append(WeightTrendRow(n=nn, max_sq_over_n=float(maxes.mean()),
                                    c2_mean=float(c2.mean()),
                                    c2_se=float(c2.std(ddof=1) / math.sqrt(reps))))
    return WeightValidation(scheme=scheme.name, w1_pass=w1,
                            min_weight=float(min_w), worst_sum_gap=float(worst_gap),
                            swap_ks=float(ks_statistic(first, second)),
                            trend=tuple(trend))


@dataclass(frozen=True)
class Lp1Result:
    """An L_{p,1} norm with route and error information."""

    p: float
    value: float
    error_estimate: float
    finite: bool
    route: str


def _empirical_tail_integral(draws: np.ndarray, p: float,
                             trunc_quantile: float) -> tuple[float, float]:
    a = np.sort(np.abs(draws))[::-1]
    n = a.size
    steps = a - np.concatenate([a[1:], [0.0]])
    weights = ((np.arange(1, n + 1)) / n) ** (1.0 / p)
    full = float(np.dot(weights, steps))
    k = max(int(math.ceil(n * (1.0 - trunc_quantile))), 1)
    dropped = float(np.dot(weights[:k - 1], steps[:k - 1])) if k > 1 else 0.0
    return full - dropped, dropped


def lp1_norm(dist, p: float, *, n: Optional[int] = None,
             mc_draws: int = 10**6, trunc_quantile: float = 1.0 - 1e-5,
             rng_seed: int = 0) -> Lp1Result:
    """L_{p,1} norm of |X|: the integral over t of P(|X| > t)^(1/p).

    ``dist`` is a :class:`Law` or a :class:`WeightScheme` (whose
    marginal is used; schemes without an analytic tail need ``n`` to
    draw marginals).  Pareto tails are classified before integrating:
    the norm is finite exactly when the tail exponent exceeds p, and a
    divergent norm returns ``value = inf`` with ``finite = False``.
    """
    if p <= 0:
        raise ConfigInvalid("p", "must be positive")
    if isinstance(dist, WeightScheme):
        if dist.params and "alpha" in dist.params:
            alpha = dist.params["alpha"]
            if alpha <= p:
                return Lp1Result(p=p, value=math.inf, error_estimate=0.0,
                                 finite=False, route="pareto_closed_form")
            return Lp1Result(p=p, value=1.0 + p / (alpha - p), error_estimate=0.0,
                             finite=True, route="pareto_closed_form")
        if dist._abs_tail is not None:
            return _tail_quadrature(dist._abs_tail, dist._tail_upper, p)
        if n is None:
            raise ConfigInvalid("n", f"scheme {dist.name} needs n for its marginal")
        rng = substream(rng_seed, "lp1", dist.name, n)
        cols = max(1, mc_draws // n)
        draws = np.concatenate([dist.sample(rng, n) for _ in range(cols)])
        value, dropped = _empirical_tail_integral(draws, p, trunc_quantile)
        return Lp1Result(p=p, value=value, error_estimate=dropped, finite=True,
                         route="empirical_tail")
    if isinstance(dist, Law):
        if dist.kind == "finite":
            pts = np.abs(dist.params["points"])
            order = np.argsort(pts)[::-1]
            a = np.concatenate([pts[order], [0.0]])
            pr = dist.params["probs"][order]
            cum = np.cumsum(pr)
            value = float(np.dot(cum ** (1.0 / p), a[:-1] - a[1:]))
            return Lp1Result(p=p, value=value, error_estimate=0.0, finite=True,
                             route="finite_exact")
        if dist.has_abs_tail:
            return _tail_quadrature(dist.abs_tail, np.inf if dist.kind == "normal" else 1.0, p)
        rng = substream(rng_seed, "lp1", dist.kind)
        draws = dist.sample(rng, mc_draws)
        value, dropped = _empirical_tail_integral(draws, p, trunc_quantile)
        return Lp1Result(p=p, value=value, error_estimate=dropped, finite=True,
                         route="empirical_tail")
    raise ConfigInvalid("dist", "need a Law or WeightScheme")


def _tail_quadrature(tail: Callable, upper: float, p: float) -> Lp1Result:
    value, abserr = quad(lambda t: tail(t) ** (1.0 / p), 0.0, upper, limit=200)
    return Lp1Result(p=p, value=float(value), error_estimate=float(abserr),
                     finite=True, route="tail_quadrature")


def require_finite_lp1(scheme: WeightScheme, p: float, n: Optional[int] = None) -> float:
    """L_{p,1} norm of the scheme marginal, raising when divergent."""
    res = lp1_norm(scheme, p, n=n)
    if not res.finite:
        raise InfiniteMomentNorm(
            f"{scheme.name} has divergent L_({p:g},1) norm")
    return res.value
