"""M-estimation by maximizing (weighted) U-statistic criteria.

A criterion is a family ``theta -> f_theta`` of symmetric kernels; the
estimator maximizes the distinct-tuple weighted sum
``sum_{i_1 != ... != i_m} w_{i_1} ... w_{i_m} f_theta(X_tuple)`` over a
search region.  Unit weights give the plain M-estimator, bootstrap
weights give the resampled one.  Criterion values are reported up to a
fixed positive order-dependent scale, which leaves maximizers unchanged.

Two concrete criteria are provided: the quadratic pairwise-mean
criterion ``f_theta(x1, x2) = -(theta - (x1 + x2)/2)^2`` (closed-form
maximizer, used as an oracle) and the planar simplicial depth criterion
``f_theta(x1, x2, x3) = 1{theta inside the open triangle}``.

Weighted simplicial depth supports two algorithms.  The brute evaluator
tests every triple by orientation signs.  The sweep evaluator sorts the
points by angle around ``theta`` and counts the complement (triples
inside an open half-plane through ``theta``) with running power sums of
the weights over a rotating half-plane window, an O(n log n) pass that
performs the same strict sign decisions as the brute test.  Boundary
geometry (``theta`` on a data point, or collinear with two data points)
is refused as :class:`DegeneratePosition` by the public depth API; the
optimizer resolves exact zero orientations by strict exclusion, which is
the open-triangle convention, and refuses only ambiguous near-zero
orientations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import _iter_combination_chunks
from .errors import (ConfigInvalid, DegeneratePosition, OptimizerBoundsMissing,
                     SampleTooSmall)
from .kernels import Kernel, general_kernel, simplicial_indicator
from .laws import Law
from .numerics import ks_statistic
from .rngutil import derive_seed, substream
from .weights import WeightScheme, estimate_c2

_ORIENTATION_TOL = 1e-12


# ---------------------------------------------------------------------------
# weighted simplicial depth


def _as_planar(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigInvalid("points", "simplicial depth needs an (n, 2) array")
    return pts


def _depth_weights(weights, n: int) -> np.ndarray:
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ConfigInvalid("weights", f"expected {n} weights, got shape {w.shape}")
    return w


def _e3_from_power_sums(w: np.ndarray) -> float:
    p1 = float(w.sum())
    p2 = float((w * w).sum())
    p3 = float((w**3).sum())
    return (p1**3 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0


def _depth_brute_one(pts: np.ndarray, theta: np.ndarray, w: np.ndarray,
                     strict: bool) -> float:
    """Orientation-sign triple count around one query point.

    ``strict`` refuses every boundary tie.  Otherwise orientations
    within tolerance of zero get sign 0 and the triple is excluded, the
    open-triangle convention for a query on a data point or on a line
    through two data points.
    """
    n = pts.shape[0]
    d = pts - theta
    r2 = (d * d).sum(axis=1)
    if strict and np.any(r2 == 0.0):
        raise DegeneratePosition(
            f"query point {tuple(theta)} coincides with a data point")
    cross = d[:, 0][:, None] * d[:, 1][None, :] - d[:, 1][:, None] * d[:, 0][None, :]
    denom = np.sqrt(r2[:, None] * r2[None, :])
    boundary = (np.abs(cross) <= _ORIENTATION_TOL * denom) | (denom == 0.0)
    if strict and np.any(boundary & ~np.eye(n, dtype=bool)):
        raise DegeneratePosition(
            f"query point {tuple(theta)} is collinear with two data points "
            f"within {_ORIENTATION_TOL}")
    sign = np.where(boundary, 0.0, np.sign(cross))
    total = 0.0
    for idx in _iter_combination_chunks(n, 3):
        i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
        s1 = sign[i, j]
        s2 = sign[j, k]
        s3 = sign[k, i]
        contained = (s1 == s2) & (s2 == s3) & (s1 != 0.0)
        total += float((w[i] * w[j] * w[k] * contained).sum())
    return total


def _depth_sweep_batch(pts: np.ndarray, thetas: np.ndarray, w: np.ndarray,
                       strict: bool) -> np.ndarray:
    """Weighted open-triangle counts at every query row via the rotating
    half-plane sweep.

    Depth equals ``e3(w)`` minus the weighted count of triples inside an
    open half-plane through theta; the half-plane count accumulates
    ``w_i e2(window)`` over the strict angular window ``(a_i, a_i + pi)``
    of each point in sorted order.  Rows whose angular order is not
    strict (a coincident point, or two points collinear with theta) are
    recomputed by the brute evaluator, or refused when ``strict``.
    """
    M = thetas.shape[0]
    n = pts.shape[0]
    if n < 3:
        return np.zeros(M)
    d = pts[None, :, :] - thetas[:, None, :]
    r2 = np.einsum("mni,mni->mn", d, d)
    ang = np.arctan2(d[:, :, 1], d[:, :, 0])
    order = np.argsort(ang, axis=1)
    a = np.take_along_axis(ang, order, axis=1)
    ws = w[order]
    doubled = np.concatenate([a, a + 2.0 * np.pi], axis=1)
    stacked = np.stack([np.tile(ws, (1, 2)), np.tile(ws * ws, (1, 2))], axis=1)
    prefix = np.concatenate([np.zeros((M, 2, 1)), np.cumsum(stacked, axis=2)],
                            axis=2)
    target = a + np.pi
    offsets = 16.0 * np.arange(M)[:, None]
    upper = np.searchsorted((doubled + offsets).ravel(),
                            (target + offsets).ravel(),
                            side="left").reshape(M, n)
    upper -= 2 * n * np.arange(M)[:, None]
    gathered = np.take_along_axis(prefix, upper[:, None, :], axis=2)
    s1 = gathered[:, 0, :] - prefix[:, 0, 1:n + 1]
    s2 = gathered[:, 1, :] - prefix[:, 1, 1:n + 1]
    complement = (ws * (s1 * s1 - s2)).sum(axis=1) / 2.0
    out = _e3_from_power_sums(w) - complement

    coincident = (r2 <= np.maximum(r2.max(axis=1, keepdims=True), 1e-300) *
                  _ORIENTATION_TOL**2).any(axis=1)
    duplicate = (np.diff(a, axis=1) <= _ORIENTATION_TOL).any(axis=1)
    above = np.take_along_axis(doubled, np.minimum(upper, 2 * n - 1), axis=1)
    below = np.take_along_axis(doubled, np.maximum(upper - 1, 0), axis=1)
    antipodal = ((np.abs(above - target) <= _ORIENTATION_TOL) |
                 (np.abs(target - below) <= _ORIENTATION_TOL)).any(axis=1)
    bad = coincident | duplicate | antipodal
    if np.any(bad):
        if strict:
            row = int(np.flatnonzero(bad)[0])
            raise DegeneratePosition(
                f"query point {tuple(thetas[row])} coincides with a data "
                f"point or is collinear with two data points")
        for row in np.flatnonzero(bad):
            out[row] = _depth_brute_one(pts, thetas[row], w, strict=False)
    return out


def simplicial_depth(points: np.ndarray, theta, weights=None,
                     algo: str = "sweep") -> float:
    """Weighted count of open data triangles strictly containing
    ``theta``: ``sum_{i<j<k} w_i w_j w_k 1{theta in triangle(i,j,k)}``.

    Raises :class:`DegeneratePosition` when ``theta`` lies on a data
    point or on a line through two data points (orientation within
    ``1e-12`` of zero), where strict containment is ill-posed.
    """
    pts = _as_planar(points)
    th = np.asarray(theta, dtype=np.float64).reshape(2)
    w = _depth_weights(weights, pts.shape[0])
    if algo == "brute":
        return _depth_brute_one(pts, th, w, strict=True)
    if algo == "sweep":
        return float(_depth_sweep_batch(pts, th[None, :], w, strict=True)[0])
    raise ConfigInvalid("algo", f"expected 'brute' or 'sweep', got {algo!r}")


# ---------------------------------------------------------------------------
# criteria


@dataclass(frozen=True)
class MCriterion:
    """A parametric family of symmetric kernels with batched criterion
    evaluation.

    ``batch_eval(points, thetas, weights)`` returns the weighted
    criterion at each row of ``thetas`` (up to a fixed positive scale).
    Optional analytic fields carry the population maximizer ``theta0``,
    the curvature matrix ``hessian_v`` (positive definite when given),
    the influence map, and a known scheme constant, when available.
    """

    name: str
    dim: int
    order: int
    batch_eval: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    kernel_at: Optional[Callable[[np.ndarray], Kernel]] = None
    theta0: Optional[tuple[float, ...]] = None
    hessian_v: Optional[tuple[tuple[float, ...], ...]] = None
    influence: Optional[Callable[[np.ndarray], np.ndarray]] = None
    scheme_c: Optional[float] = None

    def __post_init__(self):
        if self.hessian_v is not None:
            v = np.asarray(self.hessian_v, dtype=np.float64)
            if v.shape != (self.dim, self.dim) or np.any(np.linalg.eigvalsh(v) <= 0):
                raise ConfigInvalid("criterion.hessian_v",
                                    "must be symmetric positive definite")

    def evaluate(self, points: np.ndarray, thetas: np.ndarray,
                 weights=None) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        n = pts.shape[0]
        th = np.asarray(thetas, dtype=np.float64)
        if th.ndim == 1:
            th = th[:, None] if self.dim == 1 else th[None, :]
        if th.shape[1] != self.dim:
            raise ConfigInvalid("thetas", f"expected parameter dimension {self.dim}")
        w = _depth_weights(weights, n)
        return np.asarray(self.batch_eval(pts, th, w), dtype=np.float64)


def quadratic_pair_criterion(theta0: Optional[float] = None) -> MCriterion:
    """``f_theta(x1, x2) = -(theta - (x1 + x2)/2)^2`` with closed-form
    weighted maximizer (the weighted pair mean) used as a test oracle."""

    def batch_eval(pts, thetas, w):
        a, b, c = _quadratic_sums(pts, w)
        t = thetas[:, 0]
        return -(a * t * t - 2.0 * b * t + c)

    def kernel_at(theta):
        t = float(np.asarray(theta).reshape(-1)[0])
        return general_kernel(
            2, lambda x, y, t=t: -((t - (x + y) / 2.0) ** 2),
            name=f"quadratic_pair({t:g})")

    return MCriterion(name="quadratic_pair", dim=1, order=2,
                      batch_eval=batch_eval, kernel_at=kernel_at,
                      theta0=None if theta0 is None else (float(theta0),),
                      hessian_v=((2.0,),),
                      influence=None if theta0 is None
                      else (lambda x, t0=float(theta0): x - t0))


def _quadratic_sums(pts: np.ndarray, w: np.ndarray) -> tuple[float, float, float]:
    x = pts.reshape(-1)
    w1 = float(w.sum())
    w2 = float((w * w).sum())
    sx = float((w * x).sum())
    sxx = float((w * x * x).sum())
    s2x = float((w * w * x).sum())
    s2xx = float((w * w * x * x).sum())
    a = w1 * w1 - w2
    b = w1 * sx - s2x
    c = (w1 * sxx - s2xx + sx * sx - s2xx) / 2.0
    return a, b, c


def weighted_pair_mean(points: np.ndarray, weights=None) -> float:
    """Closed-form maximizer of the quadratic pair criterion."""
    pts = np.asarray(points, dtype=np.float64)
    w = _depth_weights(weights, pts.shape[0])
    a, b, _ = _quadratic_sums(pts, w)
    if a <= 0:
        raise SampleTooSmall("need at least two positive-weight points")
    return b / a


def simplicial_median_criterion(theta0: Optional[Sequence[float]] = None) -> MCriterion:
    """Weighted simplicial depth as a criterion over planar ``theta``."""

    def batch_eval(pts, thetas, w):
        return _depth_sweep_batch(_as_planar(pts), thetas, w, strict=False)

    return MCriterion(name="simplicial_median", dim=2, order=3,
                      batch_eval=batch_eval,
                      kernel_at=lambda theta: simplicial_indicator(theta),
                      theta0=None if theta0 is None
                      else tuple(float(t) for t in theta0))


# ---------------------------------------------------------------------------
# optimizers


@dataclass(frozen=True)
class GridRefine:
    """Coarse-to-fine grid search: each level lays a full grid over the
    current box, takes the argmax (ties broken by distance to the data's
    coordinate-wise median, then lexicographically), and shrinks the box
    to one grid step around it."""

    levels: int = 3
    points_per_axis: int = 21
    bounds: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        if self.levels < 1:
            raise ConfigInvalid("optimizer.levels", "need at least one level")
        if self.points_per_axis < 2:
            raise ConfigInvalid("optimizer.points_per_axis", "need at least 2")


@dataclass(frozen=True)
class SimplexSearch:
    """Derivative-free local search (Nelder-Mead) from the box center;
    suited to smooth criteria, not to piecewise-constant ones."""

    max_iter: int = 200
    tol: float = 1e-6
    bounds: Optional[tuple[tuple[float, float], ...]] = None


def _resolve_bounds(optimizer, problem: MCriterion,
                    points: np.ndarray) -> tuple[tuple[float, float], ...]:
    if optimizer.bounds is not None:
        bounds = tuple((float(lo), float(hi)) for lo, hi in optimizer.bounds)
        if len(bounds) != problem.dim or any(hi <= lo for lo, hi in bounds):
            raise OptimizerBoundsMissing(
                f"need {problem.dim} bounded (lo, hi) pairs")
        return bounds
    pts = np.asarray(points, dtype=np.float64)
    data_dim = 1 if pts.ndim == 1 else pts.shape[1]
    if data_dim != problem.dim:
        raise OptimizerBoundsMissing(
            f"cannot derive a search box: parameter dimension {problem.dim} "
            f"differs from data dimension {data_dim}; pass optimizer bounds")
    cols = pts.reshape(pts.shape[0], -1)
    bounds = tuple((float(cols[:, j].min()), float(cols[:, j].max()))
                   for j in range(problem.dim))
    if any(hi <= lo for lo, hi in bounds):
        raise OptimizerBoundsMissing("data bounding box is degenerate")
    return bounds


def _grid_argmax(thetas: np.ndarray, vals: np.ndarray,
                 anchor: np.ndarray) -> np.ndarray:
    best = vals.max()
    cand = thetas[vals == best]
    d2 = ((cand - anchor) ** 2).sum(axis=1)
    cand = cand[d2 == d2.min()]
    order = np.lexsort(tuple(cand[:, j] for j in reversed(range(cand.shape[1]))))
    return cand[order[0]]


def _fit_grid(problem: MCriterion, points: np.ndarray, weights: np.ndarray,
              optimizer: GridRefine) -> np.ndarray:
    bounds = _resolve_bounds(optimizer, problem, points)
    pts = np.asarray(points, dtype=np.float64)
    anchor = np.median(pts.reshape(pts.shape[0], -1), axis=0)[:problem.dim] \
        if pts.reshape(pts.shape[0], -1).shape[1] >= problem.dim \
        else np.zeros(problem.dim)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    lo0, hi0 = lo.copy(), hi.copy()
    p = optimizer.points_per_axis
    theta = (lo + hi) / 2.0
    for _ in range(optimizer.levels):
        axes = [np.linspace(lo[j], hi[j], p) for j in range(problem.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        thetas = np.stack([m.ravel() for m in mesh], axis=1)
        vals = problem.evaluate(points, thetas, weights)
        theta = _grid_argmax(thetas, vals, anchor)
        step = (hi - lo) / (p - 1)
        lo = np.maximum(theta - step, lo0)
        hi = np.minimum(theta + step, hi0)
    return theta


def _fit_simplex(problem: MCriterion, points: np.ndarray, weights: np.ndarray,
                 optimizer: SimplexSearch) -> np.ndarray:
    from scipy.optimize import minimize

    bounds = _resolve_bounds(optimizer, problem, points)
    x0 = np.array([(lo + hi) / 2.0 for lo, hi in bounds])

    def objective(theta):
        return -float(problem.evaluate(points, theta[None, :], weights)[0])

    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxiter": optimizer.max_iter,
                            "xatol": optimizer.tol, "fatol": optimizer.tol})
    return np.asarray(res.x, dtype=np.float64)


def fit_m_estimator(problem: MCriterion, points: np.ndarray, weights=None,
                    optimizer=None) -> np.ndarray:
    """Maximize the weighted distinct-tuple criterion over the search
    region; deterministic given the configuration."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < problem.order:
        raise SampleTooSmall(
            f"criterion of order {problem.order} needs at least that many "
            f"points, got {n}")
    w = _depth_weights(weights, n)
    if optimizer is None:
        optimizer = GridRefine()
    if isinstance(optimizer, GridRefine):
        return _fit_grid(problem, pts, w, optimizer)
    if isinstance(optimizer, SimplexSearch):
        return _fit_simplex(problem, pts, w, optimizer)
    raise ConfigInvalid("optimizer", f"unsupported optimizer {optimizer!r}")


# ---------------------------------------------------------------------------
# bootstrap experiments


@dataclass(frozen=True)
class BootstrapMResult:
    """Conditional bootstrap law against the scaled sampling law.

    ``conditional`` holds ``sqrt(n) (theta* - theta_hat)`` for B weight
    draws on one frozen dataset; ``sampling`` holds the raw
    ``sqrt(n) (theta_hat - theta0)`` across independent datasets.  The
    per-coordinate KS compares ``conditional`` with ``c_hat * sampling``.
    """

    problem_name: str
    scheme_name: str
    n: int
    theta_hat: tuple[float, ...]
    conditional: np.ndarray
    sampling: np.ndarray
    ks: tuple[float, ...]
    c_hat: float
    rng_seed: int

    def __post_init__(self):
        if self.conditional.shape[1] != self.sampling.shape[1]:
            raise ConfigInvalid("result", "coordinate counts disagree")


def _map_maybe_threads(worker, count: int, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, range(count)))
    return [worker(i) for i in range(count)]


def bootstrap_m_experiment(problem: MCriterion, law: Law, scheme: WeightScheme,
                           n: int, B: int, mc_datasets: int,
                           optimizer=None, rng_seed: int = 0,
                           threads: int = 1) -> BootstrapMResult:
    """Compare the conditional law of ``sqrt(n)(theta* - theta_hat)`` on
    one frozen dataset with ``c_hat`` times the sampling law of
    ``sqrt(n)(theta_hat - theta0)`` across fresh datasets."""
    if problem.theta0 is None:
        raise ConfigInvalid("problem.theta0",
                            "the experiment needs the population maximizer")
    theta0 = np.asarray(problem.theta0, dtype=np.float64)
    frozen = law.sample(substream(rng_seed, "data"), n)
    theta_hat = fit_m_estimator(problem, frozen, optimizer=optimizer)
    root_n = math.sqrt(n)

    def boot_worker(b):
        w = scheme.sample(substream(rng_seed, "replicate", b), n)
        star = fit_m_estimator(problem, frozen, weights=w, optimizer=optimizer)
        return root_n * (star - theta_hat)

    def data_worker(t):
        x = law.sample(substream(rng_seed, "dataset", t), n)
        fit = fit_m_estimator(problem, x, optimizer=optimizer)
        return root_n * (fit - theta0)

    conditional = np.array(_map_maybe_threads(boot_worker, B, threads))
    sampling = np.array(_map_maybe_threads(data_worker, mc_datasets, threads))
    c2 = estimate_c2(scheme, n, rng_seed=derive_seed(rng_seed, "c2"))
    c_hat = math.sqrt(max(c2.mean, 0.0))
    ks = tuple(ks_statistic(conditional[:, j], c_hat * sampling[:, j])
               for j in range(conditional.shape[1]))
    return BootstrapMResult(problem_name=problem.name, scheme_name=scheme.name,
                            n=n, theta_hat=tuple(float(t) for t in theta_hat),
                            conditional=conditional, sampling=sampling,
                            ks=ks, c_hat=c_hat, rng_seed=rng_seed)


@dataclass(frozen=True)
class CoverageResult:
    """Percentile-bootstrap interval coverage of the true parameter.

    Coverage is tracked per coordinate; ``mean_coverage`` averages the
    marginal rates and ``joint_coverage`` is the fraction of datasets
    whose intervals cover every coordinate at once.
    """

    problem_name: str
    scheme_name: str
    n: int
    B: int
    datasets: int
    level: float
    per_coord: tuple[float, ...]
    joint_coverage: float
    mean_coverage: float
    rng_seed: int


def bootstrap_ci_coverage(problem: MCriterion, law: Law, scheme: WeightScheme,
                          n: int, B: int, datasets: int, level: float = 0.95,
                          optimizer=None, rng_seed: int = 0,
                          threads: int = 1) -> CoverageResult:
    """Monte Carlo coverage of percentile bootstrap intervals for the
    population maximizer."""
    if problem.theta0 is None:
        raise ConfigInvalid("problem.theta0",
                            "coverage needs the population maximizer")
    theta0 = np.asarray(problem.theta0, dtype=np.float64)
    alpha = (1.0 - level) / 2.0

    def dataset_worker(t):
        x = law.sample(substream(rng_seed, "dataset", t), n)
        stars = np.empty((B, problem.dim))
        for b in range(B):
            w = scheme.sample(substream(rng_seed, "dataset", t, "replicate", b), n)
            stars[b] = fit_m_estimator(problem, x, weights=w, optimizer=optimizer)
        lo = np.quantile(stars, alpha, axis=0)
        hi = np.quantile(stars, 1.0 - alpha, axis=0)
        return (lo <= theta0) & (theta0 <= hi)

    covered = np.array(_map_maybe_threads(dataset_worker, datasets, threads))
    per_coord = covered.mean(axis=0)
    return CoverageResult(problem_name=problem.name, scheme_name=scheme.name,
                          n=n, B=B, datasets=datasets, level=level,
                          per_coord=tuple(float(c) for c in per_coord),
                          joint_coverage=float(covered.all(axis=1).mean()),
                          mean_coverage=float(per_coord.mean()),
                          rng_seed=rng_seed)
