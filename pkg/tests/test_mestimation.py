"""Criterion maximizers: simplicial depth, optimizers, bootstrap runs."""

import itertools
import math

import numpy as np
import pytest

from ustat_resample import (
    DegeneratePosition,
    GridRefine,
    OptimizerBoundsMissing,
    SampleTooSmall,
    SimplexSearch,
    bootstrap_ci_coverage,
    bootstrap_m_experiment,
    efron_multinomial,
    fit_m_estimator,
    normal,
    quadratic_pair_criterion,
    simplicial_depth,
    simplicial_median_criterion,
    weighted_pair_mean,
)


def brute_depth(points, theta, weights=None):
    """Count (or weight-sum) triangles containing theta via signed areas."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights)

    def side(a, b):
        return np.sign((a[0] - theta[0]) * (b[1] - theta[1])
                       - (a[1] - theta[1]) * (b[0] - theta[0]))

    total = 0.0
    for i, j, k in itertools.combinations(range(n), 3):
        s1 = side(pts[i], pts[j])
        s2 = side(pts[j], pts[k])
        s3 = side(pts[k], pts[i])
        if s1 == s2 == s3 != 0:
            total += w[i] * w[j] * w[k]
    return total


def test_depth_of_triangle_centroid_is_one():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    centroid = (1.0 / 3.0, 1.0 / 3.0)
    for algo in ("brute", "sweep"):
        np.testing.assert_allclose(
            simplicial_depth(pts, centroid, algo=algo), 1.0, rtol=1e-12)


def test_depth_outside_hull_is_zero():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    for algo in ("brute", "sweep"):
        np.testing.assert_allclose(
            simplicial_depth(pts, (5.0, 4.3), algo=algo), 0.0, atol=1e-12)


def test_depth_inside_square_counts_two_containing_triangles():
    """(0.5, 0.3) lies below both diagonals of the unit square, so it is
    inside exactly the two triangles that use the bottom edge."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    for algo in ("brute", "sweep"):
        np.testing.assert_allclose(
            simplicial_depth(pts, (0.5, 0.3), algo=algo), 2.0, rtol=1e-12)


def test_sweep_equals_brute_on_random_configurations():
    rng = np.random.default_rng(31)
    for _ in range(30):
        n = int(rng.integers(5, 35))
        pts = rng.standard_normal((n, 2))
        theta = tuple(rng.standard_normal(2) * 0.3)
        fast = simplicial_depth(pts, theta, algo="sweep")
        slow = simplicial_depth(pts, theta, algo="brute")
        np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-9)
        oracle = brute_depth(pts, theta)
        np.testing.assert_allclose(slow, oracle, rtol=1e-12, atol=1e-9)


def test_weighted_sweep_matches_weighted_brute():
    rng = np.random.default_rng(32)
    scale = None
    for _ in range(10):
        n = int(rng.integers(6, 25))
        pts = rng.standard_normal((n, 2))
        w = rng.gamma(2.0, size=n)
        theta = tuple(rng.standard_normal(2) * 0.2)
        fast = simplicial_depth(pts, theta, weights=w, algo="sweep")
        slow = simplicial_depth(pts, theta, weights=w, algo="brute")
        scale = max(np.sum(w) ** 3 / 6.0, 1.0)
        assert abs(fast - slow) <= 1e-12 * scale
        np.testing.assert_allclose(slow, brute_depth(pts, theta, w),
                                   rtol=1e-10, atol=1e-12 * scale)


def test_unit_weight_depth_is_integer_below_binomial_cap():
    rng = np.random.default_rng(33)
    for _ in range(10):
        n = int(rng.integers(5, 20))
        pts = rng.standard_normal((n, 2))
        depth = simplicial_depth(pts, (0.0, 0.0), algo="sweep")
        assert abs(depth - round(depth)) <= 1e-9
        assert 0.0 <= depth <= math.comb(n, 3)


def test_depth_is_scale_and_translation_equivariant():
    rng = np.random.default_rng(34)
    pts = rng.standard_normal((18, 2))
    theta = np.array([0.1, -0.2])
    base = simplicial_depth(pts, tuple(theta), algo="sweep")
    shift = np.array([3.0, -7.0])
    moved = simplicial_depth(pts + shift, tuple(theta + shift), algo="sweep")
    scaled = simplicial_depth(pts * 4.5, tuple(theta * 4.5), algo="sweep")
    np.testing.assert_allclose(moved, base, rtol=1e-12)
    np.testing.assert_allclose(scaled, base, rtol=1e-12)


def test_depth_raises_on_degenerate_positions():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    for algo in ("brute", "sweep"):
        with pytest.raises(DegeneratePosition):
            simplicial_depth(pts, (0.0, 0.0), algo=algo)
        with pytest.raises(DegeneratePosition):
            simplicial_depth(pts, (0.5, 0.0), algo=algo)


def test_weighted_pair_mean_equals_sample_mean_for_unit_weights():
    rng = np.random.default_rng(35)
    x = rng.standard_normal(40)
    np.testing.assert_allclose(weighted_pair_mean(x), np.mean(x), rtol=1e-13)


def test_weighted_pair_mean_matches_dense_grid_argmax():
    rng = np.random.default_rng(36)
    x = rng.standard_normal(25)
    w = rng.gamma(2.0, size=25)
    problem = quadratic_pair_criterion()
    thetas = np.linspace(-1.0, 1.0, 20001)
    values = problem.evaluate(x, thetas, weights=w)
    closed = weighted_pair_mean(x, w)
    np.testing.assert_allclose(thetas[np.argmax(values)], closed, atol=1e-4)


def test_quadratic_criterion_evaluate_matches_distinct_pair_loop():
    rng = np.random.default_rng(37)
    x = rng.standard_normal(12)
    w = rng.gamma(2.0, size=12)
    problem = quadratic_pair_criterion()
    thetas = np.array([-0.4, 0.0, 0.7])
    direct = []
    for t in thetas:
        acc = 0.0
        for i in range(12):
            for j in range(12):
                if i != j:
                    acc += w[i] * w[j] * -((t - (x[i] + x[j]) / 2.0) ** 2)
        direct.append(acc)
    np.testing.assert_allclose(problem.evaluate(x, thetas, weights=w),
                               direct, rtol=1e-10)


def test_grid_refine_finds_quadratic_maximizer():
    rng = np.random.default_rng(38)
    x = rng.standard_normal(60)
    problem = quadratic_pair_criterion()
    fit = fit_m_estimator(problem, x,
                          optimizer=GridRefine(levels=6, points_per_axis=21))
    np.testing.assert_allclose(fit[0], np.mean(x), atol=1e-4)


def test_simplex_search_agrees_with_grid_refine():
    rng = np.random.default_rng(39)
    x = rng.standard_normal(50)
    problem = quadratic_pair_criterion()
    grid = fit_m_estimator(problem, x,
                           optimizer=GridRefine(levels=6, points_per_axis=21))
    simplex = fit_m_estimator(problem, x, optimizer=SimplexSearch())
    np.testing.assert_allclose(simplex, grid, atol=1e-3)


def test_simplicial_median_of_symmetric_cross_is_center():
    pts = np.array([[1.0, 0.1], [-1.0, -0.1], [0.1, -1.0], [-0.1, 1.0],
                    [0.55, 0.5], [-0.5, -0.55]])
    problem = simplicial_median_criterion()
    fit = fit_m_estimator(problem, pts,
                          optimizer=GridRefine(levels=5, points_per_axis=11))
    assert np.linalg.norm(fit) <= 0.2


def test_fit_rejects_sample_smaller_than_order():
    problem = quadratic_pair_criterion()
    with pytest.raises(SampleTooSmall):
        fit_m_estimator(problem, np.array([1.0]))


def test_optimizer_needs_bounds_when_dims_disagree():
    problem = simplicial_median_criterion()
    with pytest.raises(OptimizerBoundsMissing):
        fit_m_estimator(problem, np.array([1.0, 2.0, 3.0, 4.0]))


def test_unit_weights_make_conditional_law_degenerate_at_estimate():
    rng = np.random.default_rng(40)
    x = rng.standard_normal(30)
    problem = quadratic_pair_criterion()
    opt = GridRefine(levels=6, points_per_axis=21)
    unweighted = fit_m_estimator(problem, x, optimizer=opt)
    reweighted = fit_m_estimator(problem, x, weights=np.ones(30),
                                 optimizer=opt)
    np.testing.assert_allclose(reweighted, unweighted, atol=1e-12)


def test_bootstrap_m_experiment_shapes_and_determinism():
    problem = quadratic_pair_criterion(theta0=0.0)
    res = bootstrap_m_experiment(problem, normal(), efron_multinomial(),
                                 n=40, B=30, mc_datasets=30,
                                 optimizer=GridRefine(levels=4,
                                                      points_per_axis=11),
                                 rng_seed=41)
    assert np.asarray(res.conditional).shape[0] == 30
    assert np.asarray(res.sampling).shape[0] == 30
    assert len(res.ks) == 1 and 0.0 <= res.ks[0] <= 1.0
    assert res.c_hat > 0.0
    again = bootstrap_m_experiment(problem, normal(), efron_multinomial(),
                                   n=40, B=30, mc_datasets=30,
                                   optimizer=GridRefine(levels=4,
                                                        points_per_axis=11),
                                   rng_seed=41)
    np.testing.assert_array_equal(np.asarray(res.conditional),
                                  np.asarray(again.conditional))


def test_coverage_experiment_reports_rates_in_unit_interval():
    problem = quadratic_pair_criterion(theta0=0.0)
    res = bootstrap_ci_coverage(problem, normal(), efron_multinomial(),
                                n=40, B=40, datasets=25, level=0.9,
                                optimizer=GridRefine(levels=4,
                                                     points_per_axis=11),
                                rng_seed=42)
    assert all(0.0 <= c <= 1.0 for c in res.per_coord)
    assert 0.0 <= res.joint_coverage <= 1.0
    np.testing.assert_allclose(res.mean_coverage,
                               np.mean(res.per_coord), rtol=1e-12)
