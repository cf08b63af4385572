"""Sampling designs, weighted statistics, and risk-minimization checks."""

import numpy as np
import pytest

from ustat_resample import (
    ConfigInvalid,
    DesignDraw,
    DesignInvalid,
    MissingAnalyticFields,
    bernoulli_design,
    bivariate_normal,
    design_from_config,
    draw_design,
    erm_experiment,
    full_sample_draw,
    ht_bias_curve,
    ht_m_estimator,
    ht_ustat,
    linearization_check,
    load_population,
    monotone_ranking_law,
    normal,
    poisson_unequal_design,
    quadratic_pair_criterion,
    ranking_risk,
    simplicial_median_criterion,
    srswor_design,
    stratified_design,
    threshold_ranking_problem,
    uniform01,
    ustat,
    validate_design,
    weighted_pair_mean,
    GridRefine,
)
from ustat_resample.kernels import BUILTIN_KERNELS
from ustat_resample.rngutil import substream


def test_full_sample_draw_reduces_ht_to_plain_ustat():
    rng = np.random.default_rng(51)
    points = rng.uniform(size=25)
    kernel = BUILTIN_KERNELS["product_xy"]()
    full = ht_ustat(points, full_sample_draw(25), kernel)
    np.testing.assert_allclose(full, ustat(points, kernel).value, rtol=1e-13)


def test_design_draw_validates_indicators_and_probabilities():
    with pytest.raises(DesignInvalid):
        DesignDraw(xi=np.array([0.5, 1.0]), pi=np.array([0.5, 0.5]),
                   pi_floor=0.1, independent=True, pair_inclusion=None)
    with pytest.raises(DesignInvalid):
        DesignDraw(xi=np.array([0.0, 1.0]), pi=np.array([0.0, 0.5]),
                   pi_floor=0.1, independent=True, pair_inclusion=None)
    with pytest.raises(DesignInvalid):
        DesignDraw(xi=np.array([1.0, 1.0]), pi=np.array([0.05, 0.5]),
                   pi_floor=0.2, independent=True, pair_inclusion=None)


def test_bernoulli_marginals_and_ht_weights():
    design = bernoulli_design(0.3)
    draw = draw_design(design, 4000, rng=substream(52, "d"))
    np.testing.assert_allclose(draw.pi, 0.3)
    np.testing.assert_allclose(np.mean(draw.xi), 0.3, atol=0.03)
    included = draw.xi > 0.0
    np.testing.assert_allclose(draw.ht_weights[included], 1.0 / 0.3,
                               rtol=1e-12)


def test_bernoulli_ht_is_unbiased_within_monte_carlo_error():
    rng = np.random.default_rng(53)
    points = rng.uniform(size=150)
    kernel = BUILTIN_KERNELS["product_xy"]()
    full = ustat(points, kernel).value
    design = bernoulli_design(0.5)
    draws = 600
    values = np.empty(draws)
    for r in range(draws):
        values[r] = ht_ustat(points, draw_design(design, 150,
                                                 rng=substream(53, "r", r)),
                             kernel)
    se = values.std(ddof=1) / np.sqrt(draws)
    assert abs(values.mean() - full) <= 4.0 * se


def test_srswor_draw_has_exact_size_and_pair_probabilities():
    design = srswor_design(6)
    counts = np.zeros((12, 12))
    draws = 4000
    for r in range(draws):
        draw = draw_design(design, 12, rng=substream(54, "r", r))
        assert draw.xi.sum() == 6.0
        idx = np.flatnonzero(draw.xi)
        counts[np.ix_(idx, idx)] += 1.0
    np.fill_diagonal(counts, 0.0)
    pair_freq = counts.sum() / (draws * 12 * 11)
    exact = 6 * 5 / (12 * 11)
    assert abs(pair_freq - exact) <= 4.0 * np.sqrt(exact * (1 - exact) / draws)


def test_srswor_bias_matches_closed_form():
    """Without replacement, the weighted pair sum scales the full value
    by N(n-1)/(n(N-1)), so the bias is known exactly."""
    kernel = BUILTIN_KERNELS["product_xy"]()
    law = uniform01()
    points = ht_bias_curve(kernel, law, [(80, srswor_design(40))],
                           draws=4000, rng_seed=55)
    point = points[0]
    assert point.exact_bias is not None
    assert abs(point.bias - point.exact_bias) <= 4.0 * point.mc_se


def test_poisson_unequal_uses_auxiliary_and_respects_floor():
    design = poisson_unequal_design(0.2)
    rng = substream(56, "d")
    z = rng.standard_normal(300)
    draw = draw_design(design, 300, z=z, rng=rng)
    assert np.all(draw.pi >= 0.2 - 1e-12)
    assert np.all(draw.pi <= 1.0)
    assert draw.independent


def test_stratified_design_draws_fixed_counts_per_stratum():
    design = stratified_design((0.0,), (3, 5))
    rng = substream(57, "d")
    z = np.concatenate([np.full(40, -1.0), np.full(60, 1.0)])
    draw = draw_design(design, 100, z=z, rng=rng)
    assert draw.xi[:40].sum() == 3.0
    assert draw.xi[40:].sum() == 5.0


def test_ht_m_estimator_matches_weighted_closed_form():
    rng = np.random.default_rng(58)
    points = rng.standard_normal(120)
    draw = draw_design(bernoulli_design(0.6), 120, rng=substream(58, "d"))
    problem = quadratic_pair_criterion()
    fit = ht_m_estimator(problem, points, draw,
                         optimizer=GridRefine(levels=7, points_per_axis=21))
    closed = weighted_pair_mean(points, draw.ht_weights)
    np.testing.assert_allclose(fit[0], closed, atol=1e-4)


def test_linearization_needs_analytic_fields():
    problem = simplicial_median_criterion()
    with pytest.raises(MissingAnalyticFields):
        linearization_check(problem, bivariate_normal(), bernoulli_design(0.5),
                            [50], mc_reps=2, rng_seed=59)


def test_linearization_residual_is_small_for_quadratic():
    problem = quadratic_pair_criterion(theta0=0.0)
    report = linearization_check(problem, normal(), bernoulli_design(0.5),
                                 [80], mc_reps=40, rng_seed=60)
    assert report.residual_rms[0] <= 0.5


def pair_expectation(law, kernel):
    """E f(Z1, Z2) for independent draws via nested quadrature."""

    def outer(batch):
        out = np.empty(batch.shape[0])
        for i, row in enumerate(batch):
            def inner(second):
                rep = np.repeat(row[None, :], second.shape[0], axis=0)
                return kernel.fn(rep, second)

            out[i] = law.expect(inner)
        return out

    return law.expect(outer)


def test_ranking_risk_closed_form_matches_quadrature_and_mc():
    problem = threshold_ranking_problem(with_kernels=True)
    law = monotone_ranking_law()
    np.testing.assert_allclose(ranking_risk(0.0), 0.25, rtol=1e-12)
    np.testing.assert_allclose(ranking_risk(0.5), 0.125, rtol=1e-12)
    rng = np.random.default_rng(65)
    pts = law.sample(rng, 400000)
    first, second = pts[:200000], pts[200000:]
    for label, kernel in zip(problem.labels[:9:4], problem.kernels[:9:4]):
        t = float(label.split("=")[1])
        # the indicator loss is discontinuous, so fixed-node quadrature
        # is only first-order accurate; MC pins the value independently
        np.testing.assert_allclose(pair_expectation(law, kernel),
                                   ranking_risk(t), atol=5e-3)
        draws = kernel.fn(first, second)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - ranking_risk(t)) <= 4.0 * se


def test_threshold_class_minimum_sits_at_one_half():
    problem = threshold_ranking_problem()
    excess = np.asarray(problem.excess_risk)
    thresholds = np.array([float(lab.split("=")[1])
                           for lab in problem.labels])
    assert excess.min() == 0.0
    np.testing.assert_allclose(thresholds[np.argmin(excess)], 0.5)


def test_fast_ranking_criterion_matches_per_kernel_weighted_sums():
    problem = threshold_ranking_problem(with_kernels=True)
    law = monotone_ranking_law()
    pts = np.asarray(law.sample(substream(61, "s"), 60))
    draw = draw_design(bernoulli_design(0.6), 60, rng=substream(61, "d"))
    fast = problem.criterion_batch(pts, draw.ht_weights)
    slow = [ht_ustat(pts, draw, kernel) for kernel in problem.kernels]
    np.testing.assert_allclose(fast, slow, rtol=1e-10, atol=1e-12)


def test_erm_median_excess_shrinks_with_population():
    report = erm_experiment(threshold_ranking_problem(), bernoulli_design(0.5),
                            [100, 800], mc_reps=60, rng_seed=62)
    assert report.medians[1] <= report.medians[0]


def test_validate_design_lln_statistic():
    bern = validate_design(bernoulli_design(0.5), [100, 400], mc_reps=150,
                           rng_seed=63)
    assert bern.pi_floor_ok
    assert bern.lln_sd[1] < bern.lln_sd[0]
    exact = validate_design(srswor_design(20), [40, 80], mc_reps=50,
                            rng_seed=64)
    np.testing.assert_allclose(exact.lln_sd, 0.0, atol=1e-14)


def test_design_from_config_errors_name_the_field():
    with pytest.raises(ConfigInvalid) as missing:
        design_from_config({"kind": "bernoulli"})
    assert "design" in str(missing.value)
    with pytest.raises(ConfigInvalid) as unknown:
        design_from_config({"kind": "cluster"})
    assert "design.kind" in str(unknown.value)


def test_load_population_round_trip(tmp_path):
    path = tmp_path / "pop.csv"
    path.write_text("x1,x2,z\n0.1,0.2,1.0\n0.3,0.4,2.0\n")
    points, z = load_population(path)
    np.testing.assert_allclose(points, [[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_allclose(z, [1.0, 2.0])
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigInvalid):
        load_population(bad)
