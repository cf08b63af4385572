"""Moment-bound verification lab: envelopes, both sides, permutations."""

import itertools
import math

import numpy as np
import pytest

from ustat_resample import (
    check_inequality,
    default_inequality_configs,
    inequality_constant,
    permutation_moment_check,
    power_envelope,
    power_envelope_bound,
    envelope_tail_integral,
    iid_gaussian,
    iid_rademacher,
)


def test_inequality_constant_is_positive_and_grows_with_order():
    values = [inequality_constant(m) for m in (1, 2, 3, 4)]
    assert all(v > 0.0 for v in values)
    assert values == sorted(values)


def test_power_envelope_tail_integral_scales_linearly_in_kappa0():
    rng = np.random.default_rng(1)
    w = rng.standard_normal(30)
    env1 = power_envelope(2, 30, kappa0=1.0, gamma=0.5)
    env3 = power_envelope(2, 30, kappa0=3.0, gamma=0.5)
    one = envelope_tail_integral(env1, w)
    three = envelope_tail_integral(env3, w)
    np.testing.assert_allclose(three, 3.0 * one, rtol=1e-10)


def test_power_envelope_bound_monotone_in_scale():
    small = power_envelope_bound(0.5, 2.0, iid_gaussian(), 2, 20)
    large = power_envelope_bound(2.0, 2.0, iid_gaussian(), 2, 20)
    np.testing.assert_allclose(large, 4.0 * small, rtol=1e-10)
    assert small > 0.0


def test_check_inequality_holds_on_one_default_config():
    config = default_inequality_configs(rng_seed=3)[0]
    report = check_inequality(config)
    assert report.passed
    assert report.margin >= 0.0
    assert report.rhs >= report.lhs_mean - 4.0 * report.lhs_se


def symmetric_weights(half_deviations):
    """Weights 1 +/- a with a sign-symmetric deviation multiset; they
    sum to n exactly."""
    d = np.concatenate([half_deviations, -np.asarray(half_deviations)])
    return 1.0 + d


def test_permutation_moment_vanishes_for_odd_total_order():
    w = symmetric_weights(np.array([0.3, 0.55, 0.8]))
    for alpha in ((1,), (1, 1, 1), (3,), (2, 1)):
        result = permutation_moment_check(w, alpha)
        assert result.lhs_abs == 0.0, alpha


def test_permutation_moment_matches_direct_enumeration():
    rng = np.random.default_rng(5)
    w = rng.gamma(2.0, size=5)
    w *= w.size / w.sum()
    n = w.size
    alpha = (2, 2)
    result = permutation_moment_check(w, alpha)
    total = 0.0
    for perm in itertools.permutations(range(n)):
        total += ((w[perm[0]] - 1.0) ** 2) * ((w[perm[1]] - 1.0) ** 2)
    direct = abs(total / math.factorial(n))
    np.testing.assert_allclose(result.lhs_abs, direct, rtol=1e-12)


def test_permutation_moment_fitted_constant_is_modest():
    rng = np.random.default_rng(6)
    for n in (5, 6, 7):
        w = rng.gamma(2.0, size=n)
        w *= n / w.sum()
        for alpha in ((2,), (2, 2), (4,), (2, 2, 2)):
            result = permutation_moment_check(w, alpha)
            assert result.fitted_c <= 10.0, (n, alpha)


def test_default_suite_covers_both_orders_and_all_schemes():
    configs = default_inequality_configs(rng_seed=7)
    assert len(configs) == 36
    assert {c.fclass.order for c in configs} == {1, 2}
    assert {c.n for c in configs} == {10, 20, 40}
    assert len({c.scheme.name for c in configs}) == 3
    report = check_inequality(configs[4])
    assert report.passed
    assert iid_rademacher().name == "iid_rademacher"
