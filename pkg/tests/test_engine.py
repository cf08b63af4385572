"""Exact-value and consistency tests for the evaluation engine."""

import itertools
import math

import numpy as np
import pytest

from ustat_resample import (
    DecoupledData,
    EnumerationTooLarge,
    FunctionClass,
    Normalization,
    SampleTooSmall,
    decoupled_sym_sup,
    draw_decoupled,
    elementary_symmetric,
    general_kernel,
    multiplier_ustat,
    newton_from_power_sums,
    separable_kernel,
    uniform01,
    ustat,
    weighted_distinct_sum,
)
from ustat_resample.kernels import BUILTIN_KERNELS


def brute_elementary(values, m):
    return sum(math.prod(c) for c in itertools.combinations(values, m))


def test_elementary_symmetric_matches_brute_force_integers():
    rng = np.random.default_rng(1)
    for n in range(1, 9):
        values = rng.integers(-4, 5, size=n).astype(np.float64)
        for m in range(0, n + 1):
            expected = brute_elementary([int(v) for v in values], m)
            assert elementary_symmetric(values, m) == expected


def test_elementary_symmetric_matches_brute_force_floats():
    rng = np.random.default_rng(2)
    for n in (3, 6, 10):
        values = rng.uniform(-1.5, 1.5, size=n)
        for m in range(0, n + 1):
            np.testing.assert_allclose(elementary_symmetric(values, m),
                                       brute_elementary(values, m),
                                       rtol=1e-9, atol=1e-12)


def test_newton_from_power_sums_agrees_with_subset_sums():
    rng = np.random.default_rng(3)
    values = rng.uniform(0.2, 2.0, size=7)
    for m in range(1, 8):
        power_sums = [float(np.sum(values ** k)) for k in range(1, m + 1)]
        np.testing.assert_allclose(newton_from_power_sums(power_sums),
                                   brute_elementary(values, m), rtol=1e-10)


def test_ustat_product_kernel_small_sample():
    kernel = BUILTIN_KERNELS["product_xy"]()
    points = np.array([1.0, 2.0, 3.0])
    result = ustat(points, kernel, normalization=Normalization.BINOMIAL_AVERAGE)
    np.testing.assert_allclose(result.value, 11.0 / 3.0, rtol=1e-15)
    assert result.n == 3 and result.order == 2
    raw = ustat(points, kernel, normalization=Normalization.RAW_SUM)
    np.testing.assert_allclose(raw.value, 11.0, rtol=1e-15)
    tuples = ustat(points, kernel,
                   normalization=Normalization.DISTINCT_TUPLE_SUM)
    np.testing.assert_allclose(tuples.value, 22.0, rtol=1e-15)


def test_ustat_matches_direct_enumeration_general_kernel():
    rng = np.random.default_rng(4)
    points = rng.normal(size=9)
    kernel = general_kernel(3, lambda x, y, z: np.cos(x + y + z) + x * y * z,
                            name="cos_plus_prod")
    expected = np.mean([kernel.fn(*p)
                        for p in itertools.combinations(points, 3)])
    got = ustat(points, kernel).value
    np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_ustat_rejects_samples_smaller_than_order():
    kernel = BUILTIN_KERNELS["product_xy"]()
    with pytest.raises(SampleTooSmall):
        ustat(np.array([1.0]), kernel)


def test_multiplier_ustat_unit_weights_reduces_to_ustat():
    rng = np.random.default_rng(5)
    points = rng.normal(size=14)
    kernel = BUILTIN_KERNELS["product_xy"]()
    plain = ustat(points, kernel,
                  normalization=Normalization.DISTINCT_TUPLE_SUM).value
    weighted = multiplier_ustat(points, np.ones(14), kernel,
                                normalization=Normalization.DISTINCT_TUPLE_SUM)
    np.testing.assert_allclose(weighted.value, plain, rtol=1e-12)


def test_multiplier_ustat_separable_fast_path_matches_dense_sum():
    rng = np.random.default_rng(6)
    points = rng.uniform(size=12)
    w = rng.gamma(2.0, size=12)
    kernel = separable_kernel((0.7, -0.4), ("identity", "square"), 2,
                              name="mix2")
    fast = multiplier_ustat(points, w, kernel,
                            normalization=Normalization.DISTINCT_TUPLE_SUM)
    slow = weighted_distinct_sum(points, w, kernel)
    np.testing.assert_allclose(fast.value, slow, rtol=1e-11)


def test_weighted_distinct_sum_matches_manual_pair_loop():
    rng = np.random.default_rng(7)
    points = rng.uniform(size=8)
    w = rng.gamma(1.5, size=8)
    kernel = BUILTIN_KERNELS["product_xy"]()
    manual = sum(w[i] * w[j] * points[i] * points[j]
                 for i in range(8) for j in range(8) if i != j)
    np.testing.assert_allclose(weighted_distinct_sum(points, w, kernel),
                               manual, rtol=1e-12)


def test_enumeration_cap_guards_large_general_evaluations():
    kernel = general_kernel(6, lambda *a: sum(a), name="sum6")
    points = np.arange(2000, dtype=np.float64)
    with pytest.raises(EnumerationTooLarge):
        ustat(points, kernel)


def test_decoupled_sup_bounded_by_class_union():
    rng = np.random.default_rng(8)
    law = uniform01()
    fclass = FunctionClass(kernels=(
        separable_kernel((1.0,), ("legendre1",), 2, name="l1"),
        separable_kernel((1.0,), ("legendre2",), 2, name="l2"),
    ))
    data = draw_decoupled(law, 2, 20, rng)
    assert isinstance(data, DecoupledData)
    whole = decoupled_sym_sup(fclass, data, caps=(20, 20))
    single = decoupled_sym_sup(FunctionClass(kernels=fclass.kernels[:1]),
                               data, caps=(20, 20))
    assert whole >= single - 1e-12
