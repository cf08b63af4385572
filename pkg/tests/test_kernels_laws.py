"""Kernel wrappers, built-in factories, and sampling laws."""

import numpy as np
import pytest

from ustat_resample import (
    ConfigInvalid,
    NonSymmetricKernel,
    bivariate_normal,
    builtin_kernel_names,
    builtin_law_names,
    finite_support,
    general_kernel,
    kernel_from_config,
    law_from_config,
    normal,
    separable_kernel,
    simplicial_indicator,
    symmetrize,
    uniform01,
)
from ustat_resample.kernels import BUILTIN_KERNELS


def test_general_kernel_rejects_asymmetric_function():
    with pytest.raises(NonSymmetricKernel):
        general_kernel(2, lambda x, y: x - y, name="diff")


def test_symmetrize_makes_asymmetric_function_usable():
    kernel = symmetrize(2, lambda x, y: x - y, name="sym_diff")
    np.testing.assert_allclose(kernel.fn(np.array([1.0]), np.array([3.0])),
                               0.0, atol=1e-15)


def test_separable_kernel_evaluates_as_coefficient_mixture():
    kernel = separable_kernel((2.0, -1.0), ("identity", "square"), 2,
                              name="mix")
    x = np.array([0.5])
    y = np.array([0.25])
    expected = 2.0 * (0.5 * 0.25) - 1.0 * (0.5 ** 2 * 0.25 ** 2)
    np.testing.assert_allclose(kernel.fn(x, y), expected, rtol=1e-14)


def test_builtin_kernels_are_factories_with_stable_names():
    for name in builtin_kernel_names():
        kernel = BUILTIN_KERNELS[name]()
        assert kernel.order >= 1
        assert kernel.name


def test_simplicial_indicator_detects_containment():
    kernel = simplicial_indicator((0.25, 0.25))
    tri_in = [np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]),
              np.array([[0.0, 1.0]])]
    tri_out = [np.array([[1.0, 1.0]]), np.array([[2.0, 1.0]]),
               np.array([[1.0, 2.0]])]
    np.testing.assert_allclose(kernel.fn(*tri_in), 1.0)
    np.testing.assert_allclose(kernel.fn(*tri_out), 0.0)


def test_kernel_from_config_builtin_and_inline():
    built = kernel_from_config({"name": "product_xy"})
    assert built.order == 2
    inline = kernel_from_config({"coeffs": [1.0], "factors": ["identity"],
                                 "order": 2})
    x = np.array([2.0])
    y = np.array([3.0])
    np.testing.assert_allclose(inline.fn(x, y), built.fn(x, y))


def test_kernel_from_config_unknown_name_names_field():
    with pytest.raises(ConfigInvalid) as err:
        kernel_from_config({"name": "nope"})
    assert "kernel.name" in str(err.value)


def test_uniform01_quadrature_moments():
    law = uniform01()
    ident = separable_kernel((1.0,), ("identity",), 1, name="id1")
    np.testing.assert_allclose(law.expect(ident), 0.5, rtol=1e-12)
    sq = separable_kernel((1.0,), ("square",), 1, name="sq1")
    np.testing.assert_allclose(law.expect(sq), 1.0 / 3.0, rtol=1e-12)


def test_normal_law_sample_moments_and_quantile():
    law = normal()
    rng = np.random.default_rng(11)
    draws = law.sample(rng, 200000)
    np.testing.assert_allclose(np.mean(draws), 0.0, atol=0.02)
    np.testing.assert_allclose(np.std(draws), 1.0, atol=0.02)
    np.testing.assert_allclose(law.quantile(np.array([0.5]))[0], 0.0,
                               atol=1e-12)


def test_finite_support_expectation_is_exact():
    law = finite_support((1.0, 2.0, 4.0), (0.5, 0.25, 0.25))
    ident = separable_kernel((1.0,), ("identity",), 1, name="id1")
    np.testing.assert_allclose(law.expect(ident), 0.5 + 0.5 + 1.0,
                               rtol=1e-14)


def test_bivariate_normal_sample_shape_and_covariance():
    law = bivariate_normal()
    rng = np.random.default_rng(12)
    draws = law.sample(rng, 100000)
    assert draws.shape == (100000, 2)
    cov = np.cov(draws.T)
    np.testing.assert_allclose(cov, np.eye(2), atol=0.02)


def test_law_from_config_round_trip_and_unknown_name():
    law = law_from_config({"name": "uniform01"})
    assert law.kind == "uniform01"
    assert sorted(builtin_law_names()) == builtin_law_names()
    with pytest.raises(ConfigInvalid) as err:
        law_from_config({"name": "cauchy"})
    assert "law.name" in str(err.value)
