"""Projection, reconstruction, and degeneracy diagnostics."""

import numpy as np
import pytest

from ustat_resample import (
    ProjectionMethod,
    check_degeneracy,
    decompose,
    finite_support,
    reconstruct,
    separable_kernel,
    uniform01,
    ustat,
)
from ustat_resample.kernels import BUILTIN_KERNELS


def test_product_kernel_reconstruction_terms_are_analytic():
    """f(x, y) = xy on Uniform(0, 1) splits into 1/4, two copies of
    x/2 - 1/4, and (x - 1/2)(y - 1/2)."""
    kernel = BUILTIN_KERNELS["product_xy"]()
    law = uniform01()
    decomp = decompose(kernel, law)
    points = np.array([0.2, 0.7, 0.4])
    report = reconstruct(decomp, points)
    np.testing.assert_allclose(report.terms[0], 0.25, rtol=1e-12)
    f1_mean = np.mean(points / 2.0 - 0.25)
    np.testing.assert_allclose(report.terms[1], 2.0 * f1_mean, rtol=1e-12)
    centered = points - 0.5
    pair_mean = (centered[0] * centered[1] + centered[0] * centered[2]
                 + centered[1] * centered[2]) / 3.0
    np.testing.assert_allclose(report.terms[2], pair_mean, rtol=1e-12)
    np.testing.assert_allclose(report.value,
                               ustat(points, kernel).value, rtol=1e-14)
    assert report.rel_residual <= 1e-12


def test_reconstruction_is_exact_across_sample_sizes():
    kernel = BUILTIN_KERNELS["product_xy"]()
    law = uniform01()
    decomp = decompose(kernel, law)
    rng = np.random.default_rng(21)
    for n in (5, 11, 23):
        report = reconstruct(decomp, law.sample(rng, n))
        assert report.rel_residual <= 1e-10


def test_decompose_on_finite_support_uses_exact_method():
    kernel = BUILTIN_KERNELS["product_xy"]()
    law = finite_support((0.0, 1.0, 3.0), (0.2, 0.5, 0.3))
    decomp = decompose(kernel, law)
    assert decomp.method in (ProjectionMethod.SYMBOLIC,
                             ProjectionMethod.FINITE_EXACT)
    report = reconstruct(decomp, np.array([0.0, 1.0, 3.0, 1.0]))
    assert report.rel_residual <= 1e-10


def test_monte_carlo_method_reports_error_estimates():
    kernel = BUILTIN_KERNELS["product_xy"]()
    law = uniform01()
    decomp = decompose(kernel, law, method=ProjectionMethod.MONTE_CARLO,
                       n_mc=4000, rng_seed=5)
    assert any(e > 0.0 for e in decomp.error_estimates)


def test_centered_pair_kernel_is_first_order_degenerate():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    report = check_degeneracy(kernel, uniform01(), claimed_order=1,
                              n_mc=20000, rng_seed=3)
    assert report.passed
    assert report.max_standardized <= report.tol_sd


def test_uncentered_product_kernel_fails_degeneracy_check():
    kernel = BUILTIN_KERNELS["product_xy"]()
    report = check_degeneracy(kernel, uniform01(), claimed_order=1,
                              n_mc=20000, rng_seed=4)
    assert not report.passed


def test_degeneracy_check_is_deterministic_given_seed():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    a = check_degeneracy(kernel, uniform01(), claimed_order=1, n_mc=5000,
                         rng_seed=9)
    b = check_degeneracy(kernel, uniform01(), claimed_order=1, n_mc=5000,
                         rng_seed=9)
    assert a.max_standardized == b.max_standardized


def test_third_order_centered_product_is_second_order_degenerate():
    kernel = separable_kernel((1.0,), ("legendre1",), 3, name="l1_cubed")
    report = check_degeneracy(kernel, uniform01(), claimed_order=2,
                              n_mc=20000, rng_seed=6)
    assert report.passed
