"""Distributional experiments against Gaussian-chaos references."""

import numpy as np
import pytest

from ustat_resample import (
    DegeneracyCheckFailed,
    bootstrap_clt_experiment,
    chaos_spec,
    efron_multinomial,
    iid_gaussian,
    multiplier_clt_experiment,
    sample_chaos,
    uniform01,
)
from ustat_resample.kernels import BUILTIN_KERNELS


def test_chaos_spec_of_centered_pair_kernel_is_standardized():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    spec = chaos_spec(kernel, uniform01())
    assert spec.order == 2
    draws = sample_chaos(spec, 200000, rng_seed=2)
    np.testing.assert_allclose(np.mean(draws), 0.0, atol=0.02)
    np.testing.assert_allclose(np.var(draws), 1.0, atol=0.03)


def test_sample_chaos_is_deterministic_given_seed():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    spec = chaos_spec(kernel, uniform01())
    np.testing.assert_array_equal(sample_chaos(spec, 500, rng_seed=7),
                                  sample_chaos(spec, 500, rng_seed=7))


def test_multiplier_experiment_shapes_and_determinism():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    res = multiplier_clt_experiment(kernel, uniform01(), iid_gaussian(),
                                    n=50, B=80, ref_draws=2000, rng_seed=3,
                                    degeneracy_n_mc=4000)
    assert res.kind == "multiplier-clt"
    assert len(res.replicates) == 80
    assert len(res.reference) == 2000
    assert 0.0 <= res.ks <= 1.0
    again = multiplier_clt_experiment(kernel, uniform01(), iid_gaussian(),
                                      n=50, B=80, ref_draws=2000, rng_seed=3,
                                      degeneracy_n_mc=4000)
    np.testing.assert_array_equal(res.replicates, again.replicates)
    assert res.ks == again.ks


def test_bootstrap_experiment_estimates_scheme_constant():
    kernel = BUILTIN_KERNELS["centered_legendre1_pair"]()
    res = bootstrap_clt_experiment(kernel, uniform01(), efron_multinomial(),
                                   n=60, B=80, ref_draws=2000, rng_seed=4,
                                   degeneracy_n_mc=4000)
    assert res.kind == "bootstrap-clt"
    assert res.c_hat > 0.0
    assert res.scheme_name == "efron_multinomial"


def test_degeneracy_gate_rejects_uncentered_kernel():
    kernel = BUILTIN_KERNELS["product_xy"]()
    with pytest.raises(DegeneracyCheckFailed):
        multiplier_clt_experiment(kernel, uniform01(), iid_gaussian(),
                                  n=40, B=20, ref_draws=200, rng_seed=1,
                                  degeneracy_n_mc=4000)


def test_gate_can_be_disabled_for_exploratory_runs():
    kernel = BUILTIN_KERNELS["product_xy"]()
    res = multiplier_clt_experiment(kernel, uniform01(), iid_gaussian(),
                                    n=40, B=20, ref_draws=200, rng_seed=1,
                                    check_kernel=False)
    assert len(res.replicates) == 20
