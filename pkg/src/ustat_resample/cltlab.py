"""Gaussian-chaos reference laws and multiplier/bootstrap CLT
experiments.

The limit of a normalized multiplier U-statistic of a completely
degenerate separable kernel is a polynomial in a Gaussian vector: with
G the isonormal image of the factors (covariance = their L2 inner
products) the limit draw is

    sum_q c_q sqrt(m!) R_m(G_q, E psi_q^2, 0, ..., 0)

where R_m is the Newton polynomial expressing the m-th elementary
symmetric function in power sums.  Experiments compare finite-n
replicate distributions against reference chaos draws by the
two-sample KS distance.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import multiplier_ustat, newton_from_power_sums
from .errors import ConfigInvalid, CovarianceNotPSD, DegeneracyCheckFailed, W1Violation
from .hoeffding import DegeneracyReport, check_degeneracy
from .kernels import Kernel
from .laws import Law
from .numerics import ks_statistic
from .rngutil import derive_seed, substream
from .weights import WeightScheme, estimate_c2, validate_W

_EIG_TOL = -1e-10


@dataclass(frozen=True)
class ChaosSpec:
    """Parameters of a Gaussian-chaos law: linear combination weights,
    the Gaussian covariance of the factor images, and the factor second
    moments entering the Newton polynomial."""

    order: int
    coeffs: tuple[float, ...]
    cov: np.ndarray
    second_moments: tuple[float, ...]


def chaos_spec(kernel: Kernel, law: Law) -> ChaosSpec:
    """Chaos parameters of a separable kernel under ``law``.

    The kernel's factors must be centered under the law (completely
    degenerate kernel); experiments verify that separately.
    """
    if not kernel.is_separable:
        raise ConfigInvalid("kernel", "chaos reference needs a separable kernel")
    q = len(kernel.factors)
    cov = np.empty((q, q))
    for i in range(q):
        for j in range(i, q):
            cov[i, j] = cov[j, i] = law.expect(
                lambda x, fi=kernel.factors[i], fj=kernel.factors[j]: fi.fn(x) * fj.fn(x))
    return ChaosSpec(order=kernel.order, coeffs=kernel.coeffs, cov=cov,
                     second_moments=tuple(float(cov[i, i]) for i in range(q)))


def sample_chaos(spec: ChaosSpec, n_draws: int, rng_seed: int) -> np.ndarray:
    """Draws from the chaos law; the covariance must be PSD within
    -1e-10 on its smallest eigenvalue."""
    vals, vecs = np.linalg.eigh(spec.cov)
    if vals.min() < _EIG_TOL:
        raise CovarianceNotPSD(f"smallest eigenvalue {vals.min():.3e}")
    root = vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))
    rng = substream(rng_seed, "chaos")
    z = rng.standard_normal((n_draws, len(spec.coeffs)))
    g = z @ root.T
    m = spec.order
    scale = math.sqrt(math.factorial(m))
    total = np.zeros(n_draws)
    for qi, (c, s2) in enumerate(zip(spec.coeffs, spec.second_moments)):
        powers = [g[:, qi], s2] + [0.0] * (m - 2)
        total += c * scale * np.asarray(newton_from_power_sums(powers[:m]))
    return total


@dataclass(frozen=True)
class CltExperimentResult:
    """Replicates, reference draws, and their KS distance."""

    kind: str
    replicates: np.ndarray
    reference: np.ndarray
    ks: float
    c_hat: float
    n: int
    order: int
    kernel_name: str
    law_kind: str
    scheme_name: str
    rng_seed: int
    degeneracy: Optional[DegeneracyReport]


def _run_replicates(worker, B: int, threads: int) -> np.ndarray:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.fromiter(pool.map(worker, range(B)), dtype=np.float64, count=B)
    return np.fromiter(map(worker, range(B)), dtype=np.float64, count=B)


def _degeneracy_gate(kernel: Kernel, law: Law, rng_seed: int,
                     n_mc: int) -> DegeneracyReport:
    report = check_degeneracy(kernel, law, kernel.order - 1, n_mc=n_mc,
                              rng_seed=derive_seed(rng_seed, "degeneracy-gate"))
    if not report.passed:
        raise DegeneracyCheckFailed(
            f"kernel {kernel.name!r} failed the complete-degeneracy check: "
            f"max standardized deviation {report.max_standardized:.2f}")
    return report


def multiplier_clt_experiment(kernel: Kernel, law: Law, scheme: WeightScheme,
                              n: int, B: int, ref_draws: int, rng_seed: int,
                              threads: int = 1, check_kernel: bool = True,
                              degeneracy_n_mc: int = 50000) -> CltExperimentResult:
    """Distribution of sqrt(C(n,m)) U_{n,w}(f) under iid centered
    unit-variance multipliers versus the chaos reference."""
    if not scheme.centered_unit_variance:
        raise ConfigInvalid("scheme",
                            f"{scheme.name} is not centered with unit variance")
    degeneracy = _degeneracy_gate(kernel, law, rng_seed, degeneracy_n_mc) \
        if check_kernel else None
    m = kernel.order
    scale = math.sqrt(math.comb(n, m))

    def worker(b: int) -> float:
        rng = substream(rng_seed, "replicate", b)
        x = law.sample(rng, n)
        w = scheme.sample(rng, n)
        return scale * multiplier_ustat(x, w, kernel).value

    replicates = _run_replicates(worker, B, threads)
    reference = sample_chaos(chaos_spec(kernel, law), ref_draws,
                             derive_seed(rng_seed, "reference"))
    return CltExperimentResult(
        kind="multiplier-clt", replicates=replicates, reference=reference,
        ks=ks_statistic(replicates, reference), c_hat=1.0, n=n, order=m,
        kernel_name=kernel.name, law_kind=law.kind, scheme_name=scheme.name,
        rng_seed=rng_seed, degeneracy=degeneracy)


def bootstrap_clt_experiment(kernel: Kernel, law: Law, scheme: WeightScheme,
                             n: int, B: int, ref_draws: int, rng_seed: int,
                             threads: int = 1, check_kernel: bool = True,
                             degeneracy_n_mc: int = 50000,
                             c2_reps: int = 200) -> CltExperimentResult:
    """Conditional distribution of sqrt(C(n,m)) U-statistics with
    centered exchangeable bootstrap weights on one frozen dataset,
    versus the chaos reference scaled by the estimated c."""
    if not scheme.exchangeable_sum_n:
        raise W1Violation(f"{scheme.name} is not a bootstrap weight scheme")
    probe = validate_W(scheme, n, reps=20, rng_seed=derive_seed(rng_seed, "w1-probe"))
    if not probe.w1_pass:
        raise W1Violation(
            f"{scheme.name}: min weight {probe.min_weight:.3e}, "
            f"sum gap {probe.worst_sum_gap:.3e}")
    degeneracy = _degeneracy_gate(kernel, law, rng_seed, degeneracy_n_mc) \
        if check_kernel else None
    m = kernel.order
    scale = math.sqrt(math.comb(n, m))
    x = law.sample(substream(rng_seed, "data"), n)

    def worker(b: int) -> float:
        rng = substream(rng_seed, "replicate", b)
        w = scheme.sample(rng, n)
        return scale * multiplier_ustat(x, w, kernel, center_weights=True).value

    replicates = _run_replicates(worker, B, threads)
    c2 = estimate_c2(scheme, n, reps=c2_reps, rng_seed=derive_seed(rng_seed, "c2"))
    c_hat = math.sqrt(max(c2.mean, 0.0))
    reference = sample_chaos(chaos_spec(kernel, law), ref_draws,
                             derive_seed(rng_seed, "reference"))
    return CltExperimentResult(
        kind="bootstrap-clt", replicates=replicates, reference=reference,
        ks=ks_statistic(replicates, c_hat * reference), c_hat=c_hat, n=n,
        order=m, kernel_name=kernel.name, law_kind=law.kind,
        scheme_name=scheme.name, rng_seed=rng_seed, degeneracy=degeneracy)
