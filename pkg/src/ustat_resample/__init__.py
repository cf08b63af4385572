"""Compute, resample, and empirically verify U-statistics.

The package is organized around a small set of labs:

``engine``
    Exact U-statistic evaluation, multiplier reweighting, and the
    power-sum recursion for separable kernels.
``kernels`` / ``laws``
    Symmetric kernels with optional separable structure, and sampling
    laws with quadrature-backed expectations.
``hoeffding``
    Orthogonal projections, degeneracy diagnostics, and reconstruction.
``weights``
    Multiplier and bootstrap weight schemes with moment validation.
``cltlab``
    Distributional experiments against Gaussian-chaos references.
``inequality``
    Monte Carlo verification of the moment bound for weighted suprema.
``mestimation``
    Criterion maximizers (including the simplicial median) and
    weighted-bootstrap experiments for them.
``designs``
    Survey sampling designs, inverse-probability weighted statistics,
    and risk-minimization experiments under subsampling.
``cli``
    The ``ustat-resample`` experiment runner.

Everything user-facing is re-exported here; the submodules remain
importable for the finer-grained helpers.
"""

from .cltlab import (ChaosSpec, CltExperimentResult,
                     bootstrap_clt_experiment, chaos_spec,
                     multiplier_clt_experiment, sample_chaos)
from .designs import (BiasPoint, Design, DesignDraw, DesignValidation,
                      ErmProblem, ErmReport, LinearizationReport,
                      bernoulli_design, builtin_design_names,
                      design_from_config, draw_design, erm_experiment,
                      full_sample_draw, ht_bias_curve, ht_m_estimator,
                      ht_ustat, linearization_check, load_population,
                      monotone_ranking_law, poisson_unequal_design,
                      ranking_risk, srswor_design, stratified_design,
                      threshold_ranking_problem, validate_design)
from .engine import (DecoupledData, FunctionClass, Normalization,
                     UStatValue, decoupled_sym_sup, draw_decoupled,
                     elementary_symmetric, multiplier_ustat,
                     newton_from_power_sums, ustat, weighted_distinct_sum)
from .errors import (ConfigInvalid, CovarianceNotPSD, DegeneracyCheckFailed,
                     DegeneratePosition, DesignInvalid, DimensionMismatch,
                     EnumerationTooLarge, EnvelopeIncomplete,
                     InfiniteMomentNorm, KernelOrderTooLarge,
                     MissingAnalyticFields, NonSymmetricKernel,
                     OptimizerBoundsMissing, OrderMismatch, SampleTooSmall,
                     SumConstraintViolated, UStatError, W1Violation)
from .hoeffding import (DegeneracyLevel, DegeneracyReport,
                        HoeffdingDecomposition, ProjectionMethod,
                        ReconstructionReport, check_degeneracy, decompose,
                        hoeffding_project, reconstruct)
from .inequality import (InequalityConfig, InequalityReport, LhsEstimate,
                         PermutationMomentResult, PsiEnvelope,
                         check_inequality, default_inequality_configs,
                         envelope_tail_integral, estimate_psi,
                         inequality_constant, multiplier_bound_rhs,
                         multiplier_sup_lhs, permutation_moment_check,
                         power_envelope, power_envelope_bound,
                         run_inequality_suite)
from .kernels import (BUILTIN_KERNELS, Factor, Kernel, builtin_kernel_names,
                      constant_kernel, factor_names, general_kernel,
                      kernel_from_config, separable_from_factors,
                      separable_kernel, simplicial_indicator, symmetrize)
from .laws import (Law, bivariate_normal, builtin_law_names, finite_support,
                   law_from_config, normal, uniform01)
from .mestimation import (BootstrapMResult, CoverageResult, GridRefine,
                          MCriterion, SimplexSearch, bootstrap_ci_coverage,
                          bootstrap_m_experiment, fit_m_estimator,
                          quadratic_pair_criterion, simplicial_depth,
                          simplicial_median_criterion, weighted_pair_mean)
from .rngutil import derive_seed, substream
from .weights import (C2Estimate, Lp1Result, WeightScheme, WeightTrendRow,
                      WeightValidation, bayesian_bootstrap,
                      builtin_scheme_names, efron_multinomial, estimate_c2,
                      gen_weights, iid_gaussian, iid_pareto, iid_rademacher,
                      lp1_norm, require_finite_lp1, scheme_from_config,
                      validate_W)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # engine
    "DecoupledData", "FunctionClass", "Normalization", "UStatValue",
    "decoupled_sym_sup", "draw_decoupled", "elementary_symmetric",
    "multiplier_ustat", "newton_from_power_sums", "ustat",
    "weighted_distinct_sum",
    # kernels
    "BUILTIN_KERNELS", "Factor", "Kernel", "builtin_kernel_names",
    "constant_kernel", "factor_names", "general_kernel",
    "kernel_from_config", "separable_from_factors", "separable_kernel",
    "simplicial_indicator", "symmetrize",
    # laws
    "Law", "bivariate_normal", "builtin_law_names", "finite_support",
    "law_from_config", "normal", "uniform01",
    # hoeffding
    "DegeneracyLevel", "DegeneracyReport", "HoeffdingDecomposition",
    "ProjectionMethod", "ReconstructionReport", "check_degeneracy",
    "decompose", "hoeffding_project", "reconstruct",
    # weights
    "C2Estimate", "Lp1Result", "WeightScheme", "WeightTrendRow",
    "WeightValidation", "bayesian_bootstrap", "builtin_scheme_names",
    "efron_multinomial", "estimate_c2", "gen_weights", "iid_gaussian",
    "iid_pareto", "iid_rademacher", "lp1_norm", "require_finite_lp1",
    "scheme_from_config", "validate_W",
    # cltlab
    "ChaosSpec", "CltExperimentResult", "bootstrap_clt_experiment",
    "chaos_spec", "multiplier_clt_experiment", "sample_chaos",
    # inequality
    "InequalityConfig", "InequalityReport", "LhsEstimate",
    "PermutationMomentResult", "PsiEnvelope", "check_inequality",
    "default_inequality_configs", "envelope_tail_integral", "estimate_psi",
    "inequality_constant", "multiplier_bound_rhs", "multiplier_sup_lhs",
    "permutation_moment_check", "power_envelope", "power_envelope_bound",
    "run_inequality_suite",
    # mestimation
    "BootstrapMResult", "CoverageResult", "GridRefine", "MCriterion",
    "SimplexSearch", "bootstrap_ci_coverage", "bootstrap_m_experiment",
    "fit_m_estimator", "quadratic_pair_criterion", "simplicial_depth",
    "simplicial_median_criterion", "weighted_pair_mean",
    # designs
    "BiasPoint", "Design", "DesignDraw", "DesignValidation", "ErmProblem",
    "ErmReport", "LinearizationReport", "bernoulli_design",
    "builtin_design_names", "design_from_config", "draw_design",
    "erm_experiment", "full_sample_draw", "ht_bias_curve", "ht_m_estimator",
    "ht_ustat", "linearization_check", "load_population",
    "monotone_ranking_law", "poisson_unequal_design", "ranking_risk",
    "srswor_design", "stratified_design", "threshold_ranking_problem",
    "validate_design",
    # errors
    "ConfigInvalid", "CovarianceNotPSD", "DegeneracyCheckFailed",
    "DegeneratePosition", "DesignInvalid", "DimensionMismatch",
    "EnumerationTooLarge", "EnvelopeIncomplete", "InfiniteMomentNorm",
    "KernelOrderTooLarge", "MissingAnalyticFields", "NonSymmetricKernel",
    "OptimizerBoundsMissing", "OrderMismatch", "SampleTooSmall",
    "SumConstraintViolated", "UStatError", "W1Violation",
    # seeding
    "derive_seed", "substream",
]
