"""Experiment runner: declarative configs in, delimited results out.

A config is a single TOML file.  The ``[experiment]`` table picks the
kind, gives the run a name, and fixes the master seed; the remaining
tables (``[kernel]``, ``[law]``, ``[scheme]``, ``[design]``, ``[data]``,
``[params]``) describe the inputs each kind needs.  Every random stream
is derived from the master seed and a label path, so two runs of the
same config with ``--threads 1`` produce byte-identical outputs; the
``USTAT_SEED`` environment variable overrides the config seed.

Each run writes into one directory:

``results.csv``
    The replicate or per-row table of the experiment.
``summary.json``
    Scalar summaries plus the named pass/fail checks.
``figure.png``
    A rendering of the result table (suppressed by ``--no-figures``).
``manifest.json``
    Config echo, library version, derived seeds, wall time, and SHA-256
    digests of the other outputs; written last.

Exit codes: 0 when every configured check passes, 2 when a check fails,
1 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:
    import tomli as _toml

from . import __version__
from .cltlab import bootstrap_clt_experiment, multiplier_clt_experiment
from .designs import (builtin_design_names, design_from_config,
                      erm_experiment, ht_bias_curve, linearization_check,
                      load_population, srswor_design,
                      threshold_ranking_problem, validate_design)
from .engine import Normalization, ustat
from .errors import ConfigInvalid, UStatError
from .hoeffding import ProjectionMethod, decompose, reconstruct
from .inequality import default_inequality_configs, run_inequality_suite
from .kernels import builtin_kernel_names, factor_names, kernel_from_config
from .laws import builtin_law_names, law_from_config
from .mestimation import (GridRefine, bootstrap_ci_coverage,
                          bootstrap_m_experiment, quadratic_pair_criterion,
                          simplicial_median_criterion)
from .rngutil import derive_seed, substream
from .weights import builtin_scheme_names, scheme_from_config, validate_W

__all__ = ["ExperimentConfig", "RunManifest", "derive_seed", "main",
           "run_config"]

_NORMALIZATIONS = {
    "binomial_average": Normalization.BINOMIAL_AVERAGE,
    "raw_sum": Normalization.RAW_SUM,
    "distinct_tuple_sum": Normalization.DISTINCT_TUPLE_SUM,
}

_METHODS = {
    "symbolic": ProjectionMethod.SYMBOLIC,
    "finite_exact": ProjectionMethod.FINITE_EXACT,
    "monte_carlo": ProjectionMethod.MONTE_CARLO,
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """A parsed experiment description.

    ``seed`` is the master seed every substream derives from; it comes
    from ``USTAT_SEED`` when set, else from ``[experiment] seed``.
    """

    kind: str
    name: str
    seed: int
    kernel: dict
    law: dict
    scheme: dict
    design: dict
    data: dict
    params: dict
    output_dir: Optional[str]


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written alongside the results.

    ``outputs`` maps each emitted file name to its SHA-256 digest, so a
    rerun can be compared file by file; ``wall_time_s`` is informational
    and excluded from bit-identity comparisons.
    """

    kind: str
    name: str
    version: str
    master_seed: int
    threads: int
    derived_seeds: dict
    wall_time_s: float
    outputs: dict
    config: dict


@dataclasses.dataclass
class RunResult:
    """What a runner hands back to the writer."""

    rows: list
    summary: dict
    checks: dict
    seeds: dict
    figure: Optional[Callable] = None


def _jsonable(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _scalar(value):
    """Render a cell for the CSV: plain str, full float precision."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return str(int(value))
    return str(value)


def _positive_int(table: dict, key: str, default: Optional[int] = None,
                  where: str = "params") -> int:
    if key not in table:
        if default is None:
            raise ConfigInvalid(f"{where}.{key}", "required and missing")
        return default
    try:
        value = int(table[key])
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{where}.{key}",
                            f"expected an integer, got {table[key]!r}") from exc
    if value <= 0:
        raise ConfigInvalid(f"{where}.{key}", f"must be positive, got {value}")
    return value


def _int_list(table: dict, key: str, default=None,
              where: str = "params") -> list:
    if key not in table:
        if default is None:
            raise ConfigInvalid(f"{where}.{key}", "required and missing")
        return list(default)
    raw = table[key]
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigInvalid(f"{where}.{key}", "expected a non-empty list")
    return [_positive_int({"v": v}, "v", where=f"{where}.{key}") for v in raw]


def _require_table(cfg: ExperimentConfig, name: str) -> dict:
    table = getattr(cfg, name)
    if not table:
        raise ConfigInvalid(name, f"the {cfg.kind!r} experiment needs a "
                                  f"[{name}] table")
    return table


def _optimizer_from_params(params: dict) -> Optional[GridRefine]:
    if "grid_levels" not in params and "grid_points" not in params:
        return None
    return GridRefine(levels=_positive_int(params, "grid_levels", 3),
                      points_per_axis=_positive_int(params, "grid_points", 21))


def _problem_from_params(params: dict):
    name = params.get("problem", "quadratic_pair")
    theta0 = params.get("theta0", 0.0)
    if name == "quadratic_pair":
        return quadratic_pair_criterion(theta0=float(theta0))
    if name == "simplicial_median":
        if isinstance(theta0, (int, float)):
            theta0 = (0.0, 0.0)
        return simplicial_median_criterion(theta0=tuple(float(t)
                                                        for t in theta0))
    raise ConfigInvalid("params.problem",
                        f"unknown problem {name!r}; choose from "
                        "['quadratic_pair', 'simplicial_median']")


def _data_points(cfg: ExperimentConfig) -> tuple:
    """Resolve the sample for data-driven kinds.

    Priority: inline ``[data] values``, then ``[data] path`` (population
    CSV), then a ``[law]`` draw of ``params.n`` points.  Returns the
    points and the derived-seed record.
    """
    data = cfg.data
    if "values" in data:
        points = np.asarray(data["values"], dtype=np.float64)
        if points.ndim not in (1, 2) or points.shape[0] == 0:
            raise ConfigInvalid("data.values",
                                "expected a non-empty list of numbers "
                                "or of equal-length rows")
        return points, {}
    if "path" in data:
        points, _ = load_population(data["path"])
        return points, {}
    law = law_from_config(_require_table(cfg, "law"))
    n = _positive_int(cfg.params, "n")
    seed = derive_seed(cfg.seed, "data")
    return law.sample(substream(cfg.seed, "data"), n), {"data": seed}


def _ecdf_check(checks: dict, params: dict, ks_values) -> None:
    if "ks_max" in params:
        ks_max = float(params["ks_max"])
        worst = max(float(k) for k in np.atleast_1d(ks_values))
        checks[f"ks<={ks_max:g}"] = worst <= ks_max


def _run_ustat(cfg: ExperimentConfig, threads: int) -> RunResult:
    kernel = kernel_from_config(_require_table(cfg, "kernel"))
    points, seeds = _data_points(cfg)
    norm_name = cfg.params.get("normalization", "binomial_average")
    if norm_name not in _NORMALIZATIONS:
        raise ConfigInvalid("params.normalization",
                            f"unknown normalization {norm_name!r}; choose "
                            f"from {sorted(_NORMALIZATIONS)}")
    result = ustat(points, kernel, normalization=_NORMALIZATIONS[norm_name])
    row = {"kernel": kernel.name, "n": result.n, "order": result.order,
           "normalization": norm_name, "value": result.value}
    checks = {}
    if "expect_value" in cfg.params:
        target = float(cfg.params["expect_value"])
        tol = float(cfg.params.get("expect_tol", 1e-9))
        checks[f"value~{target:g}"] = abs(result.value - target) <= tol
    summary = dict(row)

    def figure(path):
        from . import figures
        figures.render_value_bars([norm_name], [result.value],
                                  f"{kernel.name} on n={result.n}", path)

    return RunResult([row], summary, checks, seeds, figure)


def _run_hoeffding(cfg: ExperimentConfig, threads: int) -> RunResult:
    kernel = kernel_from_config(_require_table(cfg, "kernel"))
    law = law_from_config(_require_table(cfg, "law"))
    params = cfg.params
    method = None
    if "method" in params:
        if params["method"] not in _METHODS:
            raise ConfigInvalid("params.method",
                                f"unknown method {params['method']!r}; "
                                f"choose from {sorted(_METHODS)}")
        method = _METHODS[params["method"]]
    n_mc = _positive_int(params, "n_mc", 20000)
    sample_n = _positive_int(params, "sample_n", 25)
    seeds = {"projection": derive_seed(cfg.seed, "projection"),
             "sample": derive_seed(cfg.seed, "sample")}
    decomp = decompose(kernel, law, method=method, n_mc=n_mc,
                       rng_seed=seeds["projection"])
    points = law.sample(substream(cfg.seed, "sample"), sample_n)
    report = reconstruct(decomp, points)
    rows = [{"order": k, "term": term, "error_estimate": err}
            for k, (term, err) in enumerate(zip(report.terms,
                                                decomp.error_estimates))]
    checks = {}
    tol = float(params.get("residual_tol", 1e-8))
    checks[f"rel_residual<={tol:g}"] = report.rel_residual <= tol
    summary = {"kernel": kernel.name, "law": law.kind,
               "method": decomp.method.name.lower(), "sample_n": sample_n,
               "value": report.value, "reconstruction": report.reconstruction,
               "residual": report.residual,
               "rel_residual": report.rel_residual,
               "terms": list(report.terms),
               "error_estimates": list(decomp.error_estimates)}

    def figure(path):
        from . import figures
        labels = [f"order {r['order']}" for r in rows]
        figures.render_value_bars(labels, [r["term"] for r in rows],
                                  f"projection terms of {kernel.name}", path)

    return RunResult(rows, summary, checks, seeds, figure)


def _run_clt(cfg: ExperimentConfig, threads: int, kind: str) -> RunResult:
    kernel = kernel_from_config(_require_table(cfg, "kernel"))
    law = law_from_config(_require_table(cfg, "law"))
    scheme = scheme_from_config(_require_table(cfg, "scheme"))
    params = cfg.params
    n = _positive_int(params, "n")
    B = _positive_int(params, "B")
    ref_draws = _positive_int(params, "ref_draws", 20000)
    runner = (multiplier_clt_experiment if kind == "multiplier-clt"
              else bootstrap_clt_experiment)
    res = runner(kernel, law, scheme, n, B, ref_draws, rng_seed=cfg.seed,
                 threads=threads)
    rows = [{"replicate": b, "value": v}
            for b, v in enumerate(res.replicates)]
    checks = {}
    _ecdf_check(checks, params, res.ks)
    summary = {"kind": res.kind, "kernel": res.kernel_name,
               "law": res.law_kind, "scheme": res.scheme_name,
               "n": res.n, "B": B, "ref_draws": ref_draws,
               "order": res.order, "ks": res.ks, "c_hat": res.c_hat,
               "replicate_mean": float(np.mean(res.replicates)),
               "replicate_sd": float(np.std(res.replicates, ddof=1)),
               "reference_sd": float(np.std(res.reference, ddof=1)),
               "degeneracy_passed": res.degeneracy.passed,
               "degeneracy_max_standardized": res.degeneracy.max_standardized}

    def figure(path):
        from . import figures
        figures.render_ecdf_pair(res.replicates, res.reference,
                                 "resampled", "reference", res.ks,
                                 f"{res.kind}: {kernel.name}, n={n}", path)

    return RunResult(rows, summary, checks, {"experiment": cfg.seed}, figure)


def _run_multiplier_clt(cfg, threads):
    return _run_clt(cfg, threads, "multiplier-clt")


def _run_bootstrap_clt(cfg, threads):
    return _run_clt(cfg, threads, "bootstrap-clt")


def _run_inequality(cfg: ExperimentConfig, threads: int) -> RunResult:
    params = cfg.params
    configs = default_inequality_configs(rng_seed=cfg.seed)
    if "limit" in params:
        configs = configs[:_positive_int(params, "limit")]
    reports = run_inequality_suite(configs, threads=threads)
    rows = [r.to_row() for r in reports]
    all_passed = all(r.passed for r in reports)
    checks = {"bound_holds_in_all_configs": all_passed}
    summary = {"configs": len(reports), "all_passed": all_passed,
               "min_margin": min(r.margin for r in reports),
               "failures": [r.config_name for r in reports if not r.passed]}
    seeds = {"suite": cfg.seed}

    def figure(path):
        from . import figures
        figures.render_bound_scatter([r.lhs_mean for r in reports],
                                     [r.rhs for r in reports],
                                     [r.passed for r in reports],
                                     "moment bound across configs", path)

    return RunResult(rows, summary, checks, seeds, figure)


def _run_bootstrap_m(cfg: ExperimentConfig, threads: int) -> RunResult:
    law = law_from_config(_require_table(cfg, "law"))
    scheme = scheme_from_config(_require_table(cfg, "scheme"))
    problem = _problem_from_params(cfg.params)
    params = cfg.params
    n = _positive_int(params, "n")
    B = _positive_int(params, "B")
    optimizer = _optimizer_from_params(params)
    mode = params.get("mode", "distribution")
    seeds = {"experiment": cfg.seed}
    if mode == "coverage":
        datasets = _positive_int(params, "datasets")
        level = float(params.get("level", 0.95))
        res = bootstrap_ci_coverage(problem, law, scheme, n, B, datasets,
                                    level=level, optimizer=optimizer,
                                    rng_seed=cfg.seed, threads=threads)
        rows = [{"coord": j, "coverage": c}
                for j, c in enumerate(res.per_coord)]
        checks = {}
        if "coverage_min" in params or "coverage_max" in params:
            lo = float(params.get("coverage_min", 0.0))
            hi = float(params.get("coverage_max", 1.0))
            checks[f"coverage in [{lo:g},{hi:g}]"] = (
                lo <= res.mean_coverage <= hi)
        summary = {"mode": mode, "problem": res.problem_name,
                   "scheme": res.scheme_name, "n": n, "B": B,
                   "datasets": datasets, "level": level,
                   "per_coord": res.per_coord,
                   "joint_coverage": res.joint_coverage,
                   "mean_coverage": res.mean_coverage}

        def figure(path):
            from . import figures
            labels = [f"coord {r['coord'] + 1}" for r in rows]
            figures.render_value_bars(labels, [r["coverage"] for r in rows],
                                      f"interval coverage at level {level:g}",
                                      path)

        return RunResult(rows, summary, checks, seeds, figure)
    if mode != "distribution":
        raise ConfigInvalid("params.mode",
                            f"unknown mode {mode!r}; choose from "
                            "['distribution', 'coverage']")
    mc_datasets = _positive_int(params, "mc_datasets")
    res = bootstrap_m_experiment(problem, law, scheme, n, B, mc_datasets,
                                 optimizer=optimizer, rng_seed=cfg.seed,
                                 threads=threads)
    cond = np.atleast_2d(np.asarray(res.conditional))
    samp = np.atleast_2d(np.asarray(res.sampling))
    if cond.shape[0] in (1,) and cond.shape[1] != len(res.ks):
        cond = cond.T
        samp = samp.T
    rows = []
    for j in range(cond.shape[1]):
        rows.extend({"source": "conditional", "coord": j, "index": i,
                     "value": v} for i, v in enumerate(cond[:, j]))
        rows.extend({"source": "sampling", "coord": j, "index": i,
                     "value": v} for i, v in enumerate(samp[:, j]))
    checks = {}
    _ecdf_check(checks, params, res.ks)
    summary = {"mode": mode, "problem": res.problem_name,
               "scheme": res.scheme_name, "n": n, "B": B,
               "mc_datasets": mc_datasets, "theta_hat": res.theta_hat,
               "ks": res.ks, "c_hat": res.c_hat,
               "sd_conditional": [float(np.std(cond[:, j], ddof=1))
                                  for j in range(cond.shape[1])],
               "sd_scaled_sampling": [float(res.c_hat
                                            * np.std(samp[:, j], ddof=1))
                                      for j in range(samp.shape[1])]}

    def figure(path):
        from . import figures
        pairs = [(cond[:, j], res.c_hat * samp[:, j])
                 for j in range(cond.shape[1])]
        figures.render_ecdf_grid(pairs, "conditional", "scaled sampling",
                                 list(res.ks),
                                 f"{res.problem_name}, n={n}", path)

    return RunResult(rows, summary, checks, seeds, figure)


def _designs_for_ladder(cfg: ExperimentConfig, n_values) -> list:
    """One design per population size.

    A fixed-size design applies unchanged at every N; an ``srswor``
    table may give ``fraction`` instead of ``n_of_N`` so the sample
    grows with the population.
    """
    table = _require_table(cfg, "design")
    if table.get("kind") == "srswor" and "fraction" in table:
        frac = float(table["fraction"])
        if not 0.0 < frac < 1.0:
            raise ConfigInvalid("design.fraction",
                                f"must lie in (0, 1), got {frac}")
        return [srswor_design(max(1, round(frac * N))) for N in n_values]
    design = design_from_config(table)
    return [design] * len(n_values)


def _run_sampling(cfg: ExperimentConfig, threads: int) -> RunResult:
    params = cfg.params
    mode = params.get("mode", "bias")
    n_values = _int_list(params, "N_list")
    seeds = {"experiment": cfg.seed}
    if mode == "bias":
        kernel = kernel_from_config(_require_table(cfg, "kernel"))
        law = law_from_config(_require_table(cfg, "law"))
        designs = _designs_for_ladder(cfg, n_values)
        draws = _positive_int(params, "draws", 10000)
        points = ht_bias_curve(kernel, law, list(zip(n_values, designs)),
                               draws=draws, rng_seed=cfg.seed,
                               control_variate=bool(
                                   params.get("control_variate", True)))
        rows = [{"N": p.N, "full_value": p.full_value, "mc_mean": p.mc_mean,
                 "mc_se": p.mc_se, "bias": p.bias,
                 "exact_bias": p.exact_bias, "draws": p.draws}
                for p in points]
        checks = {}
        if "bias_z_max" in params:
            z = float(params["bias_z_max"])
            checks[f"|bias-exact|<={z:g}se"] = all(
                abs(p.bias - (p.exact_bias or 0.0)) <= z * p.mc_se
                for p in points)
        summary = {"mode": mode, "kernel": kernel.name, "law": law.kind,
                   "designs": [d.name for d in designs], "draws": draws,
                   "rows": _jsonable(rows)}

        def figure(path):
            from . import figures
            figures.render_decay(
                [p.N for p in points],
                {"|bias|": [abs(p.bias) for p in points],
                 "mc se": [p.mc_se for p in points]},
                "absolute bias", "weighted-sum bias against population size",
                path, reference_slope=-1.0)

        return RunResult(rows, summary, checks, seeds, figure)
    if mode != "linearize":
        raise ConfigInvalid("params.mode",
                            f"unknown mode {mode!r}; choose from "
                            "['bias', 'linearize']")
    problem = _problem_from_params(params)
    law = law_from_config(_require_table(cfg, "law"))
    design = design_from_config(_require_table(cfg, "design"))
    mc_reps = _positive_int(params, "mc_reps", 200)
    report = linearization_check(problem, law, design, n_values,
                                 mc_reps=mc_reps, rng_seed=cfg.seed,
                                 optimizer=_optimizer_from_params(params),
                                 threads=threads)
    rows = [{"N": N, "residual_rms": r}
            for N, r in zip(report.n_values, report.residual_rms)]
    checks = {}
    if "min_rms_decay" in params and len(rows) >= 2:
        target = float(params["min_rms_decay"])
        ratio = report.residual_rms[0] / report.residual_rms[-1]
        checks[f"rms decay>={target:g}"] = ratio >= target
    summary = {"mode": mode, "problem": report.problem_name,
               "design": report.design_name, "mc_reps": mc_reps,
               "N_list": list(report.n_values),
               "residual_rms": list(report.residual_rms)}

    def figure(path):
        from . import figures
        figures.render_decay(list(report.n_values),
                             {"residual rms": list(report.residual_rms)},
                             "rms of linearization residual",
                             f"linearization of {report.problem_name}",
                             path, reference_slope=-0.5)

    return RunResult(rows, summary, checks, seeds, figure)


def _run_erm(cfg: ExperimentConfig, threads: int) -> RunResult:
    params = cfg.params
    problem = threshold_ranking_problem()
    design = design_from_config(_require_table(cfg, "design"))
    n_values = _int_list(params, "N_list")
    mc_reps = _positive_int(params, "mc_reps", 200)
    report = erm_experiment(problem, design, n_values, mc_reps=mc_reps,
                            rng_seed=cfg.seed, threads=threads)
    excess = np.asarray(report.excess)
    q25 = np.quantile(excess, 0.25, axis=1)
    q75 = np.quantile(excess, 0.75, axis=1)
    rows = [{"N": N, "median_excess": m, "q25": lo, "q75": hi}
            for N, m, lo, hi in zip(report.n_values, report.medians,
                                    q25, q75)]
    medians = list(report.medians)
    inversions = sum(1 for a, b in zip(medians, medians[1:]) if b > a)
    checks = {}
    if bool(params.get("require_monotone", True)):
        allowed = _positive_int(params, "allowed_inversions", 1)
        checks[f"median inversions<={allowed}"] = inversions <= allowed
    summary = {"problem": report.problem_name, "design": report.design_name,
               "N_list": list(report.n_values), "mc_reps": mc_reps,
               "medians": medians, "inversions": inversions}

    def figure(path):
        from . import figures
        figures.render_quantile_band(list(report.n_values), medians,
                                     q25.tolist(), q75.tolist(),
                                     "excess risk",
                                     f"{report.problem_name} under "
                                     f"{report.design_name}", path)

    return RunResult(rows, summary, checks, {"experiment": cfg.seed}, figure)


def _run_validate_weights(cfg: ExperimentConfig, threads: int) -> RunResult:
    scheme = scheme_from_config(_require_table(cfg, "scheme"))
    params = cfg.params
    n = _positive_int(params, "n", 256)
    reps = _positive_int(params, "reps", 200)
    val = validate_W(scheme, n, reps=reps, rng_seed=cfg.seed)
    rows = [{"n": row.n, "max_sq_over_n": row.max_sq_over_n,
             "c2_mean": row.c2_mean, "c2_se": row.c2_se}
            for row in val.trend]
    checks = {}
    if scheme.exchangeable_sum_n:
        checks["bootstrap weight constraints hold"] = val.w1_pass
    if "swap_ks_max" in params:
        cap = float(params["swap_ks_max"])
        checks[f"swap ks<={cap:g}"] = val.swap_ks <= cap
    summary = {"scheme": scheme.name, "n": n, "reps": reps,
               "w1_pass": val.w1_pass, "min_weight": val.min_weight,
               "worst_sum_gap": val.worst_sum_gap, "swap_ks": val.swap_ks}

    def figure(path):
        from . import figures
        figures.render_decay([r["n"] for r in rows],
                             {"max w^2/n": [r["max_sq_over_n"] for r in rows],
                              "c2 mean": [r["c2_mean"] for r in rows]},
                             "weight moments", f"{scheme.name} weight trend",
                             path)

    return RunResult(rows, summary, checks, {"validate": cfg.seed}, figure)


_RUNNERS = {
    "ustat": _run_ustat,
    "hoeffding": _run_hoeffding,
    "multiplier-clt": _run_multiplier_clt,
    "bootstrap-clt": _run_bootstrap_clt,
    "inequality": _run_inequality,
    "bootstrap-m": _run_bootstrap_m,
    "sampling": _run_sampling,
    "erm": _run_erm,
    "validate-weights": _run_validate_weights,
}


def _load_raw_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return _toml.load(fh)
    except FileNotFoundError as exc:
        raise ConfigInvalid("config", f"no such file: {path}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigInvalid("config", f"cannot parse {path}: {exc}") from exc


def _config_from_raw(raw: dict) -> ExperimentConfig:
    exp = raw.get("experiment")
    if not isinstance(exp, dict):
        raise ConfigInvalid("experiment", "missing [experiment] table")
    kind = exp.get("kind")
    if kind not in _RUNNERS:
        raise ConfigInvalid("experiment.kind",
                            f"unknown kind {kind!r}; choose from "
                            f"{sorted(_RUNNERS)}")
    env_seed = os.environ.get("USTAT_SEED")
    if env_seed is not None and env_seed != "":
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigInvalid("USTAT_SEED",
                                f"expected an integer, got "
                                f"{env_seed!r}") from exc
    elif "seed" in exp:
        try:
            seed = int(exp["seed"])
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid("experiment.seed",
                                f"expected an integer, got "
                                f"{exp['seed']!r}") from exc
    else:
        raise ConfigInvalid("experiment.seed",
                            "a master seed is required "
                            "(no wall-clock seeding)")
    name = str(exp.get("name", kind))
    output = raw.get("output", {})
    return ExperimentConfig(kind=kind, name=name, seed=seed,
                            kernel=raw.get("kernel", {}),
                            law=raw.get("law", {}),
                            scheme=raw.get("scheme", {}),
                            design=raw.get("design", {}),
                            data=raw.get("data", {}),
                            params=raw.get("params", {}),
                            output_dir=output.get("dir"))


def _write_csv(path, rows) -> None:
    fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames,
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _scalar(v) for k, v in row.items()})


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def run_config(config_path, out_dir=None, threads: int = 1,
               figures: bool = True) -> int:
    """Execute one config file and write its artifact directory.

    Returns the process exit code: 0 when all configured checks pass,
    2 when at least one fails.  Errors raise and are translated by
    ``main``.
    """
    raw = _load_raw_config(config_path)
    cfg = _config_from_raw(raw)
    target = Path(out_dir) if out_dir is not None else (
        Path(cfg.output_dir) if cfg.output_dir
        else Path(f"{cfg.name}-out"))
    target.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = _RUNNERS[cfg.kind](cfg, threads)
    outputs = {}
    csv_path = target / "results.csv"
    _write_csv(csv_path, result.rows)
    outputs["results.csv"] = _sha256(csv_path)
    passed = all(result.checks.values())
    summary = dict(result.summary)
    summary["checks"] = result.checks
    summary["passed"] = passed
    summary["name"] = cfg.name
    summary["experiment"] = cfg.kind
    summary["master_seed"] = cfg.seed
    summary_path = target / "summary.json"
    _write_json(summary_path, summary)
    outputs["summary.json"] = _sha256(summary_path)
    if figures and result.figure is not None:
        figure_path = target / "figure.png"
        result.figure(figure_path)
        outputs["figure.png"] = _sha256(figure_path)
    wall = time.perf_counter() - start
    manifest = RunManifest(kind=cfg.kind, name=cfg.name,
                           version=__version__, master_seed=cfg.seed,
                           threads=threads,
                           derived_seeds=result.seeds,
                           wall_time_s=wall, outputs=outputs, config=raw)
    _write_json(target / "manifest.json", dataclasses.asdict(manifest))
    for label, ok in result.checks.items():
        print(f"check {label}: {'pass' if ok else 'FAIL'}")
    print(f"{cfg.kind} '{cfg.name}': wrote {len(outputs) + 1} files "
          f"to {target}")
    return 0 if passed else 2


def _list_builtins() -> int:
    sections = [
        ("experiments", sorted(_RUNNERS)),
        ("kernels", builtin_kernel_names()),
        ("factors", factor_names()),
        ("laws", builtin_law_names()),
        ("schemes", builtin_scheme_names()),
        ("designs", builtin_design_names()),
    ]
    for label, names in sections:
        print(f"{label}: {' '.join(names)}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ustat-resample",
        description="Run resampling experiments from declarative configs.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute one experiment config")
    run.add_argument("config", help="path to a TOML experiment config")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads; 1 guarantees bit-exact reruns")
    run.add_argument("--out", default=None,
                     help="output directory (default from the config)")
    run.add_argument("--no-figures", action="store_true",
                     help="skip the PNG rendering, emit data only")
    sub.add_parser("list-builtins",
                   help="print the built-in component names")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-builtins":
        return _list_builtins()
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        return run_config(args.config, out_dir=args.out,
                          threads=args.threads,
                          figures=not args.no_figures)
    except UStatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
