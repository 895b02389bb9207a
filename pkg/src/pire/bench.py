"""Experiment harness: synthetic studies, metrics and reports.

Three experiment families are supported, all driven by an
:class:`ExperimentSpec`:

* ``recovery``: vector sparse recovery over a grid of penalty exponents
  p; the p = 1 column is the convex l1 baseline (FISTA), whose solution
  also warm-starts every reweighted method on the same instance.
* ``timing``: the matrix-variable lp problem at p = 0.5, comparing the
  reweighted prox solvers against IRLS and IRL1 on one instance per
  seed.
* ``multitask``: capped-l1 row selection across tasks with one variable
  block per task, on a planted shared-support model.

Reports are deterministic functions of (spec, seeds): runs execute in
spec order and floats are serialized with full precision. Wall-clock
readings are quarantined in the ``elapsed_ms`` column and the
``volatile`` section of the JSON report.

Reported objectives are those of the target problems themselves (no
smoothing offset): ``lam * sum |x|^p + 0.5 ||Ax - b||^2`` for the lp
families and the capped-l1 objective for multitask.
"""

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .backend import backend_name
from .baselines import BaselineConfig, solve_fista_l1, solve_irl1, solve_irls
from .datasets import (
    GENERATOR_INFO,
    gen_matrix_instance,
    gen_multitask_instance,
    gen_sparse_instance,
    relative_recovery_error,
)
from .errors import ConfigError, NumericError
from .losses import BlockStructure, LeastSquares, MultiTaskLeastSquares
from .penalties import CappedL1, EpsilonSchedule, LpPower
from .regularizers import AbsoluteValue, RowL1
from .solvers import Problem, SolverConfig, objective_value, solve

__all__ = [
    "ExperimentSpec",
    "Metrics",
    "REPORT_COLUMNS",
    "RunReport",
    "SUPPORT_THRESHOLD",
    "run_multitask_experiment",
    "run_recovery_experiment",
    "run_timing_experiment",
]

REPORT_COLUMNS = (
    "method",
    "p",
    "seed",
    "iterations",
    "objective",
    "rel_error",
    "support_size",
    "elapsed_ms",
    "termination",
)

SUMMARY_COLUMNS = (
    "p",
    "method",
    "n_runs",
    "n_failures",
    "mean_rel_error",
    "std_rel_error",
    "mean_objective",
    "mean_iterations",
    "mean_support_size",
    "mean_elapsed_ms",
)

SUPPORT_THRESHOLD = 1e-6

_PIRE_METHODS = ("pire", "pire_ps", "pire_au")
_ALL_METHODS = _PIRE_METHODS + ("irl1", "irls")


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of one synthetic experiment.

    Dimension fields by family: recovery uses (m, n) = measurements x
    signal length; timing uses (m, n, t) = measurements x rows x
    columns of the coefficient matrix; multitask uses m = tasks,
    n = training samples per task, t = feature dimension. ``sparsity``
    counts signal nonzeros, per-column nonzeros, or planted rows,
    respectively.
    """

    family: str
    m: int
    n: int
    t: int = 1
    sparsity: int = 20
    noise_sigma: float = 0.01
    lam: float = 1e-4
    p_values: tuple = (0.5, 1.0)
    methods: tuple = _ALL_METHODS
    seeds: tuple = (0,)
    S: int | None = None
    theta: float | None = None
    n_test: int | None = None
    tol: float = 1e-6
    max_iter: int = 10000
    mu_margin: float = 1.01
    epsilon_start: float = 0.01
    epsilon_rho: float = 1.1
    epsilon_floor: float = 1e-10
    use_block_lipschitz: bool = True
    inner_tol: float = 1e-8
    inner_max_iter: int = 1000
    time_budget_s: float | None = None

    def __post_init__(self):
        if self.family not in ("recovery", "timing", "multitask"):
            raise ConfigError(f"unknown experiment family {self.family!r}")
        if min(self.m, self.n, self.t) <= 0:
            raise ConfigError("dimensions must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed required")
        if self.sparsity > self.n and self.family != "multitask":
            raise ConfigError("sparsity cannot exceed the signal length")
        if self.family == "multitask" and self.sparsity > self.t:
            raise ConfigError("planted rows cannot exceed the feature dimension")
        unknown = set(self.methods) - set(_ALL_METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")

    @property
    def block_count(self):
        return self.S if self.S is not None else 20

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        for key in ("p_values", "methods", "seeds"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        d = dataclasses.asdict(self)
        for key in ("p_values", "methods", "seeds"):
            d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class Metrics:
    """Outcome of one solver run on one instance."""

    relative_recovery_error: float
    objective: float
    iterations: int
    elapsed: float
    support_size: int
    termination: str


def _support_size(x):
    return int(np.count_nonzero(np.abs(x) > SUPPORT_THRESHOLD))


def _lp_objective(x, p, lam, loss):
    return lam * float(np.sum(np.abs(x) ** p)) + loss.value(x)


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


class RunReport:
    """Rows plus per-cell summary; serializable to CSV and JSON."""

    def __init__(self, columns, rows, summary, meta, traces=None, results=None):
        self.columns = tuple(columns)
        self.rows = rows
        self.summary = summary
        self.meta = meta
        self.traces = traces or {}
        self.results = results
        self.volatile = {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt_cell(row.get(c)) for c in self.columns) + "\n")

    def write_summary_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(SUMMARY_COLUMNS) + "\n")
            for row in self.summary:
                fh.write(",".join(_fmt_cell(row.get(c)) for c in SUMMARY_COLUMNS) + "\n")

    def write_json(self, path):
        doc = {
            "meta": self.meta,
            "rows": self.rows,
            "summary": self.summary,
            "traces": self.traces,
            "volatile": self.volatile,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, default=_json_default)
            fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _meta(spec):
    return {
        "spec": spec.to_dict(),
        "rng": GENERATOR_INFO,
        "package_version": _version,
        "kernel_backend": backend_name(),
        "support_threshold": SUPPORT_THRESHOLD,
        "report_objective": "unsmoothed target objective",
    }


def _trace_payload(res):
    return {
        "objective": res.trace.objective.tolist(),
        "step_norm": res.trace.step_norm.tolist(),
        "relative_step": res.trace.relative_step.tolist(),
        "epsilon": res.trace.epsilon.tolist(),
        "elapsed_ms": res.trace.elapsed_ms.tolist(),
    }


def _failure_row(method, p, seed):
    return {
        "method": method,
        "p": p,
        "seed": seed,
        "iterations": None,
        "objective": None,
        "rel_error": None,
        "support_size": None,
        "elapsed_ms": None,
        "termination": "numeric_failure",
    }


def _summarize(rows, p_values, methods):
    summary = []
    for p in p_values:
        for method in methods:
            cell = [r for r in rows if r["method"] == method and r["p"] == p]
            if not cell:
                continue
            good = [r for r in cell if r["termination"] != "numeric_failure"]
            entry = {
                "p": p,
                "method": method,
                "n_runs": len(cell),
                "n_failures": len(cell) - len(good),
            }
            for out_key, row_key in (
                ("mean_rel_error", "rel_error"),
                ("mean_objective", "objective"),
                ("mean_iterations", "iterations"),
                ("mean_support_size", "support_size"),
                ("mean_elapsed_ms", "elapsed_ms"),
            ):
                vals = [r[row_key] for r in good if r[row_key] is not None]
                entry[out_key] = float(np.mean(vals)) if vals else None
            rel = [r["rel_error"] for r in good if r["rel_error"] is not None]
            entry["std_rel_error"] = float(np.std(rel)) if rel else None
            summary.append(entry)
    return summary


def _solver_config(spec, variant, dim, align, x0):
    blocks = None
    if variant != "pire":
        blocks = BlockStructure.uniform(dim, spec.block_count, align=align)
    return SolverConfig(
        variant=variant,
        mu_margin=spec.mu_margin,
        tol=spec.tol,
        max_iter=spec.max_iter,
        epsilon_schedule=EpsilonSchedule(spec.epsilon_start, spec.epsilon_rho),
        epsilon_floor=spec.epsilon_floor,
        blocks=blocks,
        use_block_lipschitz=spec.use_block_lipschitz,
        init=x0,
        time_budget_s=spec.time_budget_s,
    )


def _baseline_config(spec, p):
    return BaselineConfig(
        tol=spec.tol,
        max_outer=spec.max_iter,
        inner_tol=spec.inner_tol,
        inner_max_iter=spec.inner_max_iter,
        epsilon=spec.epsilon_start,
        epsilon_schedule=EpsilonSchedule(spec.epsilon_start, spec.epsilon_rho),
        epsilon_floor=spec.epsilon_floor,
        p=p,
    )


def _run_lp_method(method, p, spec, loss, x0):
    if method in _PIRE_METHODS:
        problem = Problem(LpPower(p, spec.epsilon_start), AbsoluteValue(), loss, spec.lam)
        cfg = _solver_config(spec, method, loss.dim, loss.t, x0)
        return solve(problem, cfg)
    cfg = _baseline_config(spec, p)
    if method == "irl1":
        return solve_irl1(loss.A, loss.b, spec.lam, cfg, x0=x0)
    return solve_irls(loss.A, loss.b, spec.lam, cfg, x0=x0)


def _lp_row(method, p, seed, res, x_true, spec, loss):
    x = res.x_star
    return {
        "method": method,
        "p": p,
        "seed": seed,
        "iterations": res.iterations,
        "objective": _lp_objective(x, p, spec.lam, loss),
        "rel_error": relative_recovery_error(x, x_true),
        "support_size": _support_size(x),
        "elapsed_ms": res.elapsed * 1e3,
        "termination": res.termination,
    }


def _run_lp_family(spec, gen_instance, keep_results):
    rows = []
    traces = {}
    results = {} if keep_results else None
    for seed in spec.seeds:
        A, x_true, b = gen_instance(seed)
        x_true = np.asarray(x_true).reshape(-1)
        loss = LeastSquares(A, b)
        fista = solve_fista_l1(A, b, spec.lam, BaselineConfig(tol=spec.tol, max_outer=spec.max_iter))
        for p in spec.p_values:
            if p == 1.0:
                rows.append(_lp_row("fista_l1", 1.0, seed, fista, x_true, spec, loss))
                traces[f"fista_l1|1.0|{seed}"] = _trace_payload(fista)
                if results is not None:
                    results[("fista_l1", 1.0, seed)] = (fista, loss, x_true)
                continue
            for method in spec.methods:
                try:
                    res = _run_lp_method(method, p, spec, loss, fista.x_star)
                except NumericError:
                    rows.append(_failure_row(method, p, seed))
                    continue
                rows.append(_lp_row(method, p, seed, res, x_true, spec, loss))
                traces[f"{method}|{p}|{seed}"] = _trace_payload(res)
                if results is not None:
                    results[(method, p, seed)] = (res, loss, x_true)
    methods = tuple(m for m in ("fista_l1",) + tuple(spec.methods))
    summary = _summarize(rows, [p for p in spec.p_values], methods)
    return RunReport(REPORT_COLUMNS, rows, summary, _meta(spec), traces, results)


def run_recovery_experiment(spec, keep_results=False):
    """Vector sparse recovery across penalty exponents (one l1-init per
    instance, shared by all methods)."""
    if spec.family != "recovery":
        raise ConfigError("spec.family must be 'recovery'")

    def gen(seed):
        return gen_sparse_instance(spec.m, spec.n, spec.sparsity, spec.noise_sigma, seed)

    return _run_lp_family(spec, gen, keep_results)


def run_timing_experiment(spec, keep_results=False):
    """Matrix-variable lp benchmark at p = 0.5."""
    if spec.family != "timing":
        raise ConfigError("spec.family must be 'timing'")
    if tuple(spec.p_values) not in ((0.5,), (0.5, 1.0)):
        raise ConfigError("the timing family runs at p = 0.5")

    def gen(seed):
        A, X, B = gen_matrix_instance(
            spec.m, spec.n, spec.t, spec.sparsity, spec.noise_sigma, seed
        )
        return A, X.reshape(-1), B

    return _run_lp_family(spec, gen, keep_results)


def run_multitask_experiment(spec, keep_results=False, dataset=None):
    """Capped-l1 shared row selection with one block per task.

    ``dataset`` may supply pre-loaded (train_tasks, test_tasks) instead
    of the planted generator, in which case recovery error against a
    ground truth is unavailable.
    """
    if spec.family != "multitask":
        raise ConfigError("spec.family must be 'multitask'")
    if spec.theta is None:
        raise ConfigError("multitask experiments require theta")
    bad = [m for m in spec.methods if m not in _PIRE_METHODS]
    if bad:
        raise ConfigError(f"multitask supports only the reweighted prox solvers, not {bad}")
    if spec.S is not None and spec.S != spec.m:
        raise ConfigError("multitask splitting uses one block per task (S = tasks)")

    columns = REPORT_COLUMNS + ("test_mse",)
    rows = []
    traces = {}
    results = {} if keep_results else None
    per_seed_meta = {}
    for seed in spec.seeds:
        if dataset is None:
            train, test, Z_true, row_support = gen_multitask_instance(
                spec.m, spec.n, spec.n_test or spec.n, spec.t,
                spec.sparsity, spec.noise_sigma, seed,
            )
        else:
            train, test = dataset
            Z_true, row_support = None, None
        loss = MultiTaskLeastSquares(train)
        problem = Problem(
            CappedL1(spec.theta), RowL1(rows=loss.d, cols=loss.m), loss, spec.lam
        )
        blocks = loss.natural_blocks()
        per_seed_meta[str(seed)] = {
            "planted_rows": None if row_support is None else row_support.tolist(),
        }
        for method in spec.methods:
            cfg = SolverConfig(
                variant=method,
                mu_margin=spec.mu_margin,
                tol=spec.tol,
                max_iter=spec.max_iter,
                blocks=None if method == "pire" else blocks,
                use_block_lipschitz=spec.use_block_lipschitz,
                init="zeros",
                time_budget_s=spec.time_budget_s,
            )
            try:
                res = solve(problem, cfg)
            except NumericError:
                row = _failure_row(method, None, seed)
                row["test_mse"] = None
                rows.append(row)
                continue
            Z = res.x_star.reshape(loss.d, loss.m)
            sq_err = 0.0
            n_total = 0
            for i, (Xte, yte) in enumerate(test):
                r = Xte @ Z[:, i] - yte
                sq_err += float(r @ r)
                n_total += yte.shape[0]
            rows.append(
                {
                    "method": method,
                    "p": None,
                    "seed": seed,
                    "iterations": res.iterations,
                    "objective": objective_value(problem, res.x_star),
                    "rel_error": None
                    if Z_true is None
                    else relative_recovery_error(res.x_star, Z_true.reshape(-1)),
                    "support_size": _support_size(res.x_star),
                    "elapsed_ms": res.elapsed * 1e3,
                    "termination": res.termination,
                    "test_mse": sq_err / n_total,
                }
            )
            traces[f"{method}|{seed}"] = _trace_payload(res)
            if results is not None:
                results[(method, seed)] = (res, problem, Z_true, row_support, train, test)
    summary = _summarize(rows, [None], tuple(spec.methods))
    meta = _meta(spec)
    meta["per_seed"] = per_seed_meta
    return RunReport(columns, rows, summary, meta, traces, results)
