"""Command line interface.

Subcommands::

    pire solve     --config cfg.json --out DIR
    pire recovery  --spec spec.json [--seeds 1,2,3] --out DIR
    pire timing    --spec spec.json [--seeds ...]   --out DIR
    pire multitask --spec spec.json [--seeds ...]   --out DIR
    pire gen       --spec spec.json --out DIR

Exit codes: 0 on success, 2 on configuration errors, 3 on numeric
failure inside a solver.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import BaselineConfig, solve_fista_l1, solve_irl1, solve_irls
from .bench import (
    ExperimentSpec,
    run_multitask_experiment,
    run_recovery_experiment,
    run_timing_experiment,
)
from .datasets import (
    gen_matrix_instance,
    gen_multitask_instance,
    gen_sparse_instance,
    load_csv_dataset,
    load_matrix_csv,
    load_vector_csv,
    save_csv_dataset,
    save_matrix_csv,
    save_vector_csv,
)
from .errors import ConfigError, NumericError
from .losses import BlockStructure, LeastSquares, Logistic, MultiTaskLeastSquares
from .penalties import EpsilonSchedule, penalty_from_config
from .regularizers import regularizer_from_config
from .solvers import Problem, SolverConfig, solve

_BASELINES = ("fista_l1", "irl1", "irls")


def _load_loss(cfg, base):
    kind = cfg.get("kind")
    if kind == "least_squares":
        A = load_matrix_csv(base / cfg["a_csv"])
        b = load_matrix_csv(base / cfg["b_csv"])
        if b.shape[1] == 1:
            b = b[:, 0]
        return LeastSquares(A, b)
    if kind == "logistic":
        A = load_matrix_csv(base / cfg["a_csv"])
        labels = load_vector_csv(base / cfg["labels_csv"])
        return Logistic(A, labels)
    if kind == "multitask":
        tasks, _ = load_csv_dataset(base / cfg["data_csv"], cfg["schema"])
        return MultiTaskLeastSquares(tasks)
    raise ConfigError(f"unknown loss kind {kind!r}")


def _load_blocks(cfg, loss):
    if cfg is None:
        return None
    if "ranges" in cfg:
        return BlockStructure.from_ranges(cfg["ranges"], loss.dim)
    count = int(cfg["count"])
    if isinstance(loss, MultiTaskLeastSquares):
        if count != loss.m:
            raise ConfigError("multitask blocks must be one per task")
        return loss.natural_blocks()
    align = getattr(loss, "t", 1)
    return BlockStructure.uniform(loss.dim, count, align=align)


def _load_init(cfg, base):
    if cfg is None:
        return "zeros"
    if isinstance(cfg, str):
        return cfg
    return load_vector_csv(base / cfg["csv"])


def _epsilon_schedule(cfg):
    if cfg is None:
        return None, 1e-10
    return (
        EpsilonSchedule(float(cfg["start"]), float(cfg["rho"])),
        float(cfg.get("floor", 1e-10)),
    )


def _cmd_solve(args):
    cfg_path = Path(args.config)
    base = cfg_path.parent
    with open(cfg_path, encoding="utf-8") as fh:
        cfg = json.load(fh)

    prob_cfg = cfg["problem"]
    solver_cfg = cfg.get("solver", {})
    lam = float(prob_cfg["lambda"])
    loss = _load_loss(prob_cfg["loss"], base)
    variant = solver_cfg.get("variant", "pire")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sched, floor = _epsilon_schedule(solver_cfg.get("epsilon"))
    if variant in _BASELINES:
        if not isinstance(loss, LeastSquares):
            raise ConfigError(f"{variant} requires a least-squares loss")
        pen_cfg = prob_cfg.get("penalty", {})
        bcfg = BaselineConfig(
            tol=float(solver_cfg.get("tol", 1e-6)),
            max_outer=int(solver_cfg.get("max_iter", 10000)),
            inner_tol=float(solver_cfg.get("inner_tol", 1e-8)),
            inner_max_iter=int(solver_cfg.get("inner_max_iter", 1000)),
            epsilon=float(pen_cfg.get("epsilon", sched.epsilon0 if sched else 0.01)),
            epsilon_schedule=sched,
            epsilon_floor=floor,
            p=float(pen_cfg.get("p", 0.5)),
        )
        x0 = _load_init(solver_cfg.get("init"), base)
        x0 = None if isinstance(x0, str) else x0
        if variant == "fista_l1":
            res = solve_fista_l1(loss.A, loss.b, lam, bcfg, x0=x0)
        elif variant == "irl1":
            res = solve_irl1(loss.A, loss.b, lam, bcfg, x0=x0)
        else:
            res = solve_irls(loss.A, loss.b, lam, bcfg, x0=x0)
    else:
        problem = Problem(
            penalty_from_config(prob_cfg["penalty"]),
            regularizer_from_config(prob_cfg["regularizer"]),
            loss,
            lam,
        )
        scfg = SolverConfig(
            variant=variant,
            mu_margin=float(solver_cfg.get("mu_margin", 1.01)),
            tol=float(solver_cfg.get("tol", 1e-6)),
            max_iter=int(solver_cfg.get("max_iter", 10000)),
            epsilon_schedule=sched,
            epsilon_floor=floor,
            blocks=_load_blocks(solver_cfg.get("blocks"), loss),
            use_block_lipschitz=bool(solver_cfg.get("use_block_lipschitz", True)),
            init=_load_init(solver_cfg.get("init"), base),
            backtracking=bool(solver_cfg.get("backtracking", False)),
            backtracking_growth=float(solver_cfg.get("backtracking_growth", 2.0)),
            mu0=solver_cfg.get("mu0"),
            workers=int(solver_cfg.get("workers", 1)),
            time_budget_s=solver_cfg.get("time_budget_s"),
        )
        res = solve(problem, scfg)

    save_vector_csv(out / "x.csv", res.x_star)
    res.trace.write_csv(out / "trace.csv")
    payload = {
        "variant": variant,
        "objective": res.objective,
        "iterations": res.iterations,
        "termination": res.termination,
        "stationarity_residual": res.stationarity_residual,
        "epsilon_final": res.epsilon_final,
        "warnings": res.warnings,
        "volatile": {"elapsed_s": res.elapsed},
    }
    with open(out / "result.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    print(f"{variant}: objective={res.objective:.6e} iterations={res.iterations} "
          f"termination={res.termination}")
    return 0


def _spec_from_args(args):
    spec = ExperimentSpec.from_json(args.spec)
    if args.seeds:
        seeds = tuple(int(s) for s in args.seeds.split(","))
        spec = ExperimentSpec.from_dict({**spec.to_dict(), "seeds": seeds})
    return spec


def _write_report(report, out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report.write_csv(out / "runs.csv")
    report.write_summary_csv(out / "summary.csv")
    report.write_json(out / "report.json")
    print(f"wrote {out / 'runs.csv'}, {out / 'summary.csv'}, {out / 'report.json'}")


def _cmd_recovery(args):
    _write_report(run_recovery_experiment(_spec_from_args(args)), args.out)
    return 0


def _cmd_timing(args):
    _write_report(run_timing_experiment(_spec_from_args(args)), args.out)
    return 0


def _cmd_multitask(args):
    _write_report(run_multitask_experiment(_spec_from_args(args)), args.out)
    return 0


def _cmd_gen(args):
    spec = _spec_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = spec.seeds[0]
    meta = {"family": spec.family, "seed": seed, "spec": spec.to_dict()}
    if spec.family == "recovery":
        A, x, b = gen_sparse_instance(spec.m, spec.n, spec.sparsity, spec.noise_sigma, seed)
        save_matrix_csv(out / "A.csv", A)
        save_vector_csv(out / "x_true.csv", x)
        save_vector_csv(out / "b.csv", b)
    elif spec.family == "timing":
        A, X, B = gen_matrix_instance(spec.m, spec.n, spec.t, spec.sparsity, spec.noise_sigma, seed)
        save_matrix_csv(out / "A.csv", A)
        save_matrix_csv(out / "x_true.csv", X)
        save_matrix_csv(out / "b.csv", B)
    else:
        train, test, Z, rows = gen_multitask_instance(
            spec.m, spec.n, spec.n_test or spec.n, spec.t,
            spec.sparsity, spec.noise_sigma, seed,
        )
        schema = save_csv_dataset(out / "train.csv", train)
        save_csv_dataset(out / "test.csv", test)
        save_matrix_csv(out / "z_true.csv", Z)
        meta["schema"] = schema
        meta["planted_rows"] = rows.tolist()
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")
    print(f"wrote instance files to {out}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pire", description="Reweighted proximal solvers and benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem from a config file")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--out", required=True)
    p_solve.set_defaults(func=_cmd_solve)

    for name, func in (
        ("recovery", _cmd_recovery),
        ("timing", _cmd_timing),
        ("multitask", _cmd_multitask),
        ("gen", _cmd_gen),
    ):
        p = sub.add_parser(name)
        p.add_argument("--spec", required=True)
        p.add_argument("--seeds", default=None, help="comma-separated seed override")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
