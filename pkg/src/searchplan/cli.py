"""Command-line interface.

Subcommands: ``solve``, ``compare``, ``simulate``, ``convert``, ``gen``,
``posterior``, ``validate``.  Results are JSON on stdout except ``compare``,
which emits CSV (and optionally renders figures).  Exit codes: 0 success,
1 failed validation, 2 usage error, 3 solver refusal or timeout.
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import os
import sys
import time
from typing import Optional

from . import instances as inst_io
from .belief import ExecutionTrace, fast_posterior, recursive_posterior
from .dp_solvers import choose_discretization, solve_1d, solve_ordered, to_line_instance
from .exact import solve_exact
from .heuristics import UniformParams, solve_greedy, solve_tsp_dp, solve_uniform
from .model import (Instance, Schedule, SolveResult, SolverLimitError,
                    SolverTimeout, validate)
from .simulator import estimate_with_miss_counts

SOLVER_NAMES = ("dp1d", "ordered", "tsp-dp", "greedy", "uniform", "exact")

CSV_HEADER = ["instance", "solver", "C", "probability", "weight",
              "runtime_ms", "gap_to_best", "feasible"]

#: Solvers that can return their best plan so far when the time limit hits.
ANYTIME_SOLVERS = {"greedy", "tsp-dp"}

#: Solvers whose rows vary with the discretization C.
C_SOLVERS = {"ordered", "tsp-dp"}


class UsageError(Exception):
    pass


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_instance(path: str, budget: Optional[float]) -> Instance:
    instance = inst_io.load_json(path)
    if budget is not None:
        instance = instance.with_budget(budget)
    return instance


def _load_visit_pairs(path: str) -> list[tuple[int, int]]:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if isinstance(doc, dict) and "schedule" in doc:
        doc = doc["schedule"]
    if isinstance(doc, dict) and "visits" in doc:
        doc = doc["visits"]
    if not isinstance(doc, list):
        raise UsageError(f"{path}: expected a JSON visits list")
    return [(int(i), int(s)) for i, s in doc]


def _deadline(limit_s: Optional[float]) -> Optional[float]:
    return None if limit_s is None else time.monotonic() + limit_s


def _parse_order(text: str) -> list[int]:
    try:
        order = [int(f) for f in text.split(",") if f.strip()]
    except ValueError:
        raise UsageError(f"--order must be comma-separated integers, got {text!r}")
    if not order:
        raise UsageError("--order is empty")
    return order


def _run_solver(instance: Instance, args, deadline, anytime: bool) -> SolveResult:
    solver = args.solver
    if solver in C_SOLVERS:
        if args.C is not None:
            ticks = args.C
        elif args.epsilon is not None:
            ticks = choose_discretization(instance, args.epsilon)
        else:
            ticks = 1
    if solver == "exact":
        return solve_exact(instance, deadline=deadline)
    if solver == "greedy":
        return solve_greedy(instance, update=args.greedy_update,
                            ratio=args.greedy_ratio, deadline=deadline)
    if solver == "uniform":
        eps = args.epsilon if args.epsilon is not None else 0.25
        params = UniformParams.from_instance(instance, eps)
        return solve_uniform(instance, params, path_mode=args.path_mode,
                             deadline=deadline)
    if solver == "tsp-dp":
        return solve_tsp_dp(instance, ticks, deadline=deadline, anytime=anytime,
                            path_mode=args.path_mode)
    if solver == "ordered":
        if args.order is None:
            raise UsageError("--solver ordered requires --order")
        order = _parse_order(args.order)
        return solve_ordered(instance, order, ticks, deadline=deadline,
                             anytime=anytime)
    if solver == "dp1d":
        try:
            line, back = to_line_instance(instance)
        except ValueError as bad:
            raise UsageError(f"dp1d requires a collinear instance: {bad}")
        result = solve_1d(line, deadline=deadline)
        visits = tuple((back[i - 1], s) for i, s in result.schedule.visits)
        result.schedule = Schedule(visits)
        return result
    raise UsageError(f"unknown solver {solver!r}")


def cmd_solve(args) -> int:
    try:
        instance = _load_instance(args.instance, args.budget)
    except (OSError, inst_io.FormatError) as bad:
        return _fail(str(bad), 2)
    start = time.perf_counter()
    try:
        result = _run_solver(instance, args, _deadline(args.time_limit_s),
                             anytime=False)
    except (UsageError, ValueError, IndexError) as bad:
        return _fail(str(bad), 2)
    except (SolverLimitError, SolverTimeout) as refused:
        return _fail(str(refused), 3)
    payload = result.to_dict()
    payload["runtime_ms"] = (time.perf_counter() - start) * 1000.0
    if args.seed is not None:
        payload["params"]["seed"] = args.seed
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _compare_cell(instance, solver, ticks, limit_s, path_mode):
    """One (instance, solver, C) run; returns (probability, weight, feasible)."""
    deadline = _deadline(limit_s)
    args = argparse.Namespace(solver=solver, C=ticks, epsilon=None, order=None,
                              greedy_update="posterior", greedy_ratio="paper",
                              path_mode=path_mode)
    try:
        result = _run_solver(instance, args, deadline, anytime=solver in ANYTIME_SOLVERS)
    except (SolverTimeout, SolverLimitError, UsageError, ValueError, IndexError):
        return None, None, False
    truncated = bool(result.params.get("truncated"))
    return result.probability, result.total_weight, not truncated


def cmd_compare(args) -> int:
    paths = sorted(glob.glob(args.instances))
    if not paths:
        return _fail(f"no instances match {args.instances!r}", 2)
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    for s in solvers:
        if s not in SOLVER_NAMES:
            return _fail(f"unknown solver {s!r}", 2)
    try:
        c_values = sorted({int(c) for c in args.C_values.split(",") if c.strip()})
    except ValueError:
        return _fail(f"bad --C-values {args.C_values!r}", 2)
    rows = []
    for path in paths:
        try:
            instance = inst_io.load_json(path)
        except (OSError, inst_io.FormatError) as bad:
            return _fail(str(bad), 2)
        name = instance.name or os.path.splitext(os.path.basename(path))[0]
        per_instance = []
        for solver in solvers:
            for ticks in (c_values if solver in C_SOLVERS else [None]):
                start = time.perf_counter()
                prob, weight, feasible = _compare_cell(
                    instance, solver, ticks, args.time_limit_s, args.path_mode)
                runtime_ms = (time.perf_counter() - start) * 1000.0
                per_instance.append({
                    "instance": name, "solver": solver,
                    "C": ticks if ticks is not None else "",
                    "probability": prob, "weight": weight,
                    "runtime_ms": runtime_ms, "gap_to_best": None,
                    "feasible": feasible,
                })
        known = [row["probability"] for row in per_instance
                 if row["probability"] is not None]
        best = max(known) if known else None
        for row in per_instance:
            if row["probability"] is not None and best is not None:
                row["gap_to_best"] = best - row["probability"]
        rows.extend(per_instance)
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([
            row["instance"], row["solver"], row["C"],
            "" if row["probability"] is None else repr(row["probability"]),
            "" if row["weight"] is None else repr(row["weight"]),
            f"{row['runtime_ms']:.3f}",
            "" if row["gap_to_best"] is None else repr(row["gap_to_best"]),
            "true" if row["feasible"] else "false",
        ])
    text = buffer.getvalue()
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
        if args.plot_dir:
            from .report import render_compare_report
            for path in render_compare_report(rows, args.plot_dir):
                print(f"wrote {path}", file=sys.stderr)
    except OSError as bad:
        return _fail(str(bad), 2)
    return 0


def cmd_simulate(args) -> int:
    try:
        instance = _load_instance(args.instance, None)
        pairs = _load_visit_pairs(args.schedule)
        schedule = Schedule(tuple(pairs))
    except (OSError, inst_io.FormatError, UsageError, ValueError) as bad:
        return _fail(str(bad), 2)
    stats, misses = estimate_with_miss_counts(instance, schedule, args.trials,
                                              args.seed)
    payload = {"trials": stats.trials, "detections": stats.detections,
               "p_hat": stats.p_hat, "std_err": stats.std_err}
    if args.miss_distribution:
        payload["miss_target_counts"] = list(misses)
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _conversion_config(args) -> inst_io.ConversionConfig:
    lo, hi = (int(v) for v in args.cost_range.split(","))
    blo, bhi = (float(v) for v in args.beta_range.split(","))
    return inst_io.ConversionConfig(
        seed=args.seed, instances_per_base=args.instances_per_base,
        cost_range=(lo, hi), dirichlet_concentration=args.concentration,
        beta_transform=args.beta_transform, beta_range=(blo, bhi))


def cmd_convert(args) -> int:
    try:
        records, budget = inst_io.load_orienteering(args.input)
        if args.subsample is not None:
            records = inst_io.subsample_records(records, args.subsample, args.seed)
        config = _conversion_config(args)
        name = args.name or os.path.splitext(os.path.basename(args.input))[0]
        converted = inst_io.convert_orienteering(records, budget, config, name=name)
    except (OSError, inst_io.FormatError, ValueError) as bad:
        return _fail(str(bad), 2)
    knobs = {"instances_per_base": config.instances_per_base,
             "cost_range": list(config.cost_range),
             "dirichlet_concentration": config.dirichlet_concentration,
             "beta_transform": config.beta_transform,
             "beta_range": list(config.beta_range)}
    if args.subsample is not None:
        knobs["subsample"] = args.subsample
    written = []
    try:
        os.makedirs(args.out_dir, exist_ok=True)
        for inst in converted:
            path = os.path.join(args.out_dir, f"{inst.name}.json")
            inst_io.save_json(inst, path, source=args.input, seed=args.seed,
                              extra_provenance=knobs)
            written.append(path)
    except OSError as bad:
        return _fail(str(bad), 2)
    print(json.dumps({"written": written}, indent=2))
    return 0


def cmd_gen(args) -> int:
    try:
        box = tuple(float(v) for v in args.box.split(","))
        if len(box) != 4:
            raise ValueError(f"--box needs 4 numbers, got {args.box!r}")
        config = _conversion_config(args)
        instance = inst_io.generate_random(args.n, box, config,
                                           budget_factor=args.budget_factor)
    except ValueError as bad:
        return _fail(str(bad), 2)
    doc = inst_io.instance_to_document(instance, source="gen", seed=args.seed)
    if args.out:
        try:
            inst_io.save_json(instance, args.out, source="gen", seed=args.seed)
        except OSError as bad:
            return _fail(str(bad), 2)
        print(json.dumps({"written": [args.out]}, indent=2))
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def _parse_trace(text: str, n: int) -> ExecutionTrace:
    yes = no = None
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, values = part.partition("=")
        counts = [int(v) for v in values.split(",") if v.strip()]
        if key.strip() == "a":
            yes = counts
        elif key.strip() == "b":
            no = counts
        else:
            raise UsageError(f"trace parts must be 'a=...' or 'b=...', got {part!r}")
    if yes is None:
        yes = [0] * n
    if no is None:
        no = [0] * n
    if len(yes) != n or len(no) != n:
        raise UsageError(f"trace lengths must equal n={n}")
    return ExecutionTrace(tuple(yes), tuple(no))


def cmd_posterior(args) -> int:
    try:
        instance = _load_instance(args.instance, None)
    except (OSError, inst_io.FormatError) as bad:
        return _fail(str(bad), 2)
    try:
        if args.trace is not None:
            trace = _parse_trace(args.trace, instance.n)
            belief = fast_posterior(instance.priors, trace,
                                    instance.false_positive,
                                    instance.false_negative)
        elif args.observations is not None:
            obs = []
            for part in args.observations.split(","):
                part = part.strip()
                if not part:
                    continue
                i, _, r = part.partition(":")
                obs.append((int(i), int(r)))
            belief = recursive_posterior(instance.priors, obs,
                                         instance.false_positive,
                                         instance.false_negative)
        else:
            raise UsageError("posterior needs --trace or --observations")
    except (UsageError, ValueError) as bad:
        return _fail(str(bad), 2)
    print(json.dumps({"mass": list(belief.mass), "certain": belief.certain},
                     indent=2))
    return 0


def cmd_validate(args) -> int:
    try:
        instance = _load_instance(args.instance, None)
        pairs = _load_visit_pairs(args.schedule)
    except (OSError, inst_io.FormatError, UsageError, ValueError) as bad:
        return _fail(str(bad), 2)
    violations = validate(instance, pairs, tolerance=args.tolerance)
    print(json.dumps(violations, indent=2))
    return 0 if not violations else 1


def _add_config_flags(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--instances-per-base", type=int, default=10)
    parser.add_argument("--cost-range", default="1,3")
    parser.add_argument("--concentration", type=float, default=1.0)
    parser.add_argument("--beta-transform", choices=("raw", "minmax"),
                        default="raw")
    parser.add_argument("--beta-range", default="0.1,0.6")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="searchplan",
        description="Plan, verify, and benchmark budgeted search schedules "
                    "with unreliable sensors.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver on one instance")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    solve.add_argument("--order", help="comma-separated point order (ordered solver)")
    group = solve.add_mutually_exclusive_group()
    group.add_argument("--C", type=int, help="ticks per unit time")
    group.add_argument("--epsilon", type=float,
                       help="discretization slack (or uniform budget slack)")
    solve.add_argument("--seed", type=int)
    solve.add_argument("--budget", type=float, help="override the instance budget")
    solve.add_argument("--time-limit-s", type=float)
    solve.add_argument("--greedy-update", choices=("posterior", "none"),
                       default="posterior")
    solve.add_argument("--greedy-ratio", choices=("paper", "marginal"),
                       default="paper")
    solve.add_argument("--path-mode", choices=("auto", "exact", "heuristic"),
                       default="auto")
    solve.set_defaults(func=cmd_solve)

    compare = sub.add_parser("compare", help="solver comparison CSV over a corpus")
    compare.add_argument("--instances", required=True, help="glob of instance files")
    compare.add_argument("--solvers", required=True, help="comma-separated solvers")
    compare.add_argument("--C-values", dest="C_values", default="1,10,20")
    compare.add_argument("--time-limit-s", type=float, default=300.0)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--out", help="CSV path (default: stdout)")
    compare.add_argument("--plot-dir", help="also render summary figures here")
    compare.add_argument("--path-mode", choices=("auto", "exact", "heuristic"),
                         default="auto")
    compare.set_defaults(func=cmd_compare)

    simulate = sub.add_parser("simulate", help="Monte Carlo a schedule")
    simulate.add_argument("--instance", required=True)
    simulate.add_argument("--schedule", required=True)
    simulate.add_argument("--trials", type=int, default=10000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--miss-distribution", action="store_true")
    simulate.set_defaults(func=cmd_simulate)

    convert = sub.add_parser("convert", help="orienteering file -> instance JSONs")
    convert.add_argument("--input", required=True)
    convert.add_argument("--out-dir", required=True)
    convert.add_argument("--subsample", type=int,
                         help="keep this many seeded-sampled points")
    convert.add_argument("--name", help="output name prefix")
    _add_config_flags(convert)
    convert.set_defaults(func=cmd_convert)

    gen = sub.add_parser("gen", help="generate a random instance")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--box", default="0,0,10,10")
    gen.add_argument("--budget-factor", type=float, default=3.0)
    gen.add_argument("--out")
    _add_config_flags(gen)
    gen.set_defaults(func=cmd_gen)

    posterior = sub.add_parser("posterior", help="belief after reports")
    posterior.add_argument("--instance", required=True)
    posterior.add_argument("--trace", help="per-point counts, e.g. 'a=0,0;b=1,0'")
    posterior.add_argument("--observations",
                           help="report sequence, e.g. '1:0,2:1'")
    posterior.set_defaults(func=cmd_posterior)

    check = sub.add_parser("validate", help="check a schedule file")
    check.add_argument("--instance", required=True)
    check.add_argument("--schedule", required=True)
    check.add_argument("--tolerance", type=float, default=1e-9)
    check.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
