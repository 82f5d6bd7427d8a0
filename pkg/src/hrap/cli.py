"""Command-line entry point: ``hrap {allocate,adapt,tune,metrics,bench,gen}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .adaptive import AdaptiveConfig, AdaptiveError, FileObservations, MissingObservation, SimulatedWorkforce, run_adaptive
from .bench import generate_synthetic, parse_sizes, run_benchmark, summarize, write_bench_csv
from .bnb import STATUS_OPTIMAL, SolveConfig, solve_milp
from .cost import Hyperparams, cost_matrix
from .domain import (
    DatasetError,
    load_instance,
    partition_assignable,
    required_skills,
    target_workload,
    variable_count,
    write_instance,
)
from .metrics import greedy_assignment, load_assignment_csv, random_assignment, score, workload_vector
from .milp import build_balance_model, build_cost_model
from .tuning import sensitivity_report, tune_hyperparams

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2

GREEDY_LABEL = "greedy (manager proxy)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _finite(value):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def _dump(payload, path) -> None:
    text = json.dumps(_finite(payload), indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _color(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _table(rows: list[list], header: list[str]) -> str:
    cells = [[str(h) for h in header]] + [[f"{c:.6g}" if isinstance(c, float) else str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells)


# --- shared options ---------------------------------------------------------


def _add_data(p):
    p.add_argument("--employees", required=True, help="employees CSV")
    p.add_argument("--tasks", required=True, help="tasks CSV")


def _add_solver(p):
    p.add_argument("--gap-tol", type=float, default=1e-6, help="relative optimality gap to stop at (fraction)")
    p.add_argument("--time-limit-s", type=float, default=60.0, help="solver time limit per solve")
    p.add_argument("--node-limit", type=int, default=None, help="stop after this many nodes (reproducible, unlike the time limit)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true", help="log solver progress as JSON lines on stderr")


def _add_weights(p):
    p.add_argument("--mode", choices=("balance", "cost"), default="balance")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1 / 3)
    p.add_argument("--beta", type=float, default=1 / 3)
    p.add_argument("--gamma", type=float, default=1 / 3)
    p.add_argument("--no-normalize", action="store_true", help="allow alpha + beta + gamma != 1")
    p.add_argument("--fairness-on-cost", action="store_true", help="bound costs instead of hours in the fairness rows")


def _solve_cfg(args) -> SolveConfig:
    return SolveConfig(
        gap_tolerance=args.gap_tol,
        time_limit=args.time_limit_s,
        node_limit=args.node_limit,
        seed=args.seed,
        verbose=args.verbose,
    )


def _hyperparams(args) -> Hyperparams:
    return Hyperparams(args.lam, args.alpha, args.beta, args.gamma, normalize=not args.no_normalize)


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "verbose")}


# --- subcommands -------------------------------------------------------------


def cmd_allocate(args) -> int:
    instance = load_instance(args.employees, args.tasks)
    hp = _hyperparams(args)
    if args.mode == "cost":
        model = build_cost_model(instance, hp, cost_matrix(instance, hp), fairness_on_cost=args.fairness_on_cost)
    else:
        model = build_balance_model(instance)
    if args.dump_lp:
        Path(args.dump_lp).write_text(model.to_lp_text(), encoding="utf-8")
    greedy = greedy_assignment(instance)
    res = solve_milp(model, _solve_cfg(args), start=greedy)
    assignable, _ = partition_assignable(instance)

    methods = {GREEDY_LABEL: greedy, "random": random_assignment(instance, args.seed)}
    if res.values is not None:
        methods = {"milp": res.assignment} | methods
    metrics = {name: score(a, instance, args.sample_variance).as_dict() for name, a in methods.items()}
    report = {
        "tool": {"name": "hrap", "version": __version__},
        "config": _echo(args) | {"command": "allocate"},
        "instance": {
            "n_employees": len(instance.employees),
            "n_tasks": len(instance.tasks),
            "n_assignable": len(assignable),
            "skills": sorted(required_skills(instance)),
            "variable_count": variable_count(instance),
            "target_workload": target_workload(instance),
        },
        "assignment": res.assignment.pairs,
        "unassigned": list(res.assignment.unassigned),
        "workload": workload_vector(res.assignment, instance) if res.values is not None else {},
        "metrics": metrics,
        "solver": res.stats() | {"wall_time_s": res.wall_time},
    }
    _dump(report, args.out)
    if args.out:
        rows = [[name, m["objective"], m["variance"], m["gini"], m["jain"]] for name, m in metrics.items()]
        print(_table(rows, ["method", "objective", "variance", "gini", "jain"]))
        print(_color(f"status {res.status}, gap {res.gap_percent:.4g}%, {res.nodes} nodes, {res.wall_time:.2f} s", "1"))
    return EXIT_OK if res.status == STATUS_OPTIMAL else EXIT_SOLVER


def _read_true_efficiencies(path) -> dict[tuple[str, str], float]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["employee_id", "skill", "efficiency"]:
            raise DatasetError("expected header employee_id,skill,efficiency", path)
        for row in reader:
            if not row:
                continue
            try:
                out[(row[0], row[1])] = float(row[2])
            except (ValueError, IndexError):
                raise DatasetError("malformed efficiency row", path, reader.line_num) from None
    return out


def cmd_adapt(args) -> int:
    instance = load_instance(args.employees, args.tasks)
    if args.observations:
        source = FileObservations(args.observations)
    else:
        truth = _read_true_efficiencies(args.true_efficiencies) if args.true_efficiencies else None
        source = SimulatedWorkforce.from_instance(instance, truth, args.noise_sigma, args.seed)
    cfg = AdaptiveConfig(
        max_iterations=args.iterations,
        threshold=args.threshold,
        min_employees=args.min_employees,
        mode=args.mode,
        hyperparams=_hyperparams(args),
        filter_rule=args.filter,
        reset_efficiency=args.reset_efficiency,
        fairness_on_cost=args.fairness_on_cost,
        solve=_solve_cfg(args),
    )
    trace = run_adaptive(instance, source, cfg)
    if args.out:
        trace.write_jsonl(args.out)
    else:
        for rec in trace.records:
            print(rec.to_json())
    if args.efficiencies_out:
        trace.write_efficiencies(args.efficiencies_out)
    if args.out:
        rows = [[r.iteration, len(r.survivors), r.solver["objective"], "yes" if r.guard_triggered else "no"] for r in trace.records]
        print(_table(rows, ["iteration", "employees", "objective", "guard"]))
    return EXIT_OK


def cmd_tune(args) -> int:
    instance = load_instance(args.employees, args.tasks)
    result = tune_hyperparams(
        instance,
        strategy=args.strategy,
        budget=args.budget,
        seed=args.seed,
        solve_cfg=_solve_cfg(args),
        top=args.top,
        normalize=not args.no_normalize,
        fairness_on_cost=args.fairness_on_cost,
    )
    if not result.entries:
        print(f"every sample failed: {result.failures[0][1] if result.failures else 'nothing evaluated'}", file=sys.stderr)
        return EXIT_SOLVER
    sens = sensitivity_report(result)
    if args.out:
        result.write_csv(args.out)
        out = Path(args.out)
        with out.with_name(out.stem + "_sensitivity.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["parameter", "min", "max", "range", "sensitivity"])
            for s in sens:
                writer.writerow([s.parameter, s.minimum, s.maximum, s.range, s.level])
    rows = [[i + 1, *e.hyperparams.key(), e.objective] for i, e in enumerate(result.entries)]
    print(_table(rows, ["rank", "lambda", "alpha", "beta", "gamma", "objective"]))
    print(_table([[s.parameter, s.minimum, s.maximum, s.range, s.level] for s in sens], ["parameter", "min", "max", "range", "sensitivity"]))
    if result.failures:
        print(f"{len(result.failures)} of {result.evaluated} samples failed", file=sys.stderr)
    return EXIT_OK


def cmd_metrics(args) -> int:
    instance = load_instance(args.employees, args.tasks)
    assignment = load_assignment_csv(args.assignment)
    assignment.check(instance)
    payload = {
        "tool": {"name": "hrap", "version": __version__},
        "config": _echo(args) | {"command": "metrics"},
        "metrics": score(assignment, instance, args.sample_variance).as_dict(),
        "workload": workload_vector(assignment, instance),
    }
    _dump(payload, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = parse_sizes(args.sizes)
    if args.seeds < 1:
        raise ValueError("--seeds must be >= 1")
    cfg = _solve_cfg(args)

    def progress(row):
        print(f"{row.n_employees}x{row.n_tasks} seed {row.seed}: {row.status}, gap {row.gap_percent:.4g}%, {row.wall_time_s:.2f} s", file=sys.stderr)

    rows = run_benchmark(sizes, range(args.seeds), cfg, n_skills=args.n_skills, progress=progress)
    if args.out:
        write_bench_csv(rows, args.out)
    summary = summarize(rows)
    print(
        _table(
            [[f"{s['n_employees']}x{s['n_tasks']}", s["runs"], s["median_variable_count"], s["median_wall_time_s"], s["median_gap_percent"]] for s in summary],
            ["size", "runs", "variables", "median_time_s", "median_gap_pct"],
        )
    )
    return EXIT_OK if all(not r.status.startswith("error") for r in rows) else EXIT_SOLVER


def cmd_gen(args) -> int:
    instance = generate_synthetic(args.n_employees, args.n_tasks, args.n_skills, args.seed)
    write_instance(instance, args.employees, args.tasks)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hrap", description="Fair, cost-aware task allocation by exact MILP.")
    parser.add_argument("--version", action="version", version=f"hrap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("allocate", help="solve one allocation and write a report")
    _add_data(p)
    _add_weights(p)
    _add_solver(p)
    p.add_argument("--sample-variance", action="store_true", help="divide variance by n - 1")
    p.add_argument("--dump-lp", help="write the model as LP-style text")
    p.add_argument("--out", help="report JSON path (stdout when omitted)")
    p.set_defaults(handler=cmd_allocate)

    p = sub.add_parser("adapt", help="iterate allocation with efficiency re-estimation")
    _add_data(p)
    _add_weights(p)
    _add_solver(p)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--min-employees", type=int, default=None)
    p.add_argument("--reset-efficiency", action="store_true", help="start every efficiency at 1")
    p.add_argument("--filter", choices=("any", "max", "mean"), default="max")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--simulate", action="store_true", help="draw completion times from a simulated workforce")
    src.add_argument("--observations", help="CSV of measured completion times")
    p.add_argument("--true-efficiencies", help="CSV employee_id,skill,efficiency for the simulator")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--out", help="trace JSON lines path (stdout when omitted)")
    p.add_argument("--efficiencies-out", help="final efficiency CSV path")
    p.set_defaults(handler=cmd_adapt)

    p = sub.add_parser("tune", help="search the objective weights")
    _add_data(p)
    _add_solver(p)
    p.add_argument("--strategy", choices=("grid", "random"), default="grid")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--fairness-on-cost", action="store_true")
    p.add_argument("--out", help="ranking CSV path; sensitivity goes beside it")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("metrics", help="score an existing assignment")
    _add_data(p)
    p.add_argument("--assignment", required=True, help="CSV task_id,employee_id")
    p.add_argument("--sample-variance", action="store_true")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("bench", help="run the scaling ladder on synthetic instances")
    p.add_argument("--sizes", default="20x80,50x150,100x300")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds, 0..n-1")
    p.add_argument("--n-skills", type=int, default=6)
    _add_solver(p)
    p.add_argument("--out", help="CSV path")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("gen", help="write a synthetic dataset")
    p.add_argument("--employees", required=True, help="output employees CSV")
    p.add_argument("--tasks", required=True, help="output tasks CSV")
    p.add_argument("--n-employees", type=int, default=20)
    p.add_argument("--n-tasks", type=int, default=80)
    p.add_argument("--n-skills", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_gen)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except (DatasetError, MissingObservation, ValueError, KeyError, OSError) as exc:
        print(f"hrap: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AdaptiveError as exc:
        print(f"hrap: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
