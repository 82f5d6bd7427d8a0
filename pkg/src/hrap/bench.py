"""Synthetic instances and the solver-scaling benchmark ladder."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bnb import SolveConfig, solve_milp
from .domain import Employee, ProblemInstance, Task, variable_count
from .metrics import greedy_assignment
from .milp import build_balance_model

BENCH_HEADER = ["n_employees", "n_tasks", "seed", "variable_count", "wall_time_s", "gap_percent", "objective", "status"]


def generate_synthetic(n_employees: int, n_tasks: int, n_skills: int, seed: int) -> ProblemInstance:
    """Random instance with value ranges taken from the published dataset descriptions.

    Each employee holds 1..min(3, n_skills) distinct skills with efficiency
    U[0.1, 1] and a performance rating U{1..5}; each task needs one skill drawn
    uniformly from the pool, lasts U[1, 40] hours and has complexity U{1..3}.
    """
    if min(n_employees, n_tasks, n_skills) < 1:
        raise ValueError("all counts must be >= 1")
    rng = np.random.default_rng(seed)
    skills = [f"S{k + 1}" for k in range(n_skills)]
    width = len(str(max(n_employees, n_tasks)))
    employees = []
    for i in range(n_employees):
        k = int(rng.integers(1, min(3, n_skills) + 1))
        held = sorted(int(s) for s in rng.choice(n_skills, size=k, replace=False))
        eff = {skills[s]: float(rng.uniform(0.1, 1.0)) for s in held}
        employees.append(Employee(f"E{i + 1:0{width}d}", eff, int(rng.integers(1, 6))))
    tasks = []
    for j in range(n_tasks):
        tasks.append(
            Task(
                f"T{j + 1:0{width}d}",
                skills[int(rng.integers(n_skills))],
                float(rng.uniform(1.0, 40.0)),
                int(rng.integers(1, 4)),
            )
        )
    return ProblemInstance(tuple(employees), tuple(tasks))


@dataclass(frozen=True)
class BenchRow:
    n_employees: int
    n_tasks: int
    seed: int
    variable_count: int
    wall_time_s: float
    gap_percent: float
    objective: float
    status: str


def bench_cell(n_employees: int, n_tasks: int, seed: int, cfg: SolveConfig, n_skills: int = 6) -> BenchRow:
    instance = generate_synthetic(n_employees, n_tasks, n_skills, seed)
    n_vars = variable_count(instance)
    t0 = time.perf_counter()
    try:
        model = build_balance_model(instance)
        res = solve_milp(model, cfg, start=greedy_assignment(instance))
        gap, obj, status = res.gap_percent, res.objective, res.status
    except Exception as exc:  # recorded per row, the ladder keeps going
        gap, obj, status = float("nan"), float("nan"), f"error: {type(exc).__name__}: {exc}"
    return BenchRow(n_employees, n_tasks, seed, n_vars, time.perf_counter() - t0, gap, obj, status)


def run_benchmark(
    sizes: Sequence[tuple[int, int]],
    seeds: Iterable[int],
    solve_cfg: SolveConfig | None = None,
    n_skills: int = 6,
    progress=None,
) -> list[BenchRow]:
    if not sizes:
        raise ValueError("no sizes given")
    cfg = solve_cfg or SolveConfig()
    seeds = list(seeds)
    rows = []
    for n, m in sizes:
        for seed in seeds:
            row = bench_cell(n, m, seed, cfg, n_skills)
            rows.append(row)
            if progress is not None:
                progress(row)
    return sorted(rows, key=lambda r: (r.n_employees, r.n_tasks, r.seed))


def summarize(rows: Sequence[BenchRow]) -> list[dict]:
    """Per-size medians of wall time and gap."""
    cells: dict[tuple[int, int], list[BenchRow]] = {}
    for row in rows:
        cells.setdefault((row.n_employees, row.n_tasks), []).append(row)
    out = []
    for (n, m), group in cells.items():
        out.append(
            {
                "n_employees": n,
                "n_tasks": m,
                "runs": len(group),
                "median_variable_count": statistics.median(r.variable_count for r in group),
                "median_wall_time_s": statistics.median(r.wall_time_s for r in group),
                "median_gap_percent": statistics.median(r.gap_percent for r in group),
                "max_gap_percent": max(r.gap_percent for r in group),
            }
        )
    return out


def write_bench_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))


def parse_sizes(text: str) -> list[tuple[int, int]]:
    """Parse ``20x80,50x150`` into [(20, 80), (50, 150)]."""
    sizes = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        try:
            n, m = part.split("x")
            sizes.append((int(n), int(m)))
        except ValueError:
            raise ValueError(f"bad size {part!r}; expected NxM such as 20x80") from None
    if not sizes:
        raise ValueError("no sizes given")
    return sizes
