"""Workload fairness metrics and the baseline assigners they are compared on."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .domain import Assignment, ProblemInstance, partition_assignable, qualified_employees, target_workload


class DegenerateWorkloadWarning(UserWarning):
    """An all-zero workload vector was given a conventional metric value."""


def workload_vector(assignment: Assignment, instance: ProblemInstance) -> dict[str, float]:
    """Effective hours per employee; employees without tasks get 0."""
    loads = {e.id: 0.0 for e in instance.employees}
    employees = {e.id: e for e in instance.employees}
    for task_id, emp_id in assignment.pairs.items():
        task = instance.task(task_id)
        emp = employees.get(emp_id)
        if emp is None or not emp.has_skill(task.required_skill):
            raise ValueError(f"task {task_id} assigned to unqualified employee {emp_id}")
        loads[emp_id] += task.duration / emp.efficiency[task.required_skill]
    return loads


def _values(values) -> np.ndarray:
    if isinstance(values, Mapping):
        values = list(values.values())
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("metric undefined for an empty vector")
    return arr


def variance(values, sample: bool = False) -> float:
    """Population variance (divide by n); ``sample`` divides by n - 1."""
    x = _values(values)
    if sample:
        if x.size < 2:
            raise ValueError("sample variance needs at least two values")
        return float(np.var(x, ddof=1))
    return float(np.var(x))


def gini(values) -> float:
    """Mean absolute pairwise difference over twice the mean."""
    x = _values(values)
    mean = x.mean()
    if mean == 0:
        warnings.warn("all-zero workload: Gini taken as 0", DegenerateWorkloadWarning, stacklevel=2)
        return 0.0
    n = x.size
    # sum_i sum_j |x_i - x_j| from the sorted order: 2 * sum_k (2k - n + 1) x_(k)
    xs = np.sort(x)
    k = np.arange(n)
    pair_sum = 2.0 * float(np.sum((2 * k - n + 1) * xs))
    return pair_sum / (2.0 * n * n * mean)


def jain(values) -> float:
    x = _values(values)
    sq = float(np.sum(x * x))
    if sq == 0:
        warnings.warn("all-zero workload: Jain index taken as 1", DegenerateWorkloadWarning, stacklevel=2)
        return 1.0
    return float(np.sum(x)) ** 2 / (x.size * sq)


def deviation_stats(values, target: float) -> tuple[float, float]:
    """Largest overshoot above and shortfall below ``target`` (both >= 0)."""
    x = _values(values)
    return max(0.0, float(np.max(x - target))), max(0.0, float(np.max(target - x)))


@dataclass(frozen=True)
class Metrics:
    variance: float
    gini: float
    jain: float
    max_above: float
    max_below: float
    objective: float

    def as_dict(self) -> dict:
        return {
            "variance": self.variance,
            "gini": self.gini,
            "jain": self.jain,
            "max_above": self.max_above,
            "max_below": self.max_below,
            "objective": self.objective,
        }


def score(assignment: Assignment, instance: ProblemInstance, sample_variance: bool = False) -> Metrics:
    """All fairness metrics of one allocation; ``objective`` is max_above + max_below."""
    loads = list(workload_vector(assignment, instance).values())
    above, below = deviation_stats(loads, target_workload(instance))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWorkloadWarning)
        g, j = gini(loads), jain(loads)
    var = 0.0 if sample_variance and len(loads) < 2 else variance(loads, sample_variance)
    return Metrics(var, g, j, above, below, above + below)


def balance_objective(assignment: Assignment, instance: ProblemInstance) -> float:
    loads = list(workload_vector(assignment, instance).values())
    above, below = deviation_stats(loads, target_workload(instance))
    return above + below


def random_assignment(instance: ProblemInstance, seed: int | None = None) -> Assignment:
    """Each assignable task goes to a uniformly drawn qualified employee."""
    rng = np.random.default_rng(seed)
    assignable, unassigned = partition_assignable(instance)
    pairs = {}
    for task in assignable:
        qual = qualified_employees(task, instance.employees)
        pairs[task.id] = qual[int(rng.integers(len(qual)))].id
    return Assignment(pairs, unassigned)


def greedy_assignment(instance: ProblemInstance) -> Assignment:
    """Longest task first, each to the qualified employee with the least effective load so far.

    Stands in for a manager's hand allocation; ties go to the earlier employee.
    """
    assignable, unassigned = partition_assignable(instance)
    order = sorted(range(len(assignable)), key=lambda k: (-assignable[k].duration, k))
    load = {e.id: 0.0 for e in instance.employees}
    pairs = {}
    for k in order:
        task = assignable[k]
        qual = qualified_employees(task, instance.employees)
        best = min(qual, key=lambda e: load[e.id])  # min keeps the first of equal loads
        pairs[task.id] = best.id
        load[best.id] += task.duration / best.efficiency[task.required_skill]
    # report pairs in task input order
    ordered = {t.id: pairs[t.id] for t in assignable}
    return Assignment(ordered, unassigned)


def load_assignment_csv(path) -> Assignment:
    """Read ``task_id,employee_id`` rows; an empty employee marks an unassigned task."""
    pairs, unassigned = {}, []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["task_id", "employee_id"]:
            raise ValueError(f"{path}: expected header task_id,employee_id")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{reader.line_num}: expected 2 fields")
            if row[1]:
                pairs[row[0]] = row[1]
            else:
                unassigned.append(row[0])
    return Assignment(pairs, unassigned)


def write_assignment_csv(assignment: Assignment, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["task_id", "employee_id"])
        for task_id, emp_id in assignment.pairs.items():
            writer.writerow([task_id, emp_id])
        for task_id in assignment.unassigned:
            writer.writerow([task_id, ""])
