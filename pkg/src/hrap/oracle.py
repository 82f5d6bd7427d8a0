"""Exhaustive enumeration of assignments, used to check the branch-and-bound solver.

Works from the instance directly and never touches the matrix model, so the
two routes share no code beyond the data types.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .bnb import OBJ_TOL, STATUS_OPTIMAL, MilpResult
from .cost import Hyperparams, assignment_cost
from .domain import Assignment, ProblemInstance, partition_assignable, qualified_employees

ENUMERATION_LIMIT = 10**7
CHUNK = 1 << 16


class OracleTooLarge(ValueError):
    pass


def enumeration_size(instance: ProblemInstance) -> int:
    assignable, _ = partition_assignable(instance)
    return math.prod(len(qualified_employees(t, instance.employees)) for t in assignable)


def brute_force(
    instance: ProblemInstance,
    mode: str = "balance",
    hp: Hyperparams | None = None,
    fairness_on_cost: bool = False,
    minmax: bool = False,
) -> MilpResult:
    """Enumerate every feasible assignment and return the cheapest.

    Ties (within 1e-9) go to the lexicographically smallest choice vector,
    where each task's choice is the position of its employee among the
    task's qualified employees in input order.
    """
    if mode not in ("balance", "cost"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "cost" and hp is None:
        hp = Hyperparams()
    t0 = time.perf_counter()
    assignable, unassigned = partition_assignable(instance)
    size = enumeration_size(instance)
    if size > ENUMERATION_LIMIT:
        raise OracleTooLarge(
            f"{size} assignments exceed the enumeration limit {ENUMERATION_LIMIT}; use solve_milp instead"
        )
    emp_index = {e.id: i for i, e in enumerate(instance.employees)}
    n_emp = len(instance.employees)
    target = sum(t.duration for t in assignable) / n_emp

    who, load, cost = [], [], []
    for task in assignable:
        qual = qualified_employees(task, instance.employees)
        who.append(np.array([emp_index[e.id] for e in qual]))
        hours = np.array([task.duration / e.efficiency[task.required_skill] for e in qual])
        c = np.array([assignment_cost(e, task, hp) for e in qual]) if mode == "cost" else np.zeros(len(qual))
        cost.append(c)
        load.append(c if fairness_on_cost else hours)
    radix = [len(w) for w in who]

    def objectives(start: int, stop: int):
        idx = np.arange(start, stop, dtype=np.int64)
        digits = np.empty((len(idx), len(radix)), dtype=np.int64)
        rest = idx.copy()
        for k in range(len(radix) - 1, -1, -1):
            digits[:, k] = rest % radix[k]
            rest //= radix[k]
        W = np.zeros((len(idx), n_emp))
        total_cost = np.zeros(len(idx))
        rows = np.arange(len(idx))
        for k in range(len(radix)):
            d = digits[:, k]
            np.add.at(W, (rows, who[k][d]), load[k][d])
            total_cost += cost[k][d]
        above = np.maximum(0.0, (W - target).max(axis=1))
        below = np.maximum(0.0, (target - W).max(axis=1))
        dev = np.maximum(above, below) if minmax else above + below
        obj = dev if mode == "balance" else hp.lam * dev + (1 - hp.lam) * total_cost
        return obj, digits, above, below

    best = math.inf
    for start in range(0, size, CHUNK):
        obj, *_ = objectives(start, min(size, start + CHUNK))
        best = min(best, float(obj.min()))
    for start in range(0, size, CHUNK):
        obj, digits, above, below = objectives(start, min(size, start + CHUNK))
        hits = np.flatnonzero(obj <= best + OBJ_TOL)
        if len(hits):
            k = int(hits[0])
            choice, dplus, dminus, value = digits[k], float(above[k]), float(below[k]), float(obj[k])
            break
    pairs = {}
    for task, w, c in zip(assignable, who, choice):
        pairs[task.id] = instance.employees[int(w[c])].id
    if minmax:
        dplus = dminus = max(dplus, dminus)
    return MilpResult(
        status=STATUS_OPTIMAL,
        assignment=Assignment(pairs, unassigned),
        objective=value,
        best_bound=value,
        gap_percent=0.0,
        nodes=size,
        wall_time=time.perf_counter() - t0,
        root_bound=value,
        dev_plus=dplus,
        dev_minus=dminus,
    )
