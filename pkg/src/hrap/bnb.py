"""Best-first branch-and-bound over the simplex relaxation."""

from __future__ import annotations

import heapq
import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .domain import Assignment
from .heuristics import AssignmentSearch
from .milp import INT_TOL, DEV_MAX, DEV_MINUS, DEV_PLUS, MilpModel, extract_assignment
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, Workspace, solve_lp

log = logging.getLogger(__name__)

OBJ_TOL = 1e-9

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE = "feasible"
STATUS_INFEASIBLE = "infeasible"
STATUS_TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class SolveConfig:
    gap_tolerance: float = 1e-6
    time_limit: float = 60.0
    node_limit: int | None = None
    seed: int = 0  # drives the incumbent heuristic's kicks; same seed, same run
    verbose: bool = False
    heuristic_kicks: int = 200

    def __post_init__(self):
        if not self.gap_tolerance >= 0:
            raise ValueError("gap_tolerance must be >= 0")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be > 0")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


@dataclass
class MilpResult:
    status: str
    assignment: Assignment
    objective: float
    best_bound: float
    gap_percent: float
    nodes: int
    wall_time: float
    gap_absolute: bool = False
    root_bound: float = math.nan
    dev_plus: float = math.nan
    dev_minus: float = math.nan
    values: np.ndarray | None = field(default=None, repr=False)

    def stats(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "best_bound": self.best_bound,
            "root_bound": self.root_bound,
            "gap_percent": self.gap_percent,
            "gap_absolute": self.gap_absolute,
            "nodes": self.nodes,
            "dev_above": self.dev_plus,
            "dev_below": self.dev_minus,
        }


def optimality_gap(incumbent: float, bound: float) -> float:
    """Relative gap in percent, ``(incumbent - bound) / |bound| * 100``.

    A zero bound makes the ratio undefined; the absolute difference times 100
    is returned instead (see ``gap_is_absolute``).
    """
    if gap_is_absolute(bound):
        return (incumbent - bound) * 100.0
    return (incumbent - bound) / abs(bound) * 100.0


def gap_is_absolute(bound: float) -> bool:
    return bound == 0


def _column_value(model: MilpModel, x, col) -> float:
    if x is None or col not in model.columns:
        return math.nan
    return float(x[model.columns.index(col)])


def _is_integral(values: np.ndarray, cols: np.ndarray) -> bool:
    v = values[cols]
    return bool(np.all(np.abs(v - np.round(v)) <= INT_TOL))


def _branch_column(values: np.ndarray, cols: np.ndarray) -> int:
    v = values[cols]
    frac = np.abs(v - np.round(v)) > INT_TOL
    dist = np.where(frac, np.abs(v - 0.5), np.inf)
    return int(cols[int(np.argmin(dist))])


def _done(incumbent: float, bound: float, tol: float) -> bool:
    if incumbent - bound <= OBJ_TOL:
        return True
    if bound == 0:
        return False
    return (incumbent - bound) / abs(bound) <= tol


def solve_milp(model: MilpModel, cfg: SolveConfig | None = None, start: Assignment | None = None) -> MilpResult:
    """Solve ``model`` exactly (up to ``cfg.gap_tolerance``).

    ``start`` is an optional feasible assignment used as an extra incumbent
    candidate alongside the rounded root relaxation.
    """
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    deadline = t0 + cfg.time_limit
    int_cols = model.assign_columns()
    search = AssignmentSearch(model, cfg.seed) if model.task_blocks else None
    polish_budget = max(1.0, 0.25 * cfg.time_limit)

    def result(status, x, obj, bound, nodes, root):
        assignment = extract_assignment(model, x) if x is not None else Assignment({}, model.unassigned)
        gap = optimality_gap(obj, bound) if x is not None else math.inf
        return MilpResult(
            status=status,
            assignment=assignment,
            objective=obj,
            best_bound=bound,
            gap_percent=gap,
            nodes=nodes,
            wall_time=time.perf_counter() - t0,
            gap_absolute=x is not None and gap_is_absolute(bound),
            root_bound=root,
            dev_plus=_column_value(model, x, DEV_MAX if DEV_MAX in model.columns else DEV_PLUS),
            dev_minus=_column_value(model, x, DEV_MAX if DEV_MAX in model.columns else DEV_MINUS),
            values=x,
        )

    ws = Workspace(model.A, model.senses, model.rhs)
    root = solve_lp(model, workspace=ws)
    nodes = 1
    if root.status == INFEASIBLE:
        return result(STATUS_INFEASIBLE, None, math.inf, math.inf, nodes, math.inf)
    if root.status == UNBOUNDED:
        raise ValueError("relaxation is unbounded; assignment models are always bounded")

    best_x, best_obj = None, math.inf

    def exact(choice):
        x = np.zeros(model.n_cols)
        x[choice] = 1.0
        x = model.complete(x)
        return x, model.objective_value(x)

    def offer(choice, kicks=None):
        """Consider an integral point; polish it when it beats the incumbent (or always, with kicks)."""
        nonlocal best_x, best_obj
        if choice is None or search is None:
            return
        x, obj = exact(choice)
        if kicks is not None or obj < best_obj - OBJ_TOL:
            budget = min(deadline, time.perf_counter() + polish_budget)
            x, obj = exact(search.improve(choice, budget, kicks or 0))
        if obj < best_obj - OBJ_TOL or best_x is None:
            best_obj, best_x = obj, x
            if cfg.verbose:
                log.info(json.dumps({"event": "incumbent", "node": nodes, "objective": obj}))

    if search is not None:
        offer(search.round(root.values, model.lower, model.upper), kicks=cfg.heuristic_kicks)
        if start is not None:
            offer([int(j) for j in np.flatnonzero(model.assignment_vector(start) > 0.5)], kicks=0)

    def _accept_integral(values):
        nonlocal best_x, best_obj
        x = values.copy()
        x[int_cols] = np.round(x[int_cols])
        x = model.complete(x)
        obj = model.objective_value(x)
        if obj < best_obj - OBJ_TOL or best_x is None:
            best_obj, best_x = obj, x

    seq = 0
    heap = [(root.objective, seq, model.lower.copy(), model.upper.copy(), root.values)]
    bound = root.objective
    status = STATUS_OPTIMAL
    if _is_integral(root.values, int_cols):
        _accept_integral(root.values)
        heap = []

    while heap:
        bound = max(bound, min(heap[0][0], best_obj))
        if _done(best_obj, bound, cfg.gap_tolerance):
            break
        if time.perf_counter() >= deadline:
            status = STATUS_TIME_LIMIT
            break
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            status = STATUS_FEASIBLE
            break
        node_bound, _, lo, hi, values = heapq.heappop(heap)
        if _done(best_obj, node_bound, cfg.gap_tolerance):
            continue
        j = _branch_column(values, int_cols)
        for branch_value in (0.0, 1.0):
            child_lo, child_hi = lo.copy(), hi.copy()
            child_lo[j] = child_hi[j] = branch_value
            lp = solve_lp(model, child_lo, child_hi, workspace=ws)
            nodes += 1
            if lp.status != OPTIMAL:
                continue
            child_bound = max(lp.objective, node_bound)
            if _done(best_obj, child_bound, cfg.gap_tolerance):
                continue
            if _is_integral(lp.values, int_cols):
                _accept_integral(lp.values)
                continue
            if search is not None:
                offer(search.round(lp.values, child_lo, child_hi))
            seq += 1
            heapq.heappush(heap, (child_bound, seq, child_lo, child_hi, lp.values))
        if cfg.verbose:
            log.info(json.dumps({"event": "node", "node": nodes, "bound": bound, "incumbent": best_obj, "open": len(heap)}))
    else:
        bound = best_obj if best_x is not None else math.inf

    if best_x is None:
        if status == STATUS_OPTIMAL:
            return result(STATUS_INFEASIBLE, None, math.inf, math.inf, nodes, root.objective)
        return result(status, None, math.inf, bound, nodes, root.objective)
    bound = min(bound, best_obj)
    if status == STATUS_OPTIMAL and not _done(best_obj, bound, cfg.gap_tolerance):
        status = STATUS_FEASIBLE
    return result(status, best_x, best_obj, bound, nodes, root.objective)
