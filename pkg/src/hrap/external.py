"""Adapter to scipy's HiGHS MILP solver, kept for cross-validation of the native solver."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .bnb import STATUS_FEASIBLE, STATUS_INFEASIBLE, STATUS_OPTIMAL, STATUS_TIME_LIMIT, MilpResult, SolveConfig, optimality_gap
from .domain import Assignment
from .milp import DEV_MAX, DEV_MINUS, DEV_PLUS, EQ, GE, LE, MilpModel, extract_assignment


def solve_highs(model: MilpModel, cfg: SolveConfig | None = None) -> MilpResult:
    cfg = cfg or SolveConfig()
    t0 = time.perf_counter()
    lo = np.where([s in (GE, EQ) for s in model.senses], model.rhs, -np.inf)
    hi = np.where([s in (LE, EQ) for s in model.senses], model.rhs, np.inf)
    constraints = [LinearConstraint(model.A, lo, hi)] if model.n_rows else []
    res = milp(
        model.objective,
        constraints=constraints,
        integrality=model.integrality.astype(int),
        bounds=Bounds(model.lower, model.upper),
        options={"time_limit": cfg.time_limit, "mip_rel_gap": cfg.gap_tolerance},
    )
    wall = time.perf_counter() - t0
    if res.x is None:
        status = STATUS_INFEASIBLE if res.status == 2 else STATUS_TIME_LIMIT
        return MilpResult(status, Assignment({}, model.unassigned), math.inf, math.inf, math.inf, 0, wall)
    x = res.x.copy()
    cols = model.assign_columns()
    x[cols] = np.round(x[cols])
    x = model.complete(x)
    obj = model.objective_value(x)
    bound = min(float(getattr(res, "mip_dual_bound", obj) or obj), obj)
    status = STATUS_OPTIMAL if res.status == 0 else (STATUS_TIME_LIMIT if res.status == 1 else STATUS_FEASIBLE)
    dev_col = DEV_MAX if DEV_MAX in model.columns else None
    dp = x[model.columns.index(dev_col or DEV_PLUS)] if (dev_col or DEV_PLUS) in model.columns else math.nan
    dm = x[model.columns.index(dev_col or DEV_MINUS)] if (dev_col or DEV_MINUS) in model.columns else math.nan
    return MilpResult(
        status=status,
        assignment=extract_assignment(model, x),
        objective=obj,
        best_bound=bound,
        gap_percent=optimality_gap(obj, bound),
        nodes=int(getattr(res, "mip_node_count", 0) or 0),
        wall_time=wall,
        dev_plus=float(dp),
        dev_minus=float(dm),
        values=x,
    )
