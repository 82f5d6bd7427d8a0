"""Matrix-form MILP models for the workload-balance and cost-aware allocation problems.

Column layout is fixed: one binary column per (qualified employee, assignable
task) pair, tasks in input order and employees in input order within a task,
followed by the continuous deviation columns. Rows are the over-target rows
(one per employee), the under-target rows (one per employee) and one
assignment equality per task.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .domain import (
    Assignment,
    ProblemInstance,
    partition_assignable,
    qualified_employees,
    target_workload,
)

INT_TOL = 1e-6


@dataclass(frozen=True)
class AssignVar:
    employee_id: str
    task_id: str

    def label(self) -> str:
        return f"x[{self.employee_id},{self.task_id}]"


@dataclass(frozen=True)
class DevVar:
    name: str

    def label(self) -> str:
        return self.name


DEV_PLUS = DevVar("D+")
DEV_MINUS = DevVar("D-")
DEV_MAX = DevVar("Z")

LE, GE, EQ = "<=", ">=", "="


@dataclass(frozen=True, eq=False)
class MilpModel:
    """Minimize ``objective @ x`` s.t. ``A x (senses) rhs``, ``lower <= x <= upper``."""

    columns: tuple
    objective: np.ndarray
    A: sp.csr_matrix
    senses: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    integrality: np.ndarray
    row_names: tuple[str, ...] = ()
    unassigned: tuple[str, ...] = ()
    target: float = 0.0
    task_blocks: tuple[tuple[str, tuple[int, ...]], ...] = field(default=())

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.senses)

    @property
    def constraints(self):
        """Rows as (dense coefficient vector, relation, right-hand side)."""
        dense = self.A.toarray()
        return [(dense[r], self.senses[r], float(self.rhs[r])) for r in range(self.n_rows)]

    def assign_columns(self) -> np.ndarray:
        return np.flatnonzero(self.integrality)

    def complete(self, x: np.ndarray) -> np.ndarray:
        """Fill the continuous columns with their smallest feasible values.

        ``x`` carries values for the integral columns; continuous entries are
        overwritten. Every row holds at most one continuous column, and every
        continuous column has a nonnegative objective coefficient, so the
        result is the optimal completion.
        """
        x = np.array(x, dtype=float)
        cont = np.flatnonzero(~self.integrality)
        x[cont] = 0.0
        act = self.A @ x
        for j in cont:
            need = self.lower[j]
            col = self.A[:, j].tocoo()
            for r, a in zip(col.row, col.data):
                sense, slack = self.senses[r], self.rhs[r] - act[r]
                if (sense == LE and a < 0) or (sense == GE and a > 0) or sense == EQ:
                    need = max(need, slack / a)
            x[j] = need
        return x

    def objective_value(self, x: np.ndarray) -> float:
        return float(self.objective @ x)

    def max_violation(self, x: np.ndarray) -> float:
        act = self.A @ x
        viol = 0.0
        for r, sense in enumerate(self.senses):
            d = act[r] - self.rhs[r]
            if sense == LE:
                viol = max(viol, d)
            elif sense == GE:
                viol = max(viol, -d)
            else:
                viol = max(viol, abs(d))
        viol = max(viol, float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        return viol

    def assignment_vector(self, assignment: Assignment) -> np.ndarray:
        """Integral column values for ``assignment`` (continuous columns left at 0)."""
        x = np.zeros(self.n_cols)
        lookup = {c: j for j, c in enumerate(self.columns) if isinstance(c, AssignVar)}
        for task_id, emp_id in assignment.pairs.items():
            x[lookup[AssignVar(emp_id, task_id)]] = 1.0
        return x

    def to_lp_text(self) -> str:
        """Plain-text LP dump, one constraint per line, in model order."""

        def expr(coefs, cols):
            parts = []
            for j, a in zip(cols, coefs):
                sign = "-" if a < 0 else "+"
                parts.append(f"{sign} {abs(a):.12g} {self.columns[j].label()}")
            return " ".join(parts) if parts else "0"

        nz = np.flatnonzero(self.objective)
        lines = ["minimize", f"  obj: {expr(self.objective[nz], nz)}", "subject to"]
        csr = self.A.tocsr()
        for r in range(self.n_rows):
            lo, hi = csr.indptr[r], csr.indptr[r + 1]
            name = self.row_names[r] if self.row_names else f"r{r}"
            lines.append(f"  {name}: {expr(csr.data[lo:hi], csr.indices[lo:hi])} {self.senses[r]} {self.rhs[r]:.12g}")
        lines.append("bounds")
        for j, col in enumerate(self.columns):
            hi = "inf" if np.isinf(self.upper[j]) else f"{self.upper[j]:.12g}"
            lines.append(f"  {self.lower[j]:.12g} <= {col.label()} <= {hi}")
        lines.append("binary")
        for j in self.assign_columns():
            lines.append(f"  {self.columns[j].label()}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def _layout(instance: ProblemInstance):
    assignable, unassigned = partition_assignable(instance)
    columns, workload, blocks = [], [], []
    emp_row = {e.id: i for i, e in enumerate(instance.employees)}
    for task in assignable:
        idx = []
        for emp in qualified_employees(task, instance.employees):
            idx.append(len(columns))
            columns.append(AssignVar(emp.id, task.id))
            workload.append((emp_row[emp.id], task.duration / emp.efficiency[task.required_skill]))
        blocks.append((task.id, tuple(idx)))
    return assignable, unassigned, columns, workload, blocks


def _assemble(
    instance: ProblemInstance,
    assign_obj: Sequence[float],
    dev_weight: float,
    row_coef: Sequence[float] | None,
    minmax: bool,
) -> MilpModel:
    assignable, unassigned, columns, workload, blocks = _layout(instance)
    n_assign = len(columns)
    n_emp = len(instance.employees)
    target = target_workload(instance)
    if minmax:
        columns = columns + [DEV_MAX]
        plus_col = minus_col = n_assign
    else:
        columns = columns + [DEV_PLUS, DEV_MINUS]
        plus_col, minus_col = n_assign, n_assign + 1
    n = len(columns)

    rows, cols, vals = [], [], []
    for j, (i, w) in enumerate(workload):
        coef = w if row_coef is None else row_coef[j]
        rows += [i, n_emp + i]
        cols += [j, j]
        vals += [coef, coef]
    for i in range(n_emp):
        rows += [i, n_emp + i]
        cols += [plus_col, minus_col]
        vals += [-1.0, 1.0]
    for k, (_, idx) in enumerate(blocks):
        for j in idx:
            rows.append(2 * n_emp + k)
            cols.append(j)
            vals.append(1.0)
    n_rows = 2 * n_emp + len(blocks)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, n))
    A.sum_duplicates()

    senses = (LE,) * n_emp + (GE,) * n_emp + (EQ,) * len(blocks)
    rhs = np.concatenate([np.full(2 * n_emp, target), np.ones(len(blocks))])
    names = tuple(
        [f"over_{e.id}" for e in instance.employees]
        + [f"under_{e.id}" for e in instance.employees]
        + [f"assign_{tid}" for tid, _ in blocks]
    )
    objective = np.zeros(n)
    objective[:n_assign] = assign_obj
    objective[n_assign:] = dev_weight
    lower = np.zeros(n)
    upper = np.concatenate([np.ones(n_assign), np.full(n - n_assign, np.inf)])
    integrality = np.zeros(n, dtype=bool)
    integrality[:n_assign] = True
    return MilpModel(
        columns=tuple(columns),
        objective=objective,
        A=A,
        senses=senses,
        rhs=rhs,
        lower=lower,
        upper=upper,
        integrality=integrality,
        row_names=names,
        unassigned=tuple(unassigned),
        target=target,
        task_blocks=tuple(blocks),
    )


def build_balance_model(instance: ProblemInstance, minmax: bool = False) -> MilpModel:
    """Minimize D+ + D- (max overload plus max underload against the target).

    With ``minmax`` a single deviation column bounds both directions, giving
    the pure min-max form.
    """
    _, _, columns, _, _ = _layout(instance)
    return _assemble(instance, np.zeros(len(columns)), 1.0, None, minmax)


def build_cost_model(
    instance: ProblemInstance,
    hp,
    costs: Mapping[tuple[str, str], float],
    fairness_on_cost: bool = False,
    minmax: bool = False,
) -> MilpModel:
    """Minimize lam * (D+ + D-) + (1 - lam) * total assignment cost.

    The fairness rows bound efficiency-adjusted hours unless
    ``fairness_on_cost`` is set, in which case they bound per-employee cost.
    """
    _, _, columns, _, _ = _layout(instance)
    cost = []
    for col in columns:
        key = (col.employee_id, col.task_id)
        if key not in costs:
            raise KeyError(f"missing cost for employee {key[0]} on task {key[1]}")
        cost.append(float(costs[key]))
    cost = np.asarray(cost)
    return _assemble(instance, (1.0 - hp.lam) * cost, hp.lam, cost if fairness_on_cost else None, minmax)


def extract_assignment(model: MilpModel, solution: Sequence[float]) -> Assignment:
    solution = np.asarray(solution, dtype=float)
    pairs = {}
    for task_id, idx in model.task_blocks:
        chosen = []
        for j in idx:
            v = solution[j]
            r = round(v)
            if round(abs(v - r), 12) > INT_TOL or r not in (0, 1):
                raise ValueError(f"fractional value {v} for {model.columns[j].label()}")
            if r == 1:
                chosen.append(model.columns[j].employee_id)
        if len(chosen) != 1:
            raise ValueError(f"task {task_id} assigned to {len(chosen)} employees")
        pairs[task_id] = chosen[0]
    return Assignment(pairs, model.unassigned)
