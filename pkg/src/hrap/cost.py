"""Per-pair assignment cost and the weights that combine its terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Collection

from .domain import Employee, ProblemInstance, Task, partition_assignable, qualified_employees

SUM_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Hyperparams:
    """Objective weights: ``lam`` trades balance against cost, alpha/beta/gamma weight the cost terms.

    With ``normalize`` (the default) the cost weights must sum to one.
    """

    lam: float = 0.5
    alpha: float = 1 / 3
    beta: float = 1 / 3
    gamma: float = 1 / 3
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite value >= 0, got {value}")
        if self.normalize and abs(self.alpha + self.beta + self.gamma - 1.0) > SUM_TOL:
            raise ValueError(
                f"alpha + beta + gamma must equal 1 (got {self.alpha + self.beta + self.gamma}); "
                "disable normalization to allow other weights"
            )

    def key(self) -> tuple[float, float, float, float]:
        return (self.lam, self.alpha, self.beta, self.gamma)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


def skill_mismatch(employee: Employee, required: str | Collection[str]) -> float:
    """Fraction of the required skills the employee lacks.

    ``required`` is a single skill, a collection of skills, or a Task.
    """
    if isinstance(required, Task):
        required = required.required_skill
    needed = {required} if isinstance(required, str) else set(required)
    if not needed:
        raise ValueError("task skill requirement is empty")
    return 1.0 - len(needed & employee.skills) / len(needed)


def assignment_cost(employee: Employee, task: Task, hp: Hyperparams) -> float:
    if not employee.has_skill(task.required_skill):
        raise ValueError(f"employee {employee.id} is not qualified for task {task.id}")
    eff = employee.efficiency[task.required_skill]
    return (
        hp.alpha * task.duration / eff
        + hp.beta * skill_mismatch(employee, task.required_skill)
        + hp.gamma * task.complexity / employee.performance
    )


def cost_matrix(instance: ProblemInstance, hp: Hyperparams) -> dict[tuple[str, str], float]:
    """Cost of every (qualified employee, assignable task) pair."""
    assignable, _ = partition_assignable(instance)
    costs = {}
    for task in assignable:
        for emp in qualified_employees(task, instance.employees):
            costs[(emp.id, task.id)] = assignment_cost(emp, task, hp)
    return costs


def min_total_cost(instance: ProblemInstance, costs: dict[tuple[str, str], float]) -> float:
    """Sum over tasks of the cheapest qualified employee's cost."""
    assignable, _ = partition_assignable(instance)
    return sum(
        min(costs[(e.id, t.id)] for e in qualified_employees(t, instance.employees)) for t in assignable
    )
