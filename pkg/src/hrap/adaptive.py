"""Iterated allocation: solve, observe completion times, re-estimate efficiencies, drop weak employees."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np

from .bnb import SolveConfig, solve_milp
from .cost import Hyperparams, cost_matrix
from .domain import Assignment, Employee, ProblemInstance, required_skills
from .metrics import greedy_assignment
from .milp import build_balance_model, build_cost_model

FILTER_RULES = ("max", "mean", "any")
OBSERVATION_HEADER = ["iteration", "employee_id", "task_id", "actual_time_hours"]


class AdaptiveError(RuntimeError):
    pass


class MissingObservation(KeyError):
    def __init__(self, iteration: int, employee_id: str, task_id: str):
        self.iteration, self.employee_id, self.task_id = iteration, employee_id, task_id
        super().__init__(f"no observation for iteration {iteration}, employee {employee_id}, task {task_id}")

    def __str__(self):
        return self.args[0]


class ObservationSource(Protocol):
    def measure(self, employee_id: str, task_id: str, nominal_duration: float, iteration: int = 0) -> float:
        """Actual hours the employee took on the task (> 0)."""


class SimulatedWorkforce:
    """Completion times drawn as ``d / e_true * exp(sigma * z)`` with z standard normal."""

    def __init__(
        self,
        true_efficiency: Mapping[tuple[str, str], float],
        task_skill: Mapping[str, str],
        noise_sigma: float = 0.0,
        seed: int = 0,
    ):
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        for key, eff in true_efficiency.items():
            if not 0 < eff <= 1:
                raise ValueError(f"true efficiency {eff} for {key} outside (0, 1]")
        self.true_efficiency = dict(true_efficiency)
        self.task_skill = dict(task_skill)
        self.noise_sigma = noise_sigma
        self.rng = np.random.default_rng(seed)

    @classmethod
    def from_instance(
        cls,
        instance: ProblemInstance,
        true_efficiency: Mapping[tuple[str, str], float] | None = None,
        noise_sigma: float = 0.0,
        seed: int = 0,
    ) -> SimulatedWorkforce:
        """Simulator whose ground truth defaults to the instance's own efficiencies."""
        truth = {(e.id, s): v for e in instance.employees for s, v in e.efficiency.items()}
        if true_efficiency is not None:
            truth.update(true_efficiency)
        return cls(truth, {t.id: t.required_skill for t in instance.tasks}, noise_sigma, seed)

    def measure(self, employee_id: str, task_id: str, nominal_duration: float, iteration: int = 0) -> float:
        eff = self.true_efficiency[(employee_id, self.task_skill[task_id])]
        z = self.rng.standard_normal()
        return nominal_duration / eff * math.exp(self.noise_sigma * z)


class FileObservations:
    """Observed times read from ``iteration,employee_id,task_id,actual_time_hours`` rows."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self.times: dict[tuple[int, str, str], float] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != OBSERVATION_HEADER:
                raise ValueError(f"{path}: expected header {','.join(OBSERVATION_HEADER)}")
            for row in reader:
                if not row:
                    continue
                try:
                    it, emp, task, actual = int(row[0]), row[1], row[2], float(row[3])
                except (ValueError, IndexError):
                    raise ValueError(f"{path}:{reader.line_num}: malformed observation row") from None
                if not actual > 0:
                    raise ValueError(f"{path}:{reader.line_num}: actual time must be positive")
                self.times[(it, emp, task)] = actual

    def measure(self, employee_id: str, task_id: str, nominal_duration: float, iteration: int = 0) -> float:
        try:
            return self.times[(iteration, employee_id, task_id)]
        except KeyError:
            raise MissingObservation(iteration, employee_id, task_id) from None


def update_efficiency(d_t: float, actual_time: float) -> float:
    """Efficiency implied by one observation, capped at 1."""
    if not d_t > 0 or not actual_time > 0:
        raise ValueError(f"durations must be positive (nominal {d_t}, actual {actual_time})")
    return min(1.0, d_t / actual_time)


@dataclass(frozen=True)
class FilterResult:
    employees: list[Employee]
    guard_triggered: bool


def _rating(emp: Employee, efficiencies: Mapping[tuple[str, str], float], rule: str) -> float:
    vals = [efficiencies.get((emp.id, s), e) for s, e in emp.efficiency.items()]
    if rule == "max":
        return max(vals)
    if rule == "mean":
        return sum(vals) / len(vals)
    if rule == "any":
        return min(vals)
    raise ValueError(f"unknown filter rule {rule!r}; expected one of {FILTER_RULES}")


def filter_employees(
    employees,
    efficiencies: Mapping[tuple[str, str], float],
    threshold: float,
    min_employees: int,
    rule: str = "max",
) -> FilterResult:
    """Keep employees whose efficiency (reduced over skills by ``rule``) exceeds ``threshold``.

    ``max`` drops only employees weak at every skill, ``any`` drops an employee
    weak at any skill, ``mean`` compares the average. When fewer than
    ``min_employees`` would remain, nobody is dropped and the guard is flagged.
    """
    employees = list(employees)
    kept = [e for e in employees if _rating(e, efficiencies, rule) > threshold]
    if len(kept) < min_employees:
        return FilterResult(employees, True)
    return FilterResult(kept, False)


@dataclass(frozen=True)
class AdaptiveConfig:
    max_iterations: int = 5
    threshold: float = 0.1
    min_employees: int | None = None
    mode: str = "balance"
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    filter_rule: str = "max"
    reset_efficiency: bool = False
    smoothing: float | None = None
    fairness_on_cost: bool = False
    solve: SolveConfig = field(default_factory=SolveConfig)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.threshold < 1:
            raise ValueError("threshold must lie in [0, 1)")
        if self.min_employees is not None and self.min_employees < 1:
            raise ValueError("min_employees must be >= 1")
        if self.mode not in ("balance", "cost"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.filter_rule not in FILTER_RULES:
            raise ValueError(f"unknown filter rule {self.filter_rule!r}")
        if self.smoothing is not None and not 0 < self.smoothing <= 1:
            raise ValueError("smoothing weight must lie in (0, 1]")


@dataclass
class Observation:
    employee_id: str
    task_id: str
    skill: str
    nominal: float
    actual: float
    efficiency: float


@dataclass
class IterationRecord:
    iteration: int
    assignment: Assignment
    observations: list[Observation]
    efficiencies: dict[tuple[str, str], float]
    survivors: list[str]
    guard_triggered: bool
    solver: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "iteration": self.iteration,
                "assignment": self.assignment.pairs,
                "unassigned": list(self.assignment.unassigned),
                "observations": [vars(o) for o in self.observations],
                "efficiencies": [[e, s, v] for (e, s), v in self.efficiencies.items()],
                "survivors": self.survivors,
                "guard_triggered": self.guard_triggered,
                "solver": self.solver,
            },
            sort_keys=True,
        )


@dataclass
class AdaptiveTrace:
    records: list[IterationRecord]
    final_instance: ProblemInstance

    @property
    def final_efficiencies(self) -> dict[tuple[str, str], float]:
        return self.records[-1].efficiencies if self.records else {}

    def __len__(self):
        return len(self.records)

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(rec.to_json() + "\n")

    def write_efficiencies(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["employee_id", "skill", "efficiency"])
            for (emp, skill), eff in self.final_efficiencies.items():
                writer.writerow([emp, skill, repr(eff)])


def _solve(instance: ProblemInstance, cfg: AdaptiveConfig):
    if cfg.mode == "cost":
        costs = cost_matrix(instance, cfg.hyperparams)
        model = build_cost_model(instance, cfg.hyperparams, costs, fairness_on_cost=cfg.fairness_on_cost)
    else:
        model = build_balance_model(instance)
    return solve_milp(model, cfg.solve, start=greedy_assignment(instance))


def run_adaptive(instance: ProblemInstance, source: ObservationSource, cfg: AdaptiveConfig | None = None) -> AdaptiveTrace:
    cfg = cfg or AdaptiveConfig()
    current = instance
    if cfg.reset_efficiency:
        current = instance.with_efficiencies({(e.id, s): 1.0 for e in instance.employees for s in e.efficiency})
    min_employees = cfg.min_employees if cfg.min_employees is not None else max(1, len(required_skills(instance)))
    estimates = {(e.id, s): v for e in current.employees for s, v in e.efficiency.items()}
    tasks = {t.id: t for t in instance.tasks}
    records = []

    for it in range(cfg.max_iterations):
        res = _solve(current, cfg)
        if res.status == "infeasible" or res.values is None:
            raise AdaptiveError(f"iteration {it}: solver returned {res.status} without an allocation")
        observations = []
        for task_id, emp_id in res.assignment.pairs.items():
            task = tasks[task_id]
            actual = source.measure(emp_id, task_id, task.duration, iteration=it)
            new = update_efficiency(task.duration, actual)
            key = (emp_id, task.required_skill)
            if cfg.smoothing is not None:
                new = cfg.smoothing * new + (1 - cfg.smoothing) * estimates[key]
            estimates[key] = new
            observations.append(Observation(emp_id, task_id, task.required_skill, task.duration, actual, new))
        current = current.with_efficiencies(estimates)
        kept = filter_employees(current.employees, estimates, cfg.threshold, min_employees, cfg.filter_rule)
        survivors = [e.id for e in kept.employees]
        records.append(
            IterationRecord(
                iteration=it,
                assignment=res.assignment,
                observations=observations,
                efficiencies={k: v for k, v in estimates.items() if k[0] in {e.id for e in current.employees}},
                survivors=survivors,
                guard_triggered=kept.guard_triggered,
                solver=res.stats() | {"wall_time": res.wall_time},
            )
        )
        current = current.with_employees(survivors)
    return AdaptiveTrace(records, current)
