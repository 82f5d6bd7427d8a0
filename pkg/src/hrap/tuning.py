"""Search over the objective weights (lambda, alpha, beta, gamma) and summarise how much they matter."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bnb import SolveConfig, solve_milp
from .cost import Hyperparams, cost_matrix
from .domain import ProblemInstance
from .metrics import greedy_assignment
from .milp import build_cost_model

TUNING_HEADER = ["rank", "lambda", "alpha", "beta", "gamma", "objective", "dev_above", "dev_below", "total_cost"]
STRATEGIES = ("grid", "random")
PARAMS = ("lambda", "alpha", "beta", "gamma")

# range thresholds for the sensitivity labels
LOW_RANGE = 0.01
HIGH_RANGE = 0.3


@dataclass(frozen=True)
class TuningEntry:
    hyperparams: Hyperparams
    objective: float
    dev_above: float
    dev_below: float
    total_cost: float

    def sort_key(self):
        return (self.objective, *self.hyperparams.key())


@dataclass
class TuningResult:
    entries: list[TuningEntry]
    evaluated: int
    failures: list[tuple[Hyperparams, str]] = field(default_factory=list)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TUNING_HEADER)
            for rank, e in enumerate(self.entries, start=1):
                hp = e.hyperparams
                writer.writerow(
                    [rank, hp.lam, hp.alpha, hp.beta, hp.gamma, e.objective, e.dev_above, e.dev_below, e.total_cost]
                )


def grid_points(lambda_points: int = 11, steps: int = 6, normalize: bool = True) -> list[Hyperparams]:
    """The initial point first, then lambda x weight lattice in lexicographic order.

    ``steps`` is the lattice resolution (6 gives a 1/6 step). With
    ``normalize`` only weights on the alpha + beta + gamma = 1 simplex are kept;
    otherwise the full cube lattice is used.
    """
    if lambda_points < 1 or steps < 1:
        raise ValueError("lambda_points and steps must be >= 1")
    lams = [0.5] if lambda_points == 1 else [i / (lambda_points - 1) for i in range(lambda_points)]
    if normalize:
        weights = [(i / steps, j / steps, (steps - i - j) / steps) for i in range(steps + 1) for j in range(steps + 1 - i)]
    else:
        weights = [tuple(k / steps for k in w) for w in itertools.product(range(steps + 1), repeat=3)]
    first = Hyperparams(normalize=normalize)
    points = [first]
    for lam in lams:
        for a, b, g in sorted(weights):
            hp = Hyperparams(lam, a, b, g, normalize=normalize)
            if hp.key() != first.key():
                points.append(hp)
    return points


def random_points(budget: int, seed: int = 0, normalize: bool = True) -> list[Hyperparams]:
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(budget):
        lam = float(rng.uniform(0.0, 1.0))
        w = rng.dirichlet([1.0, 1.0, 1.0]) if normalize else rng.uniform(0.0, 1.0, size=3)
        if normalize:
            w = w / w.sum()
        points.append(Hyperparams(lam, float(w[0]), float(w[1]), float(w[2]), normalize=normalize))
    return points


def evaluate(
    instance: ProblemInstance, hp: Hyperparams, solve_cfg: SolveConfig | None = None, fairness_on_cost: bool = False
) -> TuningEntry:
    """Solve the cost model at one weight setting."""
    costs = cost_matrix(instance, hp)
    model = build_cost_model(instance, hp, costs, fairness_on_cost=fairness_on_cost)
    res = solve_milp(model, solve_cfg, start=greedy_assignment(instance))
    if res.values is None:
        raise RuntimeError(f"solver returned {res.status} without an allocation")
    total = sum(costs[(emp, task)] for task, emp in res.assignment.pairs.items())
    return TuningEntry(hp, res.objective, res.dev_plus, res.dev_minus, total)


def tune_hyperparams(
    instance: ProblemInstance,
    strategy: str = "grid",
    budget: int | None = None,
    seed: int = 0,
    solve_cfg: SolveConfig | None = None,
    top: int = 10,
    lambda_points: int = 11,
    steps: int = 6,
    normalize: bool = True,
    fairness_on_cost: bool = False,
) -> TuningResult:
    """Evaluate weight settings and rank them by objective.

    Grid search visits its points in order and stops after ``budget`` of them
    (all when None); random search draws ``budget`` points. Ties on the
    objective are ordered by (lambda, alpha, beta, gamma).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if budget is not None and budget < 1:
        raise ValueError("budget must be >= 1")
    if top < 1:
        raise ValueError("top must be >= 1")
    if strategy == "grid":
        points = grid_points(lambda_points, steps, normalize)
        if budget is not None:
            points = points[:budget]
    else:
        if budget is None:
            raise ValueError("random search needs a budget")
        points = random_points(budget, seed, normalize)

    entries, failures = [], []
    for hp in points:
        try:
            entries.append(evaluate(instance, hp, solve_cfg, fairness_on_cost))
        except Exception as exc:  # one bad sample must not sink the search
            failures.append((hp, f"{type(exc).__name__}: {exc}"))
    entries.sort(key=TuningEntry.sort_key)
    return TuningResult(entries[:top], len(points), failures)


@dataclass(frozen=True)
class Sensitivity:
    parameter: str
    minimum: float
    maximum: float
    range: float
    level: str


def sensitivity_level(value_range: float) -> str:
    if value_range < LOW_RANGE:
        return "low"
    if value_range < HIGH_RANGE:
        return "medium"
    return "high"


def sensitivity_report(result: TuningResult) -> list[Sensitivity]:
    """Spread of each weight across the ranked entries."""
    if not result.entries:
        raise ValueError("sensitivity needs at least one ranked entry")
    keys = np.array([e.hyperparams.key() for e in result.entries])
    out = []
    for col, name in enumerate(PARAMS):
        lo, hi = float(keys[:, col].min()), float(keys[:, col].max())
        out.append(Sensitivity(name, lo, hi, hi - lo, sensitivity_level(hi - lo)))
    return out
