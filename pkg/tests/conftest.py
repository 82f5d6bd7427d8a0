import numpy as np
import pytest

from hrap.domain import Employee, ProblemInstance, Task


def tiny_instance(seed: int, max_employees: int = 5, max_tasks: int = 8, n_skills: int = 3) -> ProblemInstance:
    """Random instance small enough to enumerate; may include unassignable tasks."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_employees + 1))
    m = int(rng.integers(1, max_tasks + 1))
    skills = [f"s{k}" for k in range(n_skills)]
    employees = []
    for i in range(n):
        held = rng.choice(n_skills, size=int(rng.integers(1, n_skills + 1)), replace=False)
        eff = {skills[s]: float(rng.choice([0.1, 0.25, 0.5, 0.8, 1.0])) for s in sorted(held)}
        employees.append(Employee(f"e{i}", eff, int(rng.integers(1, 6))))
    tasks = [
        Task(f"t{j}", skills[int(rng.integers(n_skills))], float(rng.integers(1, 41)), int(rng.integers(1, 4)))
        for j in range(m)
    ]
    return ProblemInstance(tuple(employees), tuple(tasks))


def make_instance(employees, tasks) -> ProblemInstance:
    """Build from ``[(id, {skill: eff}, perf)]`` and ``[(id, skill, hours, complexity)]``."""
    return ProblemInstance(
        tuple(Employee(i, dict(e), p) for i, e, p in employees),
        tuple(Task(*t) for t in tasks),
    )


@pytest.fixture
def two_by_two():
    return make_instance(
        [("e1", {"java": 1.0}, 3), ("e2", {"java": 1.0}, 3)],
        [("t1", "java", 6.0, 1), ("t2", "java", 6.0, 1)],
    )
