"""Problem data for task allocation: employees, tasks, CSV ingestion and derived quantities."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

EMPLOYEE_HEADER = ["employee_id", "skill", "efficiency", "performance_rating"]
TASK_HEADER = ["task_id", "required_skill", "duration_hours", "complexity"]

EFFICIENCY_MIN = 0.1
EFFICIENCY_MAX = 1.0
PERFORMANCE_RANGE = (1, 5)
DEFAULT_COMPLEXITY_MAX = 5


class DatasetError(ValueError):
    """Raised when an input file cannot be parsed or fails validation."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
        elif line is not None:
            where = f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


def _check_token(value: str, what: str) -> str:
    if not value or value != value.strip() or "," in value:
        raise ValueError(f"invalid {what} {value!r}")
    return value


@dataclass(frozen=True)
class Employee:
    id: str
    efficiency: Mapping[str, float]
    performance: int

    def __post_init__(self):
        _check_token(self.id, "employee id")
        if not self.efficiency:
            raise ValueError(f"employee {self.id} has no skills")
        for skill, eff in self.efficiency.items():
            _check_token(skill, "skill")
            # updates from observed times may drop below the ingestion floor
            if not 0.0 < eff <= EFFICIENCY_MAX:
                raise ValueError(f"employee {self.id}: efficiency {eff} for {skill} outside (0, 1]")
        if not PERFORMANCE_RANGE[0] <= self.performance <= PERFORMANCE_RANGE[1]:
            raise ValueError(f"employee {self.id}: performance {self.performance} outside [1, 5]")
        object.__setattr__(self, "efficiency", dict(self.efficiency))

    @property
    def skills(self) -> frozenset[str]:
        return frozenset(self.efficiency)

    def has_skill(self, skill: str) -> bool:
        return skill in self.efficiency


@dataclass(frozen=True)
class Task:
    id: str
    required_skill: str
    duration: float
    complexity: int

    def __post_init__(self):
        _check_token(self.id, "task id")
        _check_token(self.required_skill, "skill")
        if not self.duration > 0:
            raise ValueError(f"task {self.id}: duration must be positive, got {self.duration}")
        if self.complexity < 1:
            raise ValueError(f"task {self.id}: complexity must be >= 1, got {self.complexity}")


@dataclass(frozen=True)
class ProblemInstance:
    employees: tuple[Employee, ...]
    tasks: tuple[Task, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "employees", tuple(self.employees))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.employees:
            raise ValueError("instance needs at least one employee")
        _require_unique([e.id for e in self.employees], "employee id")
        _require_unique([t.id for t in self.tasks], "task id")

    def employee(self, employee_id: str) -> Employee:
        for emp in self.employees:
            if emp.id == employee_id:
                return emp
        raise KeyError(employee_id)

    def task(self, task_id: str) -> Task:
        for task in self.tasks:
            if task.id == task_id:
                return task
        raise KeyError(task_id)

    def with_efficiencies(self, efficiencies: Mapping[tuple[str, str], float]) -> ProblemInstance:
        """Return a copy with (employee_id, skill) efficiencies replaced."""
        employees = []
        for emp in self.employees:
            eff = dict(emp.efficiency)
            for skill in eff:
                key = (emp.id, skill)
                if key in efficiencies:
                    eff[skill] = efficiencies[key]
            employees.append(Employee(emp.id, eff, emp.performance))
        return ProblemInstance(tuple(employees), self.tasks)

    def with_employees(self, employee_ids: Iterable[str]) -> ProblemInstance:
        keep = set(employee_ids)
        return ProblemInstance(tuple(e for e in self.employees if e.id in keep), self.tasks)


@dataclass(frozen=True)
class Assignment:
    """Task-to-employee mapping plus the tasks nobody is qualified for."""

    pairs: Mapping[str, str]
    unassigned: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "pairs", dict(self.pairs))
        object.__setattr__(self, "unassigned", tuple(self.unassigned))

    def tasks_of(self, employee_id: str) -> list[str]:
        return [t for t, e in self.pairs.items() if e == employee_id]

    def check(self, instance: ProblemInstance) -> None:
        """Raise ValueError unless this is a feasible assignment for ``instance``."""
        task_ids = [t.id for t in instance.tasks]
        covered = list(self.pairs) + list(self.unassigned)
        if sorted(covered) != sorted(task_ids):
            raise ValueError("assignment does not partition the task set")
        employees = {e.id: e for e in instance.employees}
        for task_id, emp_id in self.pairs.items():
            emp = employees.get(emp_id)
            task = instance.task(task_id)
            if emp is None or not emp.has_skill(task.required_skill):
                raise ValueError(f"task {task_id} assigned to unqualified employee {emp_id}")


def _require_unique(ids: Sequence[str], what: str) -> None:
    seen = set()
    for x in ids:
        if x in seen:
            raise ValueError(f"duplicate {what} {x!r}")
        seen.add(x)


def qualified_employees(task: Task, employees: Sequence[Employee]) -> list[Employee]:
    """Employees holding the task's skill, in input order."""
    return [e for e in employees if e.has_skill(task.required_skill)]


def qualified_set(task: Task, employees: Sequence[Employee]) -> frozenset[str]:
    return frozenset(e.id for e in qualified_employees(task, employees))


def partition_assignable(instance: ProblemInstance) -> tuple[list[Task], list[str]]:
    """Split tasks into those some employee can take and the ids of those nobody can."""
    skills = set()
    for emp in instance.employees:
        skills.update(emp.efficiency)
    assignable, unassigned = [], []
    for task in instance.tasks:
        if task.required_skill in skills:
            assignable.append(task)
        else:
            unassigned.append(task.id)
    return assignable, unassigned


def total_workload(instance: ProblemInstance) -> float:
    assignable, _ = partition_assignable(instance)
    return float(sum(t.duration for t in assignable))


def target_workload(instance: ProblemInstance) -> float:
    """Average nominal hours per employee over the assignable tasks."""
    if not instance.employees:
        raise ValueError("target workload undefined without employees")
    return total_workload(instance) / len(instance.employees)


def variable_count(instance: ProblemInstance) -> int:
    """Assignment variables over qualified pairs, plus the two deviation variables."""
    assignable, _ = partition_assignable(instance)
    return sum(len(qualified_employees(t, instance.employees)) for t in assignable) + 2


def required_skills(instance: ProblemInstance) -> set[str]:
    return {t.required_skill for t in instance.tasks}


# --- CSV ingestion ---------------------------------------------------------


def _open_rows(path: str | Path, header: list[str]):
    path = Path(path)
    if not path.is_file():
        raise DatasetError("file not found", path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DatasetError("empty file, expected header " + ",".join(header), path, 1)
        if [c.strip() for c in first] != header:
            raise DatasetError(f"bad header {','.join(first)!r}, expected {','.join(header)!r}", path, 1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetError(f"expected {len(header)} fields, got {len(row)}", path, reader.line_num)
            yield reader.line_num, row


def _parse(fn, text: str, what: str, path, line: int):
    try:
        return fn(text)
    except ValueError:
        raise DatasetError(f"cannot parse {what} {text!r}", path, line) from None


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


def load_employees(csv_path: str | Path) -> list[Employee]:
    effs: dict[str, dict[str, float]] = {}
    perf: dict[str, int] = {}
    for line, row in _open_rows(csv_path, EMPLOYEE_HEADER):
        emp_id, skill = row[0], row[1]
        try:
            _check_token(emp_id, "employee id")
            _check_token(skill, "skill")
        except ValueError as exc:
            raise DatasetError(str(exc), csv_path, line) from None
        eff = _parse(float, row[2], "efficiency", csv_path, line)
        rating = _parse(_parse_int, row[3], "performance rating", csv_path, line)
        if not EFFICIENCY_MIN <= eff <= EFFICIENCY_MAX:
            raise DatasetError(f"efficiency {eff} out of range [0.1, 1]", csv_path, line)
        if not PERFORMANCE_RANGE[0] <= rating <= PERFORMANCE_RANGE[1]:
            raise DatasetError(f"performance rating {rating} out of range [1, 5]", csv_path, line)
        skills = effs.setdefault(emp_id, {})
        if skill in skills:
            raise DatasetError(f"duplicate skill entry ({emp_id}, {skill})", csv_path, line)
        if perf.setdefault(emp_id, rating) != rating:
            raise DatasetError(
                f"conflicting performance ratings for {emp_id}: {perf[emp_id]} vs {rating}", csv_path, line
            )
        skills[skill] = eff
    return [Employee(emp_id, eff, perf[emp_id]) for emp_id, eff in effs.items()]


def load_tasks(csv_path: str | Path, complexity_max: int = DEFAULT_COMPLEXITY_MAX) -> list[Task]:
    tasks = []
    seen = set()
    for line, row in _open_rows(csv_path, TASK_HEADER):
        task_id, skill = row[0], row[1]
        try:
            _check_token(task_id, "task id")
            _check_token(skill, "skill")
        except ValueError as exc:
            raise DatasetError(str(exc), csv_path, line) from None
        duration = _parse(float, row[2], "duration", csv_path, line)
        complexity = _parse(_parse_int, row[3], "complexity", csv_path, line)
        if not duration > 0:
            raise DatasetError(f"nonpositive duration {duration}", csv_path, line)
        if not 1 <= complexity <= complexity_max:
            raise DatasetError(f"complexity {complexity} out of bounds [1, {complexity_max}]", csv_path, line)
        if task_id in seen:
            raise DatasetError(f"duplicate task id {task_id}", csv_path, line)
        seen.add(task_id)
        tasks.append(Task(task_id, skill, duration, complexity))
    return tasks


def load_instance(
    employees_csv: str | Path, tasks_csv: str | Path, complexity_max: int = DEFAULT_COMPLEXITY_MAX
) -> ProblemInstance:
    employees = load_employees(employees_csv)
    if not employees:
        raise DatasetError("no employees", employees_csv)
    return ProblemInstance(tuple(employees), tuple(load_tasks(tasks_csv, complexity_max)))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_employees(employees: Iterable[Employee], csv_path: str | Path) -> None:
    with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EMPLOYEE_HEADER)
        for emp in employees:
            for skill, eff in emp.efficiency.items():
                writer.writerow([emp.id, skill, _fmt(eff), emp.performance])


def write_tasks(tasks: Iterable[Task], csv_path: str | Path) -> None:
    with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TASK_HEADER)
        for task in tasks:
            writer.writerow([task.id, task.required_skill, _fmt(task.duration), task.complexity])


def write_instance(instance: ProblemInstance, employees_csv: str | Path, tasks_csv: str | Path) -> None:
    write_employees(instance.employees, employees_csv)
    write_tasks(instance.tasks, tasks_csv)
