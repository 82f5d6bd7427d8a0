"""Fair, cost-aware task allocation solved exactly as a mixed-integer program."""

__version__ = "0.1.0"

from .adaptive import AdaptiveConfig, AdaptiveTrace, FileObservations, SimulatedWorkforce, filter_employees, run_adaptive, update_efficiency
from .bench import BenchRow, generate_synthetic, run_benchmark
from .bnb import MilpResult, SolveConfig, optimality_gap, solve_milp
from .cost import Hyperparams, assignment_cost, cost_matrix, skill_mismatch
from .domain import (
    Assignment,
    DatasetError,
    Employee,
    ProblemInstance,
    Task,
    load_instance,
    target_workload,
    variable_count,
)
from .metrics import deviation_stats, gini, greedy_assignment, jain, random_assignment, score, variance, workload_vector
from .milp import MilpModel, build_balance_model, build_cost_model, extract_assignment
from .oracle import brute_force
from .tuning import TuningResult, sensitivity_report, tune_hyperparams

__all__ = [
    "AdaptiveConfig",
    "AdaptiveTrace",
    "Assignment",
    "BenchRow",
    "DatasetError",
    "Employee",
    "FileObservations",
    "Hyperparams",
    "MilpModel",
    "MilpResult",
    "ProblemInstance",
    "SimulatedWorkforce",
    "SolveConfig",
    "Task",
    "TuningResult",
    "assignment_cost",
    "brute_force",
    "build_balance_model",
    "build_cost_model",
    "cost_matrix",
    "deviation_stats",
    "extract_assignment",
    "filter_employees",
    "generate_synthetic",
    "gini",
    "greedy_assignment",
    "jain",
    "load_instance",
    "optimality_gap",
    "random_assignment",
    "run_adaptive",
    "run_benchmark",
    "score",
    "sensitivity_report",
    "skill_mismatch",
    "solve_milp",
    "target_workload",
    "tune_hyperparams",
    "update_efficiency",
    "variable_count",
    "variance",
    "workload_vector",
]
