import math

import numpy as np
import pytest
import scipy.sparse as sp

from conftest import make_instance, tiny_instance
from hrap.bench import generate_synthetic
from hrap.bnb import SolveConfig, gap_is_absolute, optimality_gap, solve_milp
from hrap.cost import Hyperparams, cost_matrix
from hrap.external import solve_highs
from hrap.metrics import greedy_assignment
from hrap.milp import EQ, GE, LE, AssignVar, MilpModel, build_balance_model, build_cost_model
from hrap.oracle import ENUMERATION_LIMIT, OracleTooLarge, brute_force, enumeration_size
from hrap.simplex import solve_lp

EXACT = SolveConfig(gap_tolerance=0.0)


def test_gap_formula():
    assert optimality_gap(102, 100) == 2.0
    assert optimality_gap(7.5, 7.5) == 0.0
    assert optimality_gap(3.0, 0.0) == 300.0 and gap_is_absolute(0.0)
    assert not gap_is_absolute(1.0)


def test_trivial_instance():
    inst = make_instance([("e1", {"java": 1.0}, 1)], [("t1", "java", 10.0, 1)])
    res = solve_milp(build_balance_model(inst), EXACT)
    assert res.status == "optimal" and res.objective == 0.0
    assert res.assignment.pairs == {"t1": "e1"}


def test_symmetric_pair(two_by_two):
    res = solve_milp(build_balance_model(two_by_two), EXACT)
    assert res.objective == 0.0 and sorted(res.assignment.pairs.values()) == ["e1", "e2"]


def _model(A, senses, rhs, n_int):
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    return MilpModel(
        columns=tuple(AssignVar(f"e{j}", "t") for j in range(n)),
        objective=np.ones(n),
        A=sp.csr_matrix(A),
        senses=tuple(senses),
        rhs=np.asarray(rhs, dtype=float),
        lower=np.zeros(n),
        upper=np.ones(n),
        integrality=np.arange(n) < n_int,
    )


def test_lp_infeasible_model():
    res = solve_milp(_model([[1.0], [1.0]], [LE, GE], [0.0, 1.0], 1))
    assert res.status == "infeasible" and res.assignment.pairs == {}


def test_integer_infeasible_model():
    # x0 + x1 = 1 with x0 = x1 has only the fractional point (1/2, 1/2)
    res = solve_milp(_model([[1.0, 1.0], [1.0, -1.0]], [EQ, EQ], [1.0, 0.0], 2), EXACT)
    assert res.status == "infeasible"


@pytest.mark.parametrize("seed", range(40))
def test_balance_matches_oracle(seed):
    inst = tiny_instance(seed)
    res = solve_milp(build_balance_model(inst), EXACT)
    ref = brute_force(inst)
    assert res.objective == pytest.approx(ref.objective, abs=1e-9)
    res.assignment.check(inst)
    assert res.root_bound <= res.best_bound + 1e-9 <= res.objective + 2e-9


@pytest.mark.parametrize("seed", range(15))
def test_cost_model_matches_oracle(seed):
    inst = tiny_instance(1000 + seed, max_tasks=7)
    rng = np.random.default_rng(seed)
    w = rng.dirichlet([1, 1, 1])
    hp = Hyperparams(float(rng.uniform()), *map(float, w))
    for foc in (False, True):
        m = build_cost_model(inst, hp, cost_matrix(inst, hp), fairness_on_cost=foc)
        ref = brute_force(inst, "cost", hp, fairness_on_cost=foc)
        assert solve_milp(m, EXACT).objective == pytest.approx(ref.objective, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_minmax_matches_oracle(seed):
    inst = tiny_instance(2000 + seed, max_tasks=7)
    res = solve_milp(build_balance_model(inst, minmax=True), EXACT)
    assert res.objective == pytest.approx(brute_force(inst, minmax=True).objective, abs=1e-9)


def test_deterministic():
    m = build_balance_model(generate_synthetic(6, 12, 3, 1))
    cfg = SolveConfig(gap_tolerance=0.0, node_limit=300)
    a, b = solve_milp(m, cfg), solve_milp(m, cfg)
    assert (a.objective, a.nodes, a.best_bound, a.assignment) == (b.objective, b.nodes, b.best_bound, b.assignment)


def test_node_limit_reports_feasible():
    m = build_balance_model(generate_synthetic(8, 24, 3, 0))
    res = solve_milp(m, SolveConfig(gap_tolerance=0.0, node_limit=3))
    assert res.status in ("feasible", "optimal")
    assert res.nodes <= 5
    assert res.best_bound <= res.objective + 1e-9
    res.assignment.check(generate_synthetic(8, 24, 3, 0))


def test_time_limit_reports_status():
    inst = generate_synthetic(15, 60, 4, 0)
    res = solve_milp(build_balance_model(inst), SolveConfig(gap_tolerance=0.0, time_limit=1.0))
    assert res.status in ("time_limit", "optimal")
    assert res.wall_time < 10
    if res.status == "time_limit":
        assert res.gap_percent > 0
    res.assignment.check(inst)


def test_optimal_status_respects_tolerance():
    inst = generate_synthetic(6, 14, 3, 1)
    res = solve_milp(build_balance_model(inst), SolveConfig(gap_tolerance=0.05, time_limit=30))
    if res.status == "optimal":
        assert res.gap_percent <= 5.0 + 1e-9


def test_start_hint_never_hurts():
    inst = generate_synthetic(6, 14, 3, 2)
    m = build_balance_model(inst)
    cfg = SolveConfig(node_limit=1, heuristic_kicks=0)
    greedy = m.objective_value(m.complete(m.assignment_vector(greedy_assignment(inst))))
    assert solve_milp(m, cfg, start=greedy_assignment(inst)).objective <= greedy + 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_bounds_bracket_highs(seed):
    inst = generate_synthetic(6, 14, 3, seed)
    m = build_balance_model(inst)
    ref = solve_highs(m, EXACT)
    assert ref.status == "optimal"
    res = solve_milp(m, SolveConfig(gap_tolerance=0.0, time_limit=8))
    assert res.best_bound <= ref.objective + 1e-7
    assert res.objective >= ref.objective - 1e-7
    assert solve_lp(m).objective <= ref.objective + 1e-7


def test_oracle_guard():
    emps = [(f"e{i}", {"a": 1.0}, 1) for i in range(10)]
    inst = make_instance(emps, [(f"t{j}", "a", 1.0, 1) for j in range(8)])
    assert enumeration_size(inst) == 10**8 > ENUMERATION_LIMIT
    with pytest.raises(OracleTooLarge, match="solve_milp"):
        brute_force(inst)


def test_oracle_tie_break_prefers_earliest_choice():
    inst = make_instance(
        [("e1", {"a": 1.0}, 1), ("e2", {"a": 1.0}, 1)],
        [("t1", "a", 5.0, 1), ("t2", "a", 5.0, 1)],
    )
    res = brute_force(inst)
    assert res.assignment.pairs == {"t1": "e1", "t2": "e2"}
    assert res.nodes == 4


def test_oracle_single_employee():
    inst = make_instance([("e1", {"a": 0.5}, 1)], [("t1", "a", 3.0, 1), ("t2", "a", 5.0, 1)])
    res = brute_force(inst)
    # loads 16 against target 8
    assert res.objective == 8.0 and res.assignment.pairs == {"t1": "e1", "t2": "e1"}


def test_oracle_eight_cases():
    inst = make_instance(
        [("e1", {"a": 1.0}, 1), ("e2", {"a": 0.5}, 1)],
        [("t1", "a", 2.0, 1), ("t2", "a", 3.0, 1), ("t3", "a", 4.0, 1)],
    )
    res = brute_force(inst)
    assert res.nodes == 8
    # target 4.5; by hand the best of the 8 splits is e1 {t1,t3} = 6, e2 {t2} = 6 -> 1.5 + 0
    assert res.objective == pytest.approx(1.5, abs=1e-12)
    assert res.assignment.pairs == {"t1": "e1", "t2": "e2", "t3": "e1"}
    assert solve_milp(build_balance_model(inst), EXACT).objective == pytest.approx(1.5, abs=1e-9)


def test_unassigned_tasks_pass_through():
    inst = make_instance([("e1", {"a": 1.0}, 1)], [("t1", "a", 1.0, 1), ("t2", "z", 4.0, 1)])
    res = solve_milp(build_balance_model(inst))
    assert res.assignment.unassigned == ("t2",)
    assert brute_force(inst).assignment.unassigned == ("t2",)


def test_empty_task_set():
    inst = make_instance([("e1", {"a": 1.0}, 1)], [])
    res = solve_milp(build_balance_model(inst), EXACT)
    assert res.status == "optimal" and res.objective == 0.0 and math.isfinite(res.best_bound)
