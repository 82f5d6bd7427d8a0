import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_instance
from hrap.adaptive import (
    AdaptiveConfig,
    FileObservations,
    MissingObservation,
    SimulatedWorkforce,
    filter_employees,
    run_adaptive,
    update_efficiency,
)
from hrap.bench import generate_synthetic
from hrap.bnb import SolveConfig
from hrap.cost import Hyperparams
from hrap.domain import Employee

FAST = SolveConfig(time_limit=5, node_limit=200)


def three_employees():
    return make_instance(
        [("e1", {"a": 0.9}, 3), ("e2", {"a": 0.8}, 3), ("e3", {"a": 0.7}, 3)],
        [(f"t{j}", "a", 4.0, 1) for j in range(6)],
    )


def test_update_efficiency_examples():
    assert update_efficiency(4, 8) == 0.5
    assert update_efficiency(4, 2) == 1.0
    assert update_efficiency(4, 4) == 1.0
    for bad in [(0, 1), (1, 0), (-1, 2), (2, -1)]:
        with pytest.raises(ValueError):
            update_efficiency(*bad)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(1.0, 10.0))
def test_update_efficiency_properties(d, actual, c):
    e = update_efficiency(d, actual)
    assert 0 < e <= 1
    assert update_efficiency(d * c, actual) >= e
    assert update_efficiency(d, actual * c) <= e


def test_filter_examples():
    e1, e2 = Employee("e1", {"a": 0.5}, 1), Employee("e2", {"a": 0.5}, 1)
    effs = {("e1", "a"): 0.05, ("e2", "a"): 0.9}
    kept = filter_employees([e1, e2], effs, 0.1, 1)
    assert [e.id for e in kept.employees] == ["e2"] and not kept.guard_triggered
    same = filter_employees([e1, e2], {("e1", "a"): 0.5, ("e2", "a"): 0.9}, 0.1, 1)
    assert [e.id for e in same.employees] == ["e1", "e2"] and not same.guard_triggered
    guard = filter_employees([e1], {("e1", "a"): 0.05}, 0.1, 1)
    assert [e.id for e in guard.employees] == ["e1"] and guard.guard_triggered


def test_filter_rules():
    mixed = Employee("m", {"a": 0.05, "b": 0.9}, 1)
    effs = {}
    assert filter_employees([mixed], effs, 0.1, 0, "max").employees == [mixed]
    assert filter_employees([mixed], effs, 0.1, 0, "any").employees == []
    assert filter_employees([mixed], effs, 0.4, 0, "mean").employees == [mixed]
    assert filter_employees([mixed], effs, 0.5, 0, "mean").employees == []
    assert filter_employees([mixed], effs, 0.5, 0, "any").employees == []


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptiveConfig(threshold=1.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(max_iterations=0)
    with pytest.raises(ValueError):
        AdaptiveConfig(filter_rule="median")


def test_noiseless_estimates_pin_true_efficiency():
    inst = generate_synthetic(6, 18, 3, 5)
    truth = {(e.id, s): min(1.0, 0.15 + 0.1 * k) for k, e in enumerate(inst.employees) for s in e.efficiency}
    source = SimulatedWorkforce.from_instance(inst, truth, noise_sigma=0.0, seed=1)
    trace = run_adaptive(inst, source, AdaptiveConfig(max_iterations=3, threshold=0.0, solve=FAST))
    seen = set()
    for rec in trace.records:
        seen |= {(o.employee_id, o.skill) for o in rec.observations}
        for key in seen:
            if key in rec.efficiencies:
                assert rec.efficiencies[key] == pytest.approx(min(1.0, truth[key]), abs=1e-12)


def test_single_iteration():
    inst = three_employees()
    trace = run_adaptive(inst, SimulatedWorkforce.from_instance(inst), AdaptiveConfig(max_iterations=1, solve=FAST))
    assert len(trace) == 1
    assert len(trace.records[0].observations) == 6


def test_weak_employee_dropped_next_iteration():
    inst = three_employees()
    source = SimulatedWorkforce.from_instance(inst, {("e3", "a"): 0.05})
    cfg = AdaptiveConfig(max_iterations=2, reset_efficiency=True, solve=FAST)
    trace = run_adaptive(inst, source, cfg)
    first, second = trace.records
    assert "e3" in first.assignment.pairs.values()
    assert first.survivors == ["e1", "e2"]
    assert "e3" not in second.assignment.pairs.values()
    assert len(second.assignment.pairs) == 6


def test_guard_keeps_everyone_and_continues():
    inst = make_instance([("e1", {"a": 0.5}, 2)], [("t1", "a", 2.0, 1), ("t2", "a", 3.0, 1)])
    source = SimulatedWorkforce.from_instance(inst, {("e1", "a"): 0.05})
    trace = run_adaptive(inst, source, AdaptiveConfig(max_iterations=3, solve=FAST))
    assert len(trace) == 3
    assert all(r.guard_triggered and r.survivors == ["e1"] for r in trace.records)


def test_employee_sets_nonincreasing():
    inst = generate_synthetic(8, 20, 3, 2)
    source = SimulatedWorkforce.from_instance(inst, noise_sigma=0.5, seed=3)
    trace = run_adaptive(inst, source, AdaptiveConfig(max_iterations=4, threshold=0.3, min_employees=2, solve=FAST))
    sizes = [len(r.survivors) for r in trace.records]
    assert sizes == sorted(sizes, reverse=True)
    assert min(sizes) >= 2


def _strip(rec):
    payload = json.loads(rec.to_json())
    payload["solver"].pop("wall_time")
    return payload


def test_trace_deterministic():
    inst = generate_synthetic(5, 12, 2, 4)
    cfg = AdaptiveConfig(max_iterations=3, solve=FAST)
    runs = [run_adaptive(inst, SimulatedWorkforce.from_instance(inst, noise_sigma=0.3, seed=9), cfg) for _ in range(2)]
    assert [_strip(r) for r in runs[0].records] == [_strip(r) for r in runs[1].records]


def test_smoothing():
    inst = make_instance([("e1", {"a": 1.0}, 2)], [("t1", "a", 4.0, 1)])
    source = SimulatedWorkforce.from_instance(inst, {("e1", "a"): 0.5})
    trace = run_adaptive(inst, source, AdaptiveConfig(max_iterations=2, smoothing=0.5, solve=FAST))
    assert trace.records[0].efficiencies[("e1", "a")] == 0.75
    assert trace.records[1].efficiencies[("e1", "a")] == 0.625


def test_cost_mode_runs():
    inst = generate_synthetic(5, 10, 2, 1)
    cfg = AdaptiveConfig(max_iterations=2, mode="cost", hyperparams=Hyperparams(0.3, 0.5, 0.2, 0.3), solve=FAST)
    trace = run_adaptive(inst, SimulatedWorkforce.from_instance(inst, seed=2), cfg)
    assert len(trace) == 2


def test_file_observations(tmp_path):
    inst = make_instance([("e1", {"a": 1.0}, 2)], [("t1", "a", 4.0, 1), ("t2", "a", 2.0, 1)])
    path = tmp_path / "obs.csv"
    path.write_text("iteration,employee_id,task_id,actual_time_hours\n0,e1,t1,8\n0,e1,t2,4\n1,e1,t1,5\n")
    with pytest.raises(MissingObservation, match="iteration 1, employee e1, task t2"):
        run_adaptive(inst, FileObservations(path), AdaptiveConfig(max_iterations=2, solve=FAST))
    trace = run_adaptive(inst, FileObservations(path), AdaptiveConfig(max_iterations=1, solve=FAST))
    assert trace.final_efficiencies == {("e1", "a"): 0.5}


def test_file_observations_validation(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("iter,emp,task,hours\n")
    with pytest.raises(ValueError, match="header"):
        FileObservations(bad)
    bad.write_text("iteration,employee_id,task_id,actual_time_hours\n0,e1,t1,-2\n")
    with pytest.raises(ValueError, match="positive"):
        FileObservations(bad)


def test_trace_outputs(tmp_path):
    inst = three_employees()
    trace = run_adaptive(inst, SimulatedWorkforce.from_instance(inst), AdaptiveConfig(max_iterations=2, solve=FAST))
    trace.write_jsonl(tmp_path / "trace.jsonl")
    lines = (tmp_path / "trace.jsonl").read_text().splitlines()
    assert [json.loads(ln)["iteration"] for ln in lines] == [0, 1]
    trace.write_efficiencies(tmp_path / "eff.csv")
    rows = (tmp_path / "eff.csv").read_text().splitlines()
    assert rows[0] == "employee_id,skill,efficiency" and len(rows) == 4
