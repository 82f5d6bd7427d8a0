import csv

import pytest

from hrap.bench import BENCH_HEADER, generate_synthetic, parse_sizes, run_benchmark, summarize, write_bench_csv
from hrap.bnb import SolveConfig
from hrap.domain import variable_count


def test_generator_deterministic():
    assert generate_synthetic(20, 80, 6, 42) == generate_synthetic(20, 80, 6, 42)
    assert generate_synthetic(20, 80, 6, 42) != generate_synthetic(20, 80, 6, 43)


@pytest.mark.parametrize("seed", range(5))
def test_generator_ranges(seed):
    inst = generate_synthetic(30, 100, 6, seed)
    assert len(inst.employees) == 30 and len(inst.tasks) == 100
    for e in inst.employees:
        assert 1 <= len(e.skills) <= 3
        assert all(0.1 <= v <= 1.0 for v in e.efficiency.values())
        assert 1 <= e.performance <= 5
    for t in inst.tasks:
        assert 1 <= t.duration <= 40 and t.complexity in (1, 2, 3)


def test_generator_rejects_zero_counts():
    with pytest.raises(ValueError):
        generate_synthetic(0, 5, 2, 0)


def test_parse_sizes():
    assert parse_sizes("20x80, 50x150") == [(20, 80), (50, 150)]
    with pytest.raises(ValueError):
        parse_sizes("20by80")
    with pytest.raises(ValueError):
        parse_sizes("")


def test_run_benchmark_rows(tmp_path):
    cfg = SolveConfig(gap_tolerance=0.01, time_limit=3)
    rows = run_benchmark([(6, 12), (4, 8)], range(3), cfg, n_skills=3)
    assert [(r.n_employees, r.seed) for r in rows] == [(4, 0), (4, 1), (4, 2), (6, 0), (6, 1), (6, 2)]
    for r in rows:
        assert r.variable_count == variable_count(generate_synthetic(r.n_employees, r.n_tasks, 3, r.seed))
        assert r.status == "time_limit" or r.gap_percent <= 1.0 + 1e-9
    write_bench_csv(rows, tmp_path / "b.csv")
    data = list(csv.reader(open(tmp_path / "b.csv")))
    assert data[0] == BENCH_HEADER and len(data) == 7
    summary = summarize(rows)
    assert [(s["n_employees"], s["runs"]) for s in summary] == [(4, 3), (6, 3)]


def test_failures_become_rows(monkeypatch):
    import hrap.bench as bench

    def broken(*a, **k):
        raise RuntimeError("no")

    monkeypatch.setattr(bench, "solve_milp", broken)
    rows = run_benchmark([(3, 4)], [0], SolveConfig())
    assert rows[0].status == "error: RuntimeError: no"


def test_empty_sizes():
    with pytest.raises(ValueError):
        run_benchmark([], [0])
