import csv
import json

import pytest

from regsubset.bench import CSV_FIELDS, BenchPlan, aggregate, run_bench
from regsubset.solver import gap_sol


def test_gap_sol():
    assert gap_sol(2.0, 1.5) == pytest.approx(0.25)
    assert gap_sol(0.0, 0.0) == 0.0
    assert gap_sol(1.0, 1.0) == 0.0


def test_seeds_are_distinct_and_stable():
    plan = BenchPlan.desk_thin()
    ids = list(plan.instances())
    assert len({s for _, _, _, s in ids}) == len(ids)
    assert ids == list(BenchPlan.desk_thin().instances())
    assert all(m + 10 <= n for _, m, n, _ in ids)


def test_bad_grid():
    with pytest.raises(ValueError):
        BenchPlan([(5, 2, 1)])


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    plan = BenchPlan([(6, 16, 2)], methods=["stepwise", "mip", "exhaustive"], time_limit=30)
    return out, run_bench(plan, out)


def test_rows_and_files(small_run):
    out, rows = small_run
    assert len(rows) == 2 * 2 * 3
    with (out / "bench.csv").open() as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == CSV_FIELDS
        assert len(list(reader)) == len(rows)
    doc = json.loads((out / "bench.json").read_text())
    assert len(doc["rows"]) == len(rows)
    assert (out / "aggregates.csv").exists()


def test_mip_matches_exhaustive_and_dominates_stepwise(small_run):
    _, rows = small_run
    by = {(r.instance, r.objective_kind, r.method): r for r in rows}
    for (inst, kind, method), r in by.items():
        if method == "mip":
            assert r.gap_sol >= -1e-9
            assert r.obj == pytest.approx(by[inst, kind, "exhaustive"].obj, abs=1e-6)


def test_aggregates_recompute(small_run):
    _, rows = small_run
    aggs = aggregate(rows)
    for a in aggs:
        rs = [r for r in rows if (r.m, r.n, r.objective_kind, r.method)
              == (a["m"], a["n"], a["objective_kind"], a["method"])]
        assert a["count"] == len(rs)
        assert a["mean_gap_sol"] == pytest.approx(sum(r.gap_sol for r in rs) / len(rs))


def test_errors_are_recorded(tmp_path):
    plan = BenchPlan([(6, 16, 1)], kinds=["MAE"], methods=["stepwise", "mip"], big_m="size")
    rows = run_bench(plan, tmp_path)
    mip = [r for r in rows if r.method == "mip"][0]
    assert mip.error and "BigMError" in mip.error
