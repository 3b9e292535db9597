"""Benchmark sweeps: generated instance grids, per-run rows and per-set aggregates."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .dataset import generate_prefix
from .objectives import Kind, ObjectiveSpec
from .solver import gap_sol, solve

CSV_FIELDS = ["instance", "m", "n", "seed", "method", "objective_kind", "obj", "gap_ip", "gap_sol",
              "nodes", "time_s", "bigm_method", "bigm_time_s"]
EXHAUSTIVE_MAX_M = 12


def _thin_grid(ms, ns, reps):
    return [(m, n, reps) for m in ms for n in ns if m + 10 <= n]


@dataclass
class BenchPlan:
    grid: list  # (m, n, replicates)
    kinds: list = field(default_factory=lambda: ["MAE", "MSE"])
    methods: list = field(default_factory=lambda: ["mip", "stepwise", "exhaustive"])
    time_limit: float = 60.0
    seed: int = 0
    theta: str | float = "auto"
    big_m: str | None = None
    label: str = "bench"

    def __post_init__(self):
        for m, n, reps in self.grid:
            if m < 1 or n < 3 or reps < 1:
                raise ValueError(f"bad grid entry {(m, n, reps)}")

    @classmethod
    def desk_thin(cls, **kw) -> "BenchPlan":
        return cls(_thin_grid((8, 10, 12), (20, 30, 40), 5), label="thin", **kw)

    @classmethod
    def desk_fat(cls, **kw) -> "BenchPlan":
        kw.setdefault("kinds", ["MAE_a", "MSE_a"])
        kw.setdefault("methods", ["stepwise", "core-heur", "core-rand", "mip"])
        return cls([(m, n, 5) for m in (40, 60) for n in (15, 20)], label="fat", **kw)

    @classmethod
    def full_thin(cls, **kw) -> "BenchPlan":
        kw.setdefault("time_limit", 3600.0)
        return cls(_thin_grid((20, 30, 40, 50), range(30, 101, 10), 10), label="thin-full", **kw)

    @classmethod
    def full_fat(cls, **kw) -> "BenchPlan":
        kw.setdefault("kinds", ["MAE_a", "MSE_a"])
        kw.setdefault("methods", ["stepwise", "core-heur", "core-rand", "mip"])
        kw.setdefault("time_limit", 3600.0)
        return cls([(m, n, 10) for m in (100, 150, 200, 250) for n in (30, 40, 50, 60)],
                   label="fat-full", **kw)

    def instances(self):
        """Yield (instance id, m, n, seed) for every replicate."""
        for m, n, reps in self.grid:
            for r in range(reps):
                seed = self.seed + 1000 * m + 10 * n + r
                yield f"m{m}_n{n}_r{r}", m, n, seed


@dataclass
class BenchRow:
    instance: str
    m: int
    n: int
    seed: int
    method: str
    objective_kind: str
    obj: float
    gap_ip: float | None
    gap_sol: float | None
    nodes: int
    time_s: float
    bigm_method: str | None
    bigm_time_s: float | None
    error: str | None = None

    def csv_row(self) -> dict:
        d = asdict(self)
        return {k: ("" if d[k] is None else d[k]) for k in CSV_FIELDS}


def _num(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x


def run_instance(inst_id, inst, seed, kind: str, plan: BenchPlan) -> list[BenchRow]:
    spec = ObjectiveSpec(Kind.parse(kind))
    rows = []
    t = time.perf_counter()
    step = solve(inst, spec, "stepwise")
    step_time = time.perf_counter() - t
    obj_step = step.objective

    def row(method, **kw):
        base = dict(instance=inst_id, m=inst.m, n=inst.n, seed=seed, method=method,
                    objective_kind=spec.kind.value, obj=math.nan, gap_ip=None, gap_sol=None,
                    nodes=0, time_s=0.0, bigm_method=None, bigm_time_s=None)
        base.update(kw)
        return BenchRow(**base)

    for method in plan.methods:
        if method == "stepwise":
            rows.append(row("stepwise", obj=obj_step, gap_sol=0.0, time_s=step_time))
            continue
        if method == "exhaustive" and inst.m > EXHAUSTIVE_MAX_M:
            continue
        try:
            rep = solve(inst, spec, method, big_m=plan.big_m, time_limit=plan.time_limit,
                        theta=plan.theta, seed=seed, warm_start=step.incumbent)
        except Exception as exc:  # recorded, the sweep goes on
            rows.append(row(method, error=f"{type(exc).__name__}: {exc}"))
            continue
        bm = rep.big_m or {}
        rows.append(row(method, obj=rep.objective, gap_ip=_num(rep.gap_ip),
                        gap_sol=gap_sol(obj_step, rep.objective), nodes=rep.nodes,
                        time_s=rep.wall_time, bigm_method=bm.get("method"),
                        bigm_time_s=bm.get("compute_time_s")))
    return rows


def aggregate(rows: list[BenchRow]) -> list[dict]:
    """Mean gap_ip, gap_sol and time per (m, n, kind, method)."""
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        if r.error is None:
            groups.setdefault((r.m, r.n, r.objective_kind, r.method), []).append(r)
    out = []
    for (m, n, kind, method), rs in sorted(groups.items()):
        gi = [r.gap_ip for r in rs if r.gap_ip is not None]
        out.append({
            "m": m, "n": n, "objective_kind": kind, "method": method, "count": len(rs),
            "mean_gap_ip": sum(gi) / len(gi) if gi else None,
            "mean_gap_sol": sum(r.gap_sol for r in rs) / len(rs),
            "mean_time_s": sum(r.time_s for r in rs) / len(rs),
        })
    return out


def write_reports(rows: list[BenchRow], plan: BenchPlan, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "bench.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r.csv_row())
    aggs = aggregate(rows)
    with (out / "aggregates.csv").open("w", newline="") as fh:
        if aggs:
            w = csv.DictWriter(fh, fieldnames=list(aggs[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(aggs)
    doc = {"plan": asdict(plan), "rows": [asdict(r) for r in rows], "aggregates": aggs}
    (out / "bench.json").write_text(json.dumps(doc, indent=2, default=str) + "\n")
    return doc


def run_bench(plan: BenchPlan, out_dir, progress=None) -> list[BenchRow]:
    """Run every method of ``plan`` on every generated instance and write reports."""
    rows: list[BenchRow] = []
    for inst_id, m, n, seed in plan.instances():
        inst = generate_prefix(m, n, seed)
        for kind in plan.kinds:
            new = run_instance(inst_id, inst, seed, kind, plan)
            rows.extend(new)
            if progress is not None:
                for r in new:
                    progress(r)
    write_reports(rows, plan, out_dir)
    return rows
