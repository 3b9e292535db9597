"""One entry point for every method, used by the CLI and the benchmark."""

from __future__ import annotations

import math
import time

import numpy as np

from .bigm import (BigMResult, Method, check_size_usable, estimate_m, m_for_v, m_for_x_heuristic,
                   m_for_x_lp, m_for_x_size)
from .bnb import SolveReport, exhaustive, gap_ip, solve_mip
from .dataset import Instance, compute_stats
from .heuristics import core_heuristic, core_random, stepwise, theta_auto
from .models import MipModel, build
from .objectives import EvalCache, ObjectiveSpec, SubsetSolution

METHODS = ("mip", "stepwise", "core-heur", "core-rand", "exhaustive")
BIG_M_CHOICES = ("lp", "size", "heuristic", "statistical")


def default_big_m(inst: Instance) -> str:
    return "heuristic" if inst.is_fat else "lp"


def compute_big_m(inst: Instance, spec: ObjectiveSpec, choice: str,
                  warm: SubsetSolution | None = None, seed: int = 0) -> BigMResult:
    """Big-M values for the full model.

    The v-bound follows the criterion: the full-model value for MAE/MSE on
    thin data, and the incumbent plus the per-variable penalty otherwise.
    """
    t0 = time.perf_counter()
    stats = compute_stats(inst)
    kind = spec.kind
    if kind.adjusted or inst.is_fat:
        u_heur = warm.objective if warm is not None else None
        mv = m_for_v(stats, "fat", u_heur=u_heur, n=inst.n, kind=kind, lam=spec.lam)
    else:
        mv = m_for_v(stats, "thin", kind=kind)
    if choice == "lp":
        if inst.is_fat:
            # Proven bounds only exist per thin column subset, so node bounds
            # are computed per core; the model itself gets placeholder values.
            mx = m_for_x_heuristic(warm, mv).m_x if warm is not None else np.ones(1)
            res = BigMResult(mx, mv, Method.LP_PER_CORE, extra={"placeholder_m_x": True})
        else:
            res = m_for_x_lp(inst, kind=kind, stats=stats)
    elif choice == "size":
        res = m_for_x_size(inst, stats=stats, kind=kind)
        check_size_usable(res)
    elif choice == "heuristic":
        if warm is None:
            raise ValueError("the heuristic big-M needs a warm-start solution")
        res = m_for_x_heuristic(warm, mv)
    elif choice == "statistical":
        res = estimate_m(inst, seed=seed)
    else:
        raise ValueError(f"unknown big-M choice {choice!r}")
    res.m_v = mv
    res.m_x = np.broadcast_to(res.m_x, (inst.m,)).copy() if res.m_x.size == 1 else res.m_x
    res.compute_time = time.perf_counter() - t0
    return res


def build_model(inst: Instance, spec: ObjectiveSpec, bigm: BigMResult) -> MipModel:
    cap = inst.n - 2 if inst.is_fat else None
    return build(inst, spec, bigm.m_x, bigm.m_v, cap=cap)


def heuristic_report(sol: SubsetSolution, method: str, wall: float, time_limit_hit=False,
                     nodes: int = 0) -> SolveReport:
    return SolveReport(sol, math.nan, math.nan, nodes, {"incumbent": 0, "lower_bound": 0, "fixing": 0},
                       wall, time_limit_hit, "heuristic", method=method)


def solve(inst: Instance, spec: ObjectiveSpec, method: str = "mip", big_m: str | None = None,
          time_limit: float = 60.0, theta="auto", seed: int = 0, use_cuts: bool = False,
          trace=None, warm_start: SubsetSolution | None = None,
          core_size: int | None = None) -> SolveReport:
    """Run ``method`` on ``inst`` and return a report.

    ``mip`` is warm-started from stepwise. On instances with more than n-2
    columns, ``big_m="lp"`` selects per-core bounding: node bounds come from
    thin submodels whose coefficient bounds are LP-based.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if not time_limit > 0:
        raise ValueError("time limit must be positive")
    t0 = time.perf_counter()
    cache = EvalCache(inst, spec)
    cap = inst.n - 2
    if method == "exhaustive":
        sol = exhaustive(inst, spec, cache=cache)
        wall = time.perf_counter() - t0
        rep = SolveReport(sol, sol.objective, 0.0, sol.extra.get("subsets_evaluated", 0),
                          {"incumbent": 0, "lower_bound": 0, "fixing": 0}, wall, False,
                          "optimal", method="exhaustive")
        return rep
    if method == "stepwise":
        sol = stepwise(inst, spec, min(cap, inst.m), cache)
        return heuristic_report(sol, "stepwise", time.perf_counter() - t0)
    if method in ("core-heur", "core-rand"):
        th = theta_auto(method, inst.m, inst.n, time_limit) if theta in (None, "auto") else float(theta)
        if method == "core-heur":
            sol = core_heuristic(inst, spec, th, mip_budget=time_limit, trace=trace,
                                 core_size=core_size, cache=cache)
        else:
            sol = core_random(inst, spec, th, time_limit=time_limit, seed=seed, trace=trace,
                              cache=cache)
        wall = time.perf_counter() - t0
        rep = heuristic_report(sol, method, wall, time_limit_hit=wall >= time_limit)
        rep.extra["theta"] = th
        return rep

    warm = warm_start or stepwise(inst, spec, min(cap, inst.m), cache)
    choice = big_m or default_big_m(inst)
    bigm = compute_big_m(inst, spec, choice, warm, seed)
    per_core = inst.is_fat and choice == "lp" and spec.kind.absolute
    model = build_model(inst, spec, bigm)
    left = max(time_limit - (time.perf_counter() - t0), 1e-3)
    rep = solve_mip(model, warm, left, use_cuts=use_cuts and not inst.is_fat,
                    per_core=per_core, cache=cache)
    rep.big_m = bigm.to_dict()
    rep.extra["warm_objective"] = warm.objective
    rep.extra["model"] = model
    rep.wall_time = time.perf_counter() - t0
    return rep


def gap_sol(obj_step: float, obj_method: float) -> float:
    """Relative improvement over stepwise; 0 when stepwise already scores 0."""
    if obj_step > 0:
        return (obj_step - obj_method) / obj_step
    return 0.0


__all__ = ["solve", "compute_big_m", "build_model", "gap_sol", "gap_ip", "METHODS", "BIG_M_CHOICES"]
