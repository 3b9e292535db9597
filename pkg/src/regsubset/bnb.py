"""Branch-and-bound over the selection variables, and the brute-force oracle.

Linear (MAE/MAE_a) models are bounded node by node with the LP relaxation
of the big-M model. Squared-error models use a combinatorial bound instead:
every completion of a node is a subset of ``F1 | free``, so its SSE is at
least the SSE of the least-squares fit on all of those columns.

Every incumbent comes from an exact refit of an explicit subset, never from
an LP value.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bigm import BigMError, m_for_v, m_for_x_lp
from .dataset import Instance, compute_stats
from .linalg import min_sse
from .lp import LpStatus
from .models import Z_TOL, CutSet, MipModel, ModelError, build, generate_cuts
from .objectives import (CardinalityError, EvalCache, ObjectiveSpec, SubsetSolution,
                         lad_fit, mae_0, mse_0)

GAP_TOL = 1e-6
MAX_EXHAUSTIVE_M = 22


class NumericFailure(RuntimeError):
    def __init__(self, node_id: int, msg: str):
        self.node_id = node_id
        super().__init__(f"node {node_id}: {msg}")


class InconsistentBigM(ModelError):
    """The root relaxation is infeasible, so the big-M values cut off everything."""


@dataclass
class Node:
    fixed_in: frozenset
    fixed_out: frozenset
    bound: float
    depth: int
    id: int
    core: frozenset | None = None

    def free(self, m: int) -> list[int]:
        return [j for j in range(m) if j not in self.fixed_in and j not in self.fixed_out]


@dataclass
class NodeResult:
    bound: float
    closed: bool = False
    branch: int | None = None
    candidates: tuple = ()
    core: frozenset | None = None


@dataclass
class SolveReport:
    incumbent: SubsetSolution
    best_bound: float
    gap_ip: float
    nodes: int
    cuts_applied: dict
    wall_time: float
    time_limit_hit: bool
    status: str
    history: list = field(default_factory=list)
    method: str = "mip"
    big_m: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.incumbent.objective

    def to_dict(self, var_names=None) -> dict:
        inc = self.incumbent.to_dict(var_names)
        return {
            "objective": inc["objective"],
            "subset": inc["subset"],
            "coefficients": inc["coefficients"],
            "intercept": inc["intercept"],
            "incumbent": inc,
            "bound": self.best_bound,
            "gap_ip": self.gap_ip,
            "nodes": self.nodes,
            "wall_time": self.wall_time,
            "time_limit_hit": self.time_limit_hit,
            "status": self.status,
            "cuts_applied": self.cuts_applied,
            "method": self.method,
            "big_m": self.big_m,
        }


def gap_ip(incumbent: float, bound: float) -> float:
    return max(incumbent - bound, 0.0) / max(abs(incumbent), 1e-10)


def _prune_tol(inc: float) -> float:
    return 1e-9 * max(1.0, abs(inc))


def _cap_of(inst: Instance, cap: int | None) -> int:
    hard = inst.n - 2
    return min(inst.m, hard if cap is None else min(cap, hard))


# --- combinatorial bounds ----------------------------------------------------

def _criterion_floor(error_floor, n1, free_count, cap, n, spec, base) -> float:
    """Smallest criterion value any completion can reach given an error floor."""
    hi = min(n1 + free_count, cap)
    if hi < n1:
        return math.inf
    best = math.inf
    for p in range(n1, hi + 1):
        num = error_floor + (spec.lam * p / (n - 2) * base if spec.kind.adjusted else 0.0)
        best = min(best, num / (n - 1 - p))
    return best


def mse_node_bound(inst: Instance, fixed_in, fixed_out, spec: ObjectiveSpec,
                   cap: int | None = None) -> float:
    """Lower bound on MSE/MSE_a over all completions of a node."""
    F1 = set(fixed_in)
    cols = [j for j in range(inst.m) if j not in set(fixed_out)]
    cap = _cap_of(inst, cap)
    if len(F1) > cap:
        return math.inf
    try:
        sse = min_sse(inst, cols)
    except np.linalg.LinAlgError:
        sse = 0.0
    return _criterion_floor(sse, len(F1), len(cols) - len(F1), cap, inst.n, spec,
                            mse_0(inst.b))


def lad_node_bound(inst: Instance, fixed_in, fixed_out, spec: ObjectiveSpec,
                   cap: int | None = None) -> float:
    """Same as :func:`mse_node_bound` but with the LAD error floor."""
    F1 = set(fixed_in)
    cols = [j for j in range(inst.m) if j not in set(fixed_out)]
    cap = _cap_of(inst, cap)
    if len(F1) > cap:
        return math.inf
    sae = 0.0 if len(cols) + 1 >= inst.n else lad_fit(inst, cols).sae
    return _criterion_floor(sae, len(F1), len(cols) - len(F1), cap, inst.n, spec,
                            mae_0(inst.b))


def _sse_floor(inst, cols) -> float:
    try:
        return min_sse(inst, cols)
    except np.linalg.LinAlgError:
        return 0.0


# --- node bounders -------------------------------------------------------------

class _Bounder:
    def __init__(self, inst: Instance, spec: ObjectiveSpec, cap: int, cache: EvalCache):
        self.inst, self.spec, self.cap, self.cache = inst, spec, cap, cache
        self.cut_counts = {"incumbent": 0, "lower_bound": 0, "fixing": 0}

    def evaluate(self, node: Node, inc: float) -> NodeResult:
        raise NotImplementedError


class LpBounder(_Bounder):
    """LP relaxation of the big-M model with the node's z fixings."""

    def __init__(self, model: MipModel, cap: int, cache: EvalCache):
        super().__init__(model.inst, model.spec, cap, cache)
        self.model = model
        self.cut_counts = model.cuts.counts()

    def evaluate(self, node: Node, inc: float) -> NodeResult:
        m = self.inst.m
        sol = self.model.solve_relaxation(node.fixed_in, node.fixed_out)
        if sol.status is LpStatus.INFEASIBLE:
            return NodeResult(math.inf, closed=True)
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericFailure(node.id, f"LP relaxation ended with {sol.status.value}: {sol.message}")
        bound = max(sol.objective, node.bound)
        z = sol.x[self.model.layout.z]
        free = node.free(m)
        frac = [j for j in free if Z_TOL < z[j] < 1 - Z_TOL]
        if frac:
            j = max(frac, key=lambda k: (0.5 - abs(z[k] - 0.5), -k))
            cand = (tuple(sorted(node.fixed_in)),)
            return NodeResult(bound, branch=j, candidates=cand)
        S = tuple(j for j in range(m) if z[j] > 0.5)
        res = NodeResult(bound, candidates=(S,))
        if len(S) <= self.cap and S:
            exact = self.cache(S)
            if exact <= sol.objective + 1e-7 * max(1.0, abs(exact)):
                res.closed = True
                return res
        if not free:
            res.closed = True
            return res
        # integral but not provably solved here (typically the empty model):
        # split on the first free variable
        res.branch = min(free, key=lambda k: (-z[k], k))
        return res


class CombinatorialBounder(_Bounder):
    """Bounds from the error floor of the fit on ``F1 | free``."""

    def __init__(self, inst, spec, cap, cache, cuts: CutSet | None = None):
        super().__init__(inst, spec, cap, cache)
        self.cuts = cuts
        self._floors: dict[frozenset, float] = {}
        if cuts is not None and cuts.beta0 is not None:
            self.cut_counts = {"incumbent": 0, "lower_bound": 0, "fixing": len(cuts.beta0)}

    def _floor(self, cols) -> float:
        key = frozenset(cols)
        val = self._floors.get(key)
        if val is None:
            if self.spec.kind.absolute:
                val = 0.0 if len(cols) + 1 >= self.inst.n else lad_fit(self.inst, cols).sae
            else:
                val = _sse_floor(self.inst, cols)
            self._floors[key] = val
        return val

    def _cut_bound(self, node: Node) -> float:
        # u >= (b1 - b0) z_j + b0 evaluated at the node's fixings
        c = self.cuts
        if c is None or c.beta0 is None:
            return -math.inf
        best = -math.inf
        for j in range(self.inst.m):
            b0, b1 = c.beta0[j], c.beta1[j]
            if j in node.fixed_in:
                best = max(best, b1)
            elif j in node.fixed_out:
                best = max(best, b0)
            else:
                best = max(best, min(b0, b1))
        return best

    def evaluate(self, node: Node, inc: float) -> NodeResult:
        inst, spec = self.inst, self.spec
        F1 = sorted(node.fixed_in)
        free = node.free(inst.m)
        cols = sorted(F1 + free)
        base = mae_0(inst.b) if spec.kind.absolute else mse_0(inst.b)
        floor = self._floor(cols)
        bound = _criterion_floor(floor, len(F1), len(free), self.cap, inst.n, spec, base)
        bound = max(bound, node.bound, self._cut_bound(node))
        cands = [tuple(F1)] if len(F1) <= self.cap else []
        if len(cols) <= self.cap:
            cands.append(tuple(cols))
        if not free or len(F1) >= self.cap:
            return NodeResult(bound, closed=True, candidates=tuple(cands))
        if bound >= inc - _prune_tol(inc):
            return NodeResult(bound, closed=True, candidates=tuple(cands))
        return NodeResult(bound, branch=self._branch_var(cols, free, floor), candidates=tuple(cands))

    def _branch_var(self, cols, free, floor) -> int:
        # the free column whose removal hurts the least-squares fit most
        # (a cheap proxy for the absolute-error case as well)
        if len(cols) >= self.inst.n:
            return min(free)
        sq = floor if not self.spec.kind.absolute else _sse_floor(self.inst, cols)
        best, best_gain = free[0], -math.inf
        for j in free:
            gain = _sse_floor(self.inst, [k for k in cols if k != j]) - sq
            if gain > best_gain + 1e-12:
                best, best_gain = j, gain
        return best


class PerCoreBounder(CombinatorialBounder):
    """Capped absolute-error problems where the full model is not identifiable.

    While ``F1 | free`` has more than n-2 columns only the combinatorial
    bound is used. Once a node's column set fits in n-2 columns, a thin
    submodel over those columns is built with an LP-based coefficient bound
    (valid for every subset of them that beats the empty model), and its LP
    relaxation strengthens the bound for the node and all its descendants.
    """

    def __init__(self, inst, spec, cap, cache, epsilon: float = 0.5):
        super().__init__(inst, spec, cap, cache)
        self.epsilon = epsilon
        self.submodels: dict[frozenset, MipModel | None] = {}
        self.stats = compute_stats(inst)
        self.m_hat: dict[frozenset, float] = {}

    def _submodel(self, core: frozenset, inc: float) -> MipModel | None:
        if core in self.submodels:
            return self.submodels[core]
        cols = sorted(core)
        sub = self.inst.subinstance(cols)
        try:
            res = m_for_x_lp(sub, self.epsilon, kind=self.spec.kind)
        except BigMError:
            self.submodels[core] = None
            return None
        self.m_hat[core] = float(res.m_x.max())
        u_cap = min(inc, self.stats.mae_0) * (1 + 1e-9) + 1e-12
        mv = m_for_v(self.stats, "fat", u_heur=u_cap, n=self.inst.n, kind=self.spec.kind,
                     lam=self.spec.lam)
        model = build(sub, self.spec, res.m_x, mv)
        self.submodels[core] = model
        return model

    def evaluate(self, node: Node, inc: float) -> NodeResult:
        res = super().evaluate(node, inc)
        if res.closed:
            return res
        cols = frozenset(j for j in range(self.inst.m) if j not in node.fixed_out)
        if len(cols) > self.inst.n - 2:
            return res
        core = node.core if node.core is not None else cols
        model = self._submodel(core, inc)
        res.core = core
        if model is None:
            return res
        pos = {j: i for i, j in enumerate(sorted(core))}
        f_in = [pos[j] for j in node.fixed_in]
        f_out = [pos[j] for j in node.fixed_out if j in pos]
        sol = model.solve_relaxation(f_in, f_out)
        if sol.status is LpStatus.INFEASIBLE:
            return NodeResult(math.inf, closed=True, candidates=res.candidates)
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericFailure(node.id, f"core LP ended with {sol.status.value}")
        res.bound = max(res.bound, sol.objective)
        z = sol.x[model.layout.z]
        free = node.free(self.inst.m)
        frac = [j for j in free if Z_TOL < z[pos[j]] < 1 - Z_TOL]
        if frac:
            res.branch = max(frac, key=lambda k: (0.5 - abs(z[pos[k]] - 0.5), -k))
        else:
            S = tuple(sorted(j for j in core if z[pos[j]] > 0.5))
            res.candidates = res.candidates + (S,)
            if S and self.cache(S) <= sol.objective + 1e-7 * max(1.0, sol.objective):
                res.closed = True
        return res


# --- search ----------------------------------------------------------------------

def _run(bounder: _Bounder, m: int, warm: SubsetSolution, time_limit: float,
         gap_tol: float, node_limit: int | None, root_bound: float = 0.0):
    t0 = time.perf_counter()
    cache = bounder.cache
    inc_sol = warm
    inc = warm.objective
    history = [(0.0, inc, root_bound)]
    seq = itertools.count()
    root = Node(frozenset(), frozenset(), root_bound, 0, next(seq))
    heap = [(root.bound, 0, root.id, root)]
    nodes = 0
    hit = False

    def offer(S):
        nonlocal inc, inc_sol
        if len(S) > bounder.cap:
            return
        try:
            sol = cache.fit(S)
        except CardinalityError:
            return
        if sol.objective < inc - 1e-12:
            inc, inc_sol = sol.objective, sol

    while heap:
        lb = min(heap[0][0], inc)
        if inc - lb <= gap_tol * max(abs(inc), 1e-10) and inc - lb <= gap_tol:
            break
        if time.perf_counter() - t0 >= time_limit or (node_limit and nodes >= node_limit):
            hit = True
            break
        _, _, _, node = heapq.heappop(heap)
        if node.bound >= inc - _prune_tol(inc):
            continue
        res = bounder.evaluate(node, inc)
        nodes += 1
        for S in res.candidates:
            offer(S)
        if res.closed or res.bound >= inc - _prune_tol(inc) or res.branch is None:
            pass
        else:
            j = res.branch
            kids = []
            if len(node.fixed_in) + 1 <= bounder.cap:
                kids.append(Node(node.fixed_in | {j}, node.fixed_out, res.bound, node.depth + 1,
                                 next(seq), res.core))
            kids.append(Node(node.fixed_in, node.fixed_out | {j}, res.bound, node.depth + 1,
                             next(seq), res.core))
            for kid in kids:
                heapq.heappush(heap, (kid.bound, -kid.depth, kid.id, kid))
        best = min(heap[0][0], inc) if heap else inc
        history.append((time.perf_counter() - t0, inc, best))
    bound = min(heap[0][0], inc) if heap else inc
    # keep the reported bound monotone
    bound = max(bound, max(h[2] for h in history))
    bound = min(bound, inc)
    history.append((time.perf_counter() - t0, inc, bound))
    return inc_sol, bound, nodes, hit, history, time.perf_counter() - t0


def default_bound_fn(model: MipModel):
    """Bounds used for root cuts: LP relaxation (absolute) or combinatorial (squared)."""
    inst, spec = model.inst, model.spec
    cap = _cap_of(inst, model.cap)
    if spec.kind.absolute:
        def fn(f_in, f_out):
            sol = model.solve_relaxation(f_in, f_out)
            if sol.status is LpStatus.INFEASIBLE:
                return math.inf
            if sol.status is not LpStatus.OPTIMAL:
                raise NumericFailure(-1, f"cut LP ended with {sol.status.value}")
            return sol.objective
        return fn

    def fn(f_in, f_out):
        return mse_node_bound(inst, f_in, f_out, spec, cap)
    return fn


def _check_warm(model: MipModel, warm: SubsetSolution | None, cache: EvalCache, cap: int):
    if warm is None:
        return cache.fit(())
    if len(warm.subset) > cap:
        raise ValueError(f"warm start has {len(warm.subset)} variables, above the cap {cap}")
    if any(j < 0 or j >= model.inst.m for j in warm.subset):
        raise ValueError("warm start refers to unknown variables")
    return cache.fit(warm.subset)


def solve_mip(model: MipModel, warm_start: SubsetSolution | None = None,
              time_limit: float = 60.0, use_cuts: bool = False, gap_tol: float = GAP_TOL,
              node_limit: int | None = None, per_core: bool = False,
              cache: EvalCache | None = None) -> SolveReport:
    """Best-first branch-and-bound on the selection variables of ``model``.

    ``per_core=True`` is for capped absolute-error models on instances with
    more than n-2 columns: node bounds then come from thin submodels with
    LP-based coefficient bounds instead of the (possibly heuristic) bounds
    stored in ``model``.
    """
    if not time_limit > 0:
        raise ValueError("time limit must be positive")
    inst, spec = model.inst, model.spec
    cap = _cap_of(inst, model.cap)
    cache = cache or EvalCache(inst, spec)
    warm = _check_warm(model, warm_start, cache, cap)
    cuts = CutSet()
    t_cut = time.perf_counter()
    if use_cuts and not per_core:
        try:
            cuts = generate_cuts(model, warm.objective, default_bound_fn(model))
        except ModelError as exc:
            raise InconsistentBigM(str(exc)) from exc
    t_cut = time.perf_counter() - t_cut
    if per_core:
        if not spec.kind.absolute:
            raise ValueError("per-core bounding is only needed for absolute-error objectives")
        bounder = PerCoreBounder(inst, spec, cap, cache)
    elif spec.kind.absolute:
        mdl = model.with_cuts(cuts) if cuts.cuts else model
        root = mdl.solve_relaxation()
        if root.status is LpStatus.INFEASIBLE:
            raise InconsistentBigM("root LP relaxation is infeasible; big-M values are inconsistent")
        bounder = LpBounder(mdl, cap, cache)
    else:
        bounder = CombinatorialBounder(inst, spec, cap, cache, cuts if cuts.cuts else None)
    remaining = max(time_limit - t_cut, 1e-9)
    sol, bound, nodes, hit, history, wall = _run(bounder, inst.m, warm, remaining, gap_tol,
                                                  node_limit)
    sol = replace(sol, provenance="mip", extra=dict(sol.extra))
    g = gap_ip(sol.objective, bound)
    status = "optimal" if not hit else "time_limit"
    return SolveReport(sol, bound, g, nodes, bounder.cut_counts if cuts.cuts or per_core else
                       {"incumbent": 0, "lower_bound": 0, "fixing": 0},
                       wall + t_cut, hit, status, history,
                       extra={"cut_time_s": t_cut, "fits": len(cache),
                              "cuts": cuts if cuts.cuts else None})


def model_point(model: MipModel, sol: SubsetSolution) -> np.ndarray:
    """A point of ``model`` realizing the subset ``sol``.

    For linear models the relaxation with z fixed to the subset is solved;
    if that does not reproduce the exact criterion (the empty model, or a
    fit whose coefficients exceed the stored bounds), the point is built
    from the exact fit instead.
    """
    if model.spec.kind.absolute:
        S = set(sol.subset)
        out = [j for j in range(model.inst.m) if j not in S]
        lp = model.solve_relaxation(sorted(S), out)
        if lp.optimal and abs(lp.objective - sol.objective) <= 1e-7 * max(1.0, sol.objective):
            return lp.x
    return model.point_from_fit(sol)


# --- exhaustive oracle ---------------------------------------------------------

def exhaustive(inst: Instance, spec: ObjectiveSpec, cap: int | None = None,
               cache: EvalCache | None = None) -> SubsetSolution:
    """Global optimum by refitting every subset with at most ``cap`` columns."""
    if inst.m > MAX_EXHAUSTIVE_M:
        raise ValueError(f"exhaustive search is limited to m <= {MAX_EXHAUSTIVE_M}, got {inst.m}")
    cap = _cap_of(inst, cap)
    cache = cache or EvalCache(inst, spec)
    best = None
    count = 0
    for p in range(cap + 1):
        for S in itertools.combinations(range(inst.m), p):
            sol = cache.fit(S)
            count += 1
            if best is None or sol.objective < best.objective - 1e-12:
                best = sol
    return replace(best, provenance="exhaustive",
                   extra=dict(best.extra, subsets_evaluated=count))
