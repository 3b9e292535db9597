"""Stepwise selection and the core-set heuristics for capped problems.

The core-set methods repeatedly solve the exact problem on a small working
set of columns C (|C| <= n-2, so every core problem is identifiable), then
rebuild C around the best subset found so far. ``core_heuristic`` picks the
extra columns greedily, ``core_random`` samples them.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bigm import BigMError, m_for_v, m_for_x_heuristic, m_for_x_lp
from .bnb import InconsistentBigM, solve_mip
from .dataset import Instance, compute_stats
from .models import build
from .objectives import EvalCache, ObjectiveSpec, SubsetSolution, mae_0, mse_0

BONUS_WEIGHT = 0.5
RATIO_BOUND = 2.72


def stepwise(inst: Instance, spec: ObjectiveSpec, p_max: int | None = None,
             cache: EvalCache | None = None) -> SubsetSolution:
    """Forward selection, then alternating add/drop passes until nothing improves."""
    cap = inst.n - 2 if p_max is None else p_max
    if cap > inst.n - 2:
        raise ValueError(f"p_max {cap} exceeds n-2 = {inst.n - 2}")
    cap = min(cap, inst.m)
    ev = cache or EvalCache(inst, spec)
    S: set[int] = set()
    best = ev(())

    def best_add():
        if len(S) >= cap:
            return None, math.inf
        out = [j for j in range(inst.m) if j not in S]
        vals = [ev(S | {j}) for j in out]
        if not vals:
            return None, math.inf
        k = int(np.argmin(vals))
        return out[k], vals[k]

    def best_drop():
        inn = sorted(S)
        vals = [ev(S - {j}) for j in inn]
        if not vals:
            return None, math.inf
        k = int(np.argmin(vals))
        return inn[k], vals[k]

    while True:
        j, val = best_add()
        if j is None or val >= best:
            break
        S.add(j)
        best = val
    improved = True
    while improved:
        improved = False
        j, val = best_add()
        if j is not None and val < best:
            S.add(j)
            best, improved = val, True
        j, val = best_drop()
        if j is not None and val < best:
            S.discard(j)
            best, improved = val, True
    sol = ev.fit(tuple(sorted(S)))
    return replace(sol, provenance="stepwise", extra=dict(sol.extra))


def theta_size(n: int, theta: float) -> int:
    return max(1, min(math.ceil(n * theta - 1e-12), n - 2))


def theta_auto(method: str, m: int, n: int, time_limit: float | None = None) -> float:
    """Core-set fraction defaults for each heuristic."""
    if method == "core-heur":
        r = n / m
        return 1.0 if (r >= 0.4 and n <= 40) or (r >= 0.5 and n > 40) else 0.8
    if method == "core-rand":
        long_run = time_limit is not None and time_limit >= 3600
        return 0.8 if long_run and m * n >= 9000 else 1.0
    raise ValueError(f"no theta rule for method {method!r}")


def phi(m: int, theta_size: int) -> float:
    """Lower bound on the chance that one random core contains a given set."""
    return (1.0 / (1.0 + RATIO_BOUND * (m - 1))) ** theta_size


def _core_hash(C) -> str:
    return hashlib.sha1(",".join(map(str, sorted(C))).encode()).hexdigest()[:12]


@dataclass
class CoreState:
    S_star: tuple
    obj_star: float
    C: tuple
    Theta: int
    theta: float
    U: np.ndarray
    seed: int | None = None
    T: np.ndarray | None = None

    @property
    def w(self) -> np.ndarray:
        w = np.ones(self.U.size)
        w[list(self.S_star)] = BONUS_WEIGHT
        return w


@dataclass
class SelectionDistribution:
    q: np.ndarray
    active: np.ndarray
    u_bar: np.ndarray

    def renormalized(self, taken: int) -> "SelectionDistribution":
        """Distribution over the remaining variables after ``taken`` is drawn."""
        keep = self.active != taken
        q = self.q[keep]
        return SelectionDistribution(q / q.sum(), self.active[keep], self.u_bar[keep])


def build_distribution(state: CoreState, active=None) -> SelectionDistribution:
    """Exponential selection probabilities from weighted best-seen objectives."""
    idx = np.arange(state.U.size) if active is None else np.asarray(active)
    wu = (state.w * state.U)[idx]
    lo, hi = float(wu.min()), float(wu.max())
    if hi - lo <= 1e-15 * max(1.0, abs(hi)):
        u_bar = np.zeros(idx.size)
    else:
        u_bar = (wu - (hi + lo) / 2) / (hi - lo)
    e = np.exp(-u_bar)
    return SelectionDistribution(e / e.sum(), idx, u_bar)


def sample_core(dist: SelectionDistribution, size: int, rng: np.random.Generator) -> tuple:
    """Draw ``size`` variables one by one without replacement."""
    C = []
    while len(C) < size and dist.active.size:
        k = int(rng.choice(dist.active, p=dist.q))
        C.append(k)
        dist = dist.renormalized(k)
    return tuple(sorted(C))


@dataclass
class ScanResult:
    S_star: tuple
    obj_star: float
    Theta: int
    T: np.ndarray
    improvements: int = 0
    theta_growth: list = field(default_factory=list)


def local_search(inst: Instance, S_star, obj_star: float, Theta: int, ev: EvalCache,
                 on_improve=None) -> ScanResult:
    """Neighbor scan with restart on improvement (the greedy update steps).

    ``T[j]`` is the error sum (SAE or SSE) of ``S* - {j}`` for members and of
    ``S* + {j}`` for the rest; a neighbor that would exceed n-2 variables is
    not a candidate move but still gets a score.
    """
    n, m = inst.n, inst.m
    S = tuple(sorted(S_star))
    improvements = 0
    growth = []
    while True:
        T = np.full(m, np.inf)
        E = np.full(m, np.inf)
        Sset = set(S)
        for j in range(m):
            nb = tuple(sorted(Sset ^ {j}))
            if len(nb) <= n - 2:
                sol = ev.fit(nb)
                T[j] = sol.sae if ev.spec.kind.absolute else sol.sse
                E[j] = sol.objective
            elif len(nb) <= n - 1:
                T[j] = ev_error(inst, nb, ev)
        k = int(np.argmin(E))
        if E[k] < obj_star - 1e-12:
            S = tuple(sorted(Sset ^ {k}))
            obj_star = float(E[k])
            improvements += 1
            if len(S) == Theta:
                growth.append(Theta)
                Theta = min(Theta + 1, n - 2)
            if on_improve is not None:
                on_improve(S, obj_star)
            continue
        return ScanResult(S, obj_star, Theta, T, improvements, growth)


def ev_error(inst, subset, ev: EvalCache) -> float:
    # error sum of a subset too large for the criterion (score only)
    from .linalg import min_sse
    from .objectives import lad_fit

    return lad_fit(inst, subset).sae if ev.spec.kind.absolute else min_sse(inst, subset)


def greedy_core(S_star, T: np.ndarray, Theta: int) -> tuple:
    outside = [j for j in range(T.size) if j not in set(S_star)]
    outside.sort(key=lambda j: (T[j], j))
    return tuple(sorted(set(S_star) | set(outside[:max(Theta - len(S_star), 0)])))


def solve_core(inst: Instance, spec: ObjectiveSpec, C, warm: SubsetSolution, obj_star: float,
               budget: float, ev: EvalCache):
    """Exact solve restricted to the columns in ``C``; returns a full-index solution.

    Only subsets beating ``obj_star`` are of interest, so a core problem
    with no such subset (infeasible relaxation) simply returns ``warm``.
    A core wider than n-2 columns keeps the cardinality cap and is bounded
    combinatorially plus per-subcore LPs.
    """
    cols = sorted(C)
    n = inst.n
    sub = inst.subinstance(cols)
    pos = {j: i for i, j in enumerate(cols)}
    warm_sub = tuple(pos[j] for j in warm.subset if j in pos)
    sub_cache = EvalCache(sub, spec)
    warm_sol = sub_cache.fit(warm_sub)
    stats = compute_stats(sub)
    mv = m_for_v(stats, "fat", u_heur=max(obj_star, 0.0), n=n, kind=spec.kind, lam=spec.lam)
    fat_core = len(cols) > n - 2
    per_core = fat_core and spec.kind.absolute
    if fat_core:
        mx = m_for_x_heuristic(warm_sol, mv).m_x
    else:
        try:
            mx = m_for_x_lp(sub, kind=spec.kind, stats=stats).m_x
        except BigMError:
            # degenerate core: no LP-based bound, use combinatorial bounds only
            mx = m_for_x_heuristic(warm_sol, mv).m_x
            per_core = spec.kind.absolute
    model = build(sub, spec, mx, mv, cap=n - 2 if fat_core else None)
    try:
        rep = solve_mip(model, warm_sol, budget, per_core=per_core, cache=sub_cache)
    except InconsistentBigM:
        return ev.fit(warm.subset), None
    S = tuple(sorted(cols[i] for i in rep.incumbent.subset))
    return ev.fit(S), rep


def _trace_line(fh, **rec):
    if fh is not None:
        fh.write(json.dumps(rec) + "\n")


def core_heuristic(inst: Instance, spec: ObjectiveSpec, theta: float = 0.8,
                   mip_budget: float = 60.0, trace=None, max_iter: int = 1000,
                   core_size: int | None = None,
                   cache: EvalCache | None = None) -> SubsetSolution:
    """Greedy core-set iteration; ends at a subset with no improving neighbor.

    ``core_size`` overrides the core cardinality derived from ``theta``;
    values of m or more make the core the whole column set, so a single
    core solve is the full capped problem. ``trace`` may be a writable text
    file; one JSON line per outer iteration is appended. The returned
    solution's ``extra`` holds the core hash log, the objective trajectory
    and the core-size history.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    t0 = time.perf_counter()
    ev = cache or EvalCache(inst, spec)
    Theta = theta_size(inst.n, theta) if core_size is None else int(core_size)
    if Theta < 1:
        raise ValueError("core size must be positive")
    init = stepwise(inst, spec, min(Theta, inst.n - 2), ev)
    scan = local_search(inst, init.subset, init.objective, Theta, ev)
    S, obj, Theta = scan.S_star, scan.obj_star, scan.Theta
    C = greedy_core(S, scan.T, Theta)
    hashes = [_core_hash(C)]
    objs = [obj]
    thetas = [Theta]
    it = 0
    _trace_line(trace, iteration=0, obj_star=obj, size=len(S), Theta=Theta, core=hashes[-1])
    while it < max_iter:
        it += 1
        prev = obj
        sol, _ = solve_core(inst, spec, C, ev.fit(S), obj, mip_budget, ev)
        if sol.objective < obj - 1e-12:
            S, obj = sol.subset, sol.objective
        scan = local_search(inst, S, obj, Theta, ev)
        S, obj, Theta = scan.S_star, scan.obj_star, scan.Theta
        C = greedy_core(S, scan.T, Theta)
        hashes.append(_core_hash(C))
        objs.append(obj)
        thetas.append(Theta)
        _trace_line(trace, iteration=it, obj_star=obj, size=len(S), Theta=Theta, core=hashes[-1])
        if not obj < prev - 1e-12:
            break
    out = ev.fit(S)
    return replace(out, provenance="core-heur", extra=dict(
        out.extra, core_hashes=hashes, obj_trajectory=objs, Theta_history=thetas,
        iterations=it, stepwise_objective=init.objective, time_s=time.perf_counter() - t0))


def core_random(inst: Instance, spec: ObjectiveSpec, theta: float = 1.0, time_limit: float = 60.0,
                seed: int = 0, mip_budget: float | None = None, target: float | None = None,
                max_iter: int | None = None, trace=None, record_states: bool = False,
                cache: EvalCache | None = None) -> SubsetSolution:
    """Randomized core-set iteration; runs until ``time_limit``.

    Stops early once the objective reaches ``target`` (within 1e-9) or
    after ``max_iter`` outer iterations. Same seed, same trajectory.
    """
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    ev = cache or EvalCache(inst, spec)
    n, m = inst.n, inst.m
    Theta = theta_size(n, theta)
    base = mae_0(inst.b) if spec.kind.absolute else mse_0(inst.b)
    init = stepwise(inst, spec, Theta, ev)
    U = np.full(m, base)
    U[list(init.subset)] = init.objective

    def on_improve(S, val):
        U[list(S)] = val

    state = CoreState(init.subset, init.objective, (), Theta, theta, U, seed)
    objs, hashes, states = [init.objective], [], []
    it = 0

    def done():
        if target is not None and state.obj_star <= target + 1e-9 * max(1.0, abs(target)):
            return True
        if max_iter is not None and it >= max_iter:
            return True
        return time.perf_counter() - t0 >= time_limit

    def update():
        scan = local_search(inst, state.S_star, state.obj_star, state.Theta, ev, on_improve)
        state.S_star, state.obj_star, state.Theta, state.T = (scan.S_star, scan.obj_star,
                                                              scan.Theta, scan.T)
        dist = build_distribution(state)
        if record_states:
            states.append(dist)
        state.C = sample_core(dist, state.Theta, rng)
        hashes.append(_core_hash(state.C))

    update()
    while not done():
        it += 1
        left = time_limit - (time.perf_counter() - t0)
        budget = max(min(left, mip_budget or left), 1e-3)
        warm = ev.fit(tuple(j for j in state.S_star if j in set(state.C)))
        sol, _ = solve_core(inst, spec, state.C, warm, state.obj_star, budget, ev)
        if sol.objective < state.obj_star - 1e-12:
            state.S_star, state.obj_star = sol.subset, sol.objective
            on_improve(sol.subset, sol.objective)
        if done():
            break
        update()
        objs.append(state.obj_star)
        _trace_line(trace, iteration=it, obj_star=state.obj_star, size=len(state.S_star),
                    Theta=state.Theta, core=hashes[-1])
    out = ev.fit(state.S_star)
    extra = dict(out.extra, iterations=it, seed=seed, phi=phi(m, state.Theta),
                 obj_trajectory=objs, core_hashes=hashes, stepwise_objective=init.objective,
                 time_s=time.perf_counter() - t0)
    if record_states:
        extra["distributions"] = states
    return replace(out, provenance="core-rand", extra=extra)
