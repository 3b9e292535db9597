"""Big-M constants for the coefficient (x) and product (v) variables."""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import Instance, InstanceStats
from .linalg import exact_gram, size_of
from .lp import LpProblem, LpStatus, solve_lp_sequence
from .objectives import Kind, ObjectiveSpec, SubsetSolution, lad_fit, mae_0, mse_0

DEFAULT_EPSILON = 0.5
MAX_SIZE_LOG2 = 300.0
ESTIMATE_SAMPLES = 30
Z_95 = 1.65


class Method(enum.Enum):
    LP_BASED = "LpBased"
    LP_PER_CORE = "LpPerCore"
    SIZE_BASED = "SizeBased"
    HEURISTIC = "Heuristic"
    STATISTICAL = "Statistical"


class Validity(enum.Enum):
    PROVEN = "Proven"
    CONFIDENCE95 = "Confidence95"
    HEURISTIC = "Heuristic"


VALIDITY = {
    Method.LP_BASED: Validity.PROVEN,
    Method.LP_PER_CORE: Validity.PROVEN,
    Method.SIZE_BASED: Validity.PROVEN,
    Method.STATISTICAL: Validity.CONFIDENCE95,
    Method.HEURISTIC: Validity.HEURISTIC,
}


class BigMError(RuntimeError):
    pass


class AssumptionViolated(BigMError):
    """Some subset reproduces ``b`` exactly, so no bounded LP exists."""


@dataclass
class BigMResult:
    m_x: np.ndarray
    m_v: float
    method: Method
    compute_time: float = 0.0
    log2_m_x: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m_x = np.atleast_1d(np.asarray(self.m_x, dtype=float))
        if np.any(~(self.m_x > 0)) or not self.m_v > 0:
            raise BigMError("big-M values must be strictly positive")

    @property
    def validity(self) -> Validity:
        return VALIDITY[self.method]

    def to_dict(self) -> dict:
        d = {
            "method": self.method.value,
            "validity": self.validity.value,
            "m_x": [float(v) for v in self.m_x],
            "m_v": float(self.m_v),
            "compute_time_s": self.compute_time,
        }
        if self.log2_m_x is not None:
            d["log2_m_x"] = self.log2_m_x
        return d


def penalty_constant(inst: Instance, spec: ObjectiveSpec) -> float:
    """Per-variable penalty ``lam * base / (n-2)``; zero for MAE/MSE."""
    if not spec.kind.adjusted:
        return 0.0
    base = mae_0(inst.b) if spec.kind.absolute else mse_0(inst.b)
    return spec.lam * base / (inst.n - 2)


def m_for_v(stats: InstanceStats, case: str, u_heur: float | None = None,
            n: int | None = None, kind: Kind = Kind.MAE, lam: float = 1.0) -> float:
    """Bound on the v variables.

    thin: the full-model criterion (mae_m or mse_m). fat: ``(n-1)/(n-2)``
    times the empty-model value, or ``u_heur + lam*base/(n-2)`` when a
    heuristic objective is available.
    """
    absolute = kind.absolute
    if case == "thin":
        val = stats.mae_m if absolute else stats.mse_m
        if val is None:
            raise BigMError("thin-case bound needs m <= n-2")
        if u_heur is not None:
            val = min(val, u_heur)
        return max(val, 1e-12)
    if case != "fat":
        raise ValueError("case must be 'thin' or 'fat'")
    if n is None:
        raise ValueError("fat-case bound needs n")
    base = stats.mae_0 if absolute else stats.mse_0
    if u_heur is None:
        return lam * base / (n - 2) + base
    return u_heur + lam * base / (n - 2)


def _error_budget(inst: Instance, kind: Kind) -> float:
    dev = inst.b - inst.b.mean()
    if kind.absolute:
        return float(np.abs(dev).sum())
    # SSE <= SST implies SAE <= sqrt(n * SST).
    return math.sqrt(inst.n * float(dev @ dev))


def bound_lp(inst: Instance, budget: float) -> LpProblem:
    """Feasibility set over ``[x+, x-, y+, y-, t+, t-, mu]`` with SAE <= budget."""
    n, m = inst.n, inst.m
    nv = 2 * m + 2 + 2 * n + 1
    mu = nv - 1
    rows, senses, rhs = [], [], []
    r = np.zeros(nv)
    r[2 * m + 2:2 * m + 2 + 2 * n] = 1.0
    rows.append(r), senses.append("<="), rhs.append(budget)
    eq = np.zeros((n, nv))
    eq[:, :m] = -inst.a
    eq[:, m:2 * m] = inst.a
    eq[:, 2 * m] = -1.0
    eq[:, 2 * m + 1] = 1.0
    eq[:, 2 * m + 2:2 * m + 2 + n] = np.eye(n)
    eq[:, 2 * m + 2 + n:2 * m + 2 + 2 * n] = -np.eye(n)
    rows.extend(eq), senses.extend(["="] * n), rhs.extend(-inst.b)
    for j in range(2 * m):
        r = np.zeros(nv)
        r[j] = 1.0
        r[mu] = -1.0
        rows.append(r), senses.append("<="), rhs.append(0.0)
    return LpProblem(np.zeros(nv), np.array(rows), senses, np.array(rhs))


def m_for_x_lp(inst: Instance, epsilon: float = DEFAULT_EPSILON, kind: Kind = Kind.MAE,
               stats: InstanceStats | None = None) -> BigMResult:
    """Coefficient bound from 2m LPs that push each coefficient to its limit.

    For every k, maximize ``x_k - eps*mu`` (then ``-x_k``) over all fits
    whose total absolute error stays within the empty-model error, and take
    the largest resulting ``mu``. Valid for every subset model that can beat
    the empty model.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if inst.m > inst.n - 2:
        raise BigMError("LP-based bound is defined for the thin case only")
    t0 = time.perf_counter()
    from .dataset import compute_stats

    stats = stats or compute_stats(inst)
    if stats.sae_m is None or stats.sae_m <= 1e-8:
        raise AssumptionViolated("full LAD fit has zero error; data are linearly dependent")
    m = inst.m
    base = bound_lp(inst, _error_budget(inst, kind))
    mu = base.n_vars - 1
    # maximize x_k - eps*mu with x_k = x_k^+ - x_k^-; at an optimum the
    # opposite-sign part is zero, and all 2m problems share one feasible set
    costs = []
    for k in range(m):
        for sign in (1.0, -1.0):
            c = np.zeros(base.n_vars)
            c[k] = -sign
            c[m + k] = sign
            c[mu] = epsilon
            costs.append(c)
    per_var = np.zeros(m)
    for i, sol in enumerate(solve_lp_sequence(base, costs)):
        k = i // 2
        if sol.status is LpStatus.UNBOUNDED:
            raise BigMError(f"bound LP for variable {k} is unbounded (inconsistent data)")
        if sol.status is not LpStatus.OPTIMAL:
            raise BigMError(f"bound LP for variable {k} ended with {sol.status.value}")
        per_var[k] = max(per_var[k], sol.x[mu])
    m_hat = float(per_var.max()) if m else 0.0
    m_hat = max(m_hat, 1e-9)
    mv = m_for_v(stats, "thin", kind=kind)
    return BigMResult(np.full(m, m_hat), mv, Method.LP_BASED, time.perf_counter() - t0,
                      extra={"per_variable": per_var.tolist(), "epsilon": epsilon})


def size_bound_log2(inst: Instance) -> tuple[int, int, int]:
    """(size(A), size(B), log2 M) with ``A = a^T a`` and ``B = a^T b``."""
    A, B = exact_gram(inst)
    sa = size_of(A) if inst.m else 0
    sb = size_of(B) if inst.m else 0
    return sa, sb, sa * sb - 1


def m_for_x_size(inst: Instance, stats: InstanceStats | None = None,
                 kind: Kind = Kind.MSE) -> BigMResult:
    """``2**(size(A)*size(B) - 1)``; huge, kept alongside its log2."""
    t0 = time.perf_counter()
    sa, sb, lg = size_bound_log2(inst)
    value = math.inf if lg > 1023 else float(2.0 ** lg)
    from .dataset import compute_stats

    stats = stats or compute_stats(inst)
    mv = m_for_v(stats, "thin", kind=kind) if inst.m <= inst.n - 2 else \
        m_for_v(stats, "fat", n=inst.n, kind=kind)
    res = BigMResult(np.full(max(inst.m, 1), value if math.isfinite(value) else 1.0), mv,
                     Method.SIZE_BASED, time.perf_counter() - t0, log2_m_x=float(lg),
                     extra={"size_A": sa, "size_B": sb})
    if not math.isfinite(value):
        res.m_x = np.full(max(inst.m, 1), math.inf)
    return res


def check_size_usable(res: BigMResult) -> None:
    """Refuse size-based constants that would wreck LP numerics."""
    if res.log2_m_x is not None and res.log2_m_x > MAX_SIZE_LOG2:
        raise BigMError(
            f"size-based M is 2^{res.log2_m_x:.0f}, beyond 2^{MAX_SIZE_LOG2:.0f}; "
            "use the LP-based bound (thin case) or the heuristic/statistical bound (fat case)"
        )


def m_for_x_heuristic(heur: SubsetSolution, fallback: float) -> BigMResult:
    """Largest absolute coefficient of a heuristic solution (not a proven bound)."""
    vals = np.abs(np.asarray(heur.coef, dtype=float))
    mx = float(vals.max()) if vals.size else 0.0
    extra = {}
    if not mx > 0:
        mx = fallback
        extra["fallback"] = True
    return BigMResult(np.array([mx]), fallback, Method.HEURISTIC, extra=extra)


def estimate_m(inst: Instance, samples: int = ESTIMATE_SAMPLES, seed: int = 0,
               max_retries: int = 100) -> BigMResult:
    """Per-variable coefficient bound estimated from random (n-2)-column fits.

    For each k, ``samples`` LAD fits of k plus n-3 random other columns give
    values |x_k|; the estimate is mean + 1.65 * sample standard deviation.
    """
    n, m = inst.n, inst.m
    if n < 5:
        raise BigMError("Estimate-M needs n >= 5")
    k_other = min(n - 3, m - 1)
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    out = np.zeros(m)
    for k in range(m):
        others = np.array([j for j in range(m) if j != k])
        vals = []
        retries = 0
        while len(vals) < samples:
            pick = rng.choice(others, size=k_other, replace=False)
            cols = sorted([k, *pick.tolist()])
            X = np.column_stack([np.ones(n), inst.a[:, cols]])
            if np.linalg.matrix_rank(X) < X.shape[1]:
                retries += 1
                if retries > max_retries:
                    raise BigMError(f"Estimate-M: too many singular draws for variable {k}")
                continue
            sol = lad_fit(inst, cols)
            vals.append(abs(float(sol.coef[cols.index(k)])))
        arr = np.array(vals)
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out[k] = float(arr.mean()) + Z_95 * sd
    out = np.maximum(out, 1e-9)
    from .dataset import compute_stats

    stats = compute_stats(inst)
    return BigMResult(out, m_for_v(stats, "fat", n=n), Method.STATISTICAL,
                      time.perf_counter() - t0, extra={"samples": samples, "seed": seed})
