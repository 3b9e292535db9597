"""Mixed-integer formulations for subset selection and their root cuts.

Variable layout (``2n + 4m + 3`` columns)::

    t+ (n) | t- (n) | x+ (m) | x- (m) | y+ | y- | u | v (m) | z (m)

The objective is ``min u``. For MAE/MAE_a the balance row
``sum(t+ + t-) = (n-1) u - sum(v)`` is linear; for MSE/MSE_a it becomes the
convex quadratic row ``sum((t+ - t-)**2) <= (n-1) u - sum(v)``, which is
kept separately from the linear rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bigm import penalty_constant
from .dataset import Instance
from .lp import LpProblem, LpSolution, solve_lp_fixed
from .objectives import ObjectiveSpec, SubsetSolution

Z_TOL = 1e-6


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Layout:
    n: int
    m: int

    @property
    def tp(self):
        return slice(0, self.n)

    @property
    def tm(self):
        return slice(self.n, 2 * self.n)

    @property
    def xp(self):
        return slice(2 * self.n, 2 * self.n + self.m)

    @property
    def xm(self):
        return slice(2 * self.n + self.m, 2 * self.n + 2 * self.m)

    @property
    def yp(self):
        return 2 * self.n + 2 * self.m

    @property
    def ym(self):
        return self.yp + 1

    @property
    def u(self):
        return self.yp + 2

    @property
    def v(self):
        return slice(self.u + 1, self.u + 1 + self.m)

    @property
    def z(self):
        return slice(self.u + 1 + self.m, self.u + 1 + 2 * self.m)

    @property
    def size(self):
        return 2 * self.n + 4 * self.m + 3

    def z_index(self, j: int) -> int:
        return self.u + 1 + self.m + j

    def names(self):
        n, m = self.n, self.m
        return ([f"tp{i}" for i in range(n)] + [f"tm{i}" for i in range(n)]
                + [f"xp{j}" for j in range(m)] + [f"xm{j}" for j in range(m)]
                + ["yp", "ym", "u"] + [f"v{j}" for j in range(m)] + [f"z{j}" for j in range(m)])


@dataclass(frozen=True)
class Cut:
    kind: str  # "incumbent" | "lower_bound" | "fixing"
    j: int
    coefs: tuple  # ((col, value), ...)
    sense: str
    rhs: float

    def row(self, size: int) -> np.ndarray:
        r = np.zeros(size)
        for col, val in self.coefs:
            r[col] += val
        return r

    def satisfied(self, point: np.ndarray, tol: float = 1e-7) -> bool:
        lhs = sum(val * point[col] for col, val in self.coefs)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        return lhs >= self.rhs - tol


@dataclass
class CutSet:
    cuts: list[Cut] = field(default_factory=list)
    u_heur: float = float("nan")
    u_bar: float = float("nan")
    beta0: np.ndarray | None = None
    beta1: np.ndarray | None = None

    def counts(self) -> dict:
        out = {"incumbent": 0, "lower_bound": 0, "fixing": 0}
        for c in self.cuts:
            out[c.kind] += 1
        return out

    def __len__(self):
        return len(self.cuts)


@dataclass
class MipModel:
    inst: Instance
    spec: ObjectiveSpec
    m_x: np.ndarray
    m_v: np.ndarray
    cap: int | None
    lp: LpProblem
    layout: Layout
    penalty: float
    n_model_rows: int
    cuts: CutSet = field(default_factory=CutSet)

    @property
    def quadratic(self) -> bool:
        return not self.spec.kind.absolute

    @property
    def n_vars(self) -> int:
        return self.layout.size

    @property
    def n_rows(self) -> int:
        return self.n_model_rows

    def z_fixings(self, fixed_in=(), fixed_out=()) -> dict[int, float]:
        L = self.layout
        fx = {L.z_index(j): 1.0 for j in fixed_in}
        fx.update({L.z_index(j): 0.0 for j in fixed_out})
        return fx

    def solve_relaxation(self, fixed_in=(), fixed_out=()) -> LpSolution:
        """LP relaxation (z in [0, 1]) with some z fixed. Linear kinds only."""
        if self.quadratic:
            raise ModelError("the quadratic model has no LP relaxation here")
        return solve_lp_fixed(self.lp, self.z_fixings(fixed_in, fixed_out))

    def with_cuts(self, cutset: CutSet) -> "MipModel":
        if not cutset.cuts:
            return replace(self, cuts=cutset)
        size = self.layout.size
        rows = np.vstack([self.lp.A] + [c.row(size) for c in cutset.cuts])
        lp = LpProblem(self.lp.c, rows, list(self.lp.senses) + [c.sense for c in cutset.cuts],
                       np.concatenate([self.lp.rhs, [c.rhs for c in cutset.cuts]]),
                       upper=self.lp.upper, var_names=self.lp.var_names)
        return replace(self, lp=lp, cuts=cutset)

    def point_from_fit(self, sol: SubsetSolution, objective: float | None = None) -> np.ndarray:
        """Model vector encoding an explicit fitted subset."""
        L = self.layout
        x = np.zeros(L.size)
        t = np.asarray(sol.errors, dtype=float)
        x[L.tp] = np.maximum(t, 0.0)
        x[L.tm] = np.maximum(-t, 0.0)
        coef = sol.coefficients_full(self.inst.m)
        x[L.xp] = np.maximum(coef, 0.0)
        x[L.xm] = np.maximum(-coef, 0.0)
        x[L.yp] = max(sol.intercept, 0.0)
        x[L.ym] = max(-sol.intercept, 0.0)
        u = sol.objective if objective is None else objective
        x[L.u] = u
        z = np.zeros(self.inst.m)
        z[list(sol.subset)] = 1.0
        x[L.z] = z
        x[L.v] = (u + self.penalty) * z
        return x

    def quadratic_slack(self, point: np.ndarray) -> float:
        """``(n-1)u - sum(v) - sum(t^2)`` at ``point``."""
        L = self.layout
        t = point[L.tp] - point[L.tm]
        return float((self.inst.n - 1) * point[L.u] - point[L.v].sum() - t @ t)

    def max_violation(self, point: np.ndarray) -> float:
        """Largest violation of the linear rows, bounds and (if any) the quadratic row."""
        p = self.lp
        r = p.A @ point - p.rhs
        senses = np.asarray(p.senses)
        viol = [r[senses == "<="], -r[senses == ">="], np.abs(r[senses == "="]),
                -point, point - p.upper, [0.0]]
        v = float(max(np.max(np.asarray(a, dtype=float), initial=0.0) for a in viol))
        if self.quadratic:
            v = max(v, -self.quadratic_slack(point))
        return v

    def to_lp_text(self) -> str:
        text = self.lp.to_text()
        if self.quadratic:
            n = self.inst.n
            text += (f"\n\\ quadratic row: sum_i (tp_i - tm_i)^2 <= {n - 1} u - sum_j v_j")
        return text


def build(inst: Instance, spec: ObjectiveSpec, m_x, m_v, cap: int | None = None) -> MipModel:
    """Assemble the MIP for ``spec`` with the given big-M values.

    ``cap`` adds ``sum(z) <= cap``; adjusted kinds on fat instances require
    ``cap <= n-2``.
    """
    n, m = inst.n, inst.m
    m_x = np.broadcast_to(np.asarray(m_x, dtype=float), (m,)).copy() if m else np.zeros(0)
    m_v = np.broadcast_to(np.asarray(m_v, dtype=float), (m,)).copy() if m else np.zeros(0)
    if np.any(~(m_x > 0)) or np.any(~(m_v > 0)):
        raise ModelError("big-M values must be strictly positive")
    if not np.all(np.isfinite(m_x)) or not np.all(np.isfinite(m_v)):
        raise ModelError("big-M values must be finite")
    if cap is None and m > n - 2:
        raise ModelError(f"instance has m={m} > n-2={n - 2}; a cardinality cap is required")
    if cap is not None and cap > n - 2:
        raise ModelError(f"cap {cap} exceeds n-2 = {n - 2}")

    L = Layout(n, m)
    c_pen = penalty_constant(inst, spec)
    size = L.size
    rows, senses, rhs = [], [], []

    def add(coefs, sense, r):
        row = np.zeros(size)
        for col, val in coefs:
            row[col] += val
        rows.append(row)
        senses.append(sense)
        rhs.append(r)

    # balance row (linear for the absolute kinds; quadratic row kept aside otherwise)
    if spec.kind.absolute:
        bal = np.zeros(size)
        bal[L.tp] = 1.0
        bal[L.tm] = 1.0
        bal[L.u] = -(n - 1)
        bal[L.v] = 1.0
        rows.append(bal)
        senses.append("=")
        rhs.append(0.0)
    # error definitions: t+ - t- - a(x+ - x-) - (y+ - y-) = -b
    E = np.zeros((n, size))
    E[:, L.tp] = np.eye(n)
    E[:, L.tm] = -np.eye(n)
    E[:, L.xp] = -inst.a
    E[:, L.xm] = inst.a
    E[:, L.yp] = -1.0
    E[:, L.ym] = 1.0
    rows.extend(E)
    senses.extend(["="] * n)
    rhs.extend(-inst.b)
    xp0, xm0, v0 = L.xp.start, L.xm.start, L.v.start
    for j in range(m):
        zj = L.z_index(j)
        add([(xp0 + j, 1.0), (zj, -m_x[j])], "<=", 0.0)
        add([(xm0 + j, 1.0), (zj, -m_x[j])], "<=", 0.0)
    for j in range(m):
        add([(v0 + j, 1.0), (L.u, -1.0)], "<=", c_pen)
    for j in range(m):
        zj = L.z_index(j)
        add([(L.u, 1.0), (v0 + j, -1.0), (zj, m_v[j])], "<=", m_v[j] - c_pen)
        add([(v0 + j, 1.0), (zj, -m_v[j])], "<=", 0.0)
    if cap is not None:
        add([(L.z_index(j), 1.0) for j in range(m)], "<=", float(cap))

    c = np.zeros(size)
    c[L.u] = 1.0
    upper = np.full(size, np.inf)
    upper[L.z] = 1.0
    lp = LpProblem(c, np.array(rows) if rows else np.zeros((0, size)), senses, np.array(rhs),
                   upper=upper, var_names=L.names())
    n_model_rows = len(rows) + (0 if spec.kind.absolute else 1)
    return MipModel(inst, spec, m_x, m_v, cap, lp, L, c_pen, n_model_rows)


def generate_cuts(model: MipModel, u_heur: float, bound_fn=None) -> CutSet:
    """Root cuts: ``v_j <= (u_heur+c) z_j``, ``v_j >= (u_bar+c) z_j`` and
    ``u >= (beta1_j - beta0_j) z_j + beta0_j``.

    ``c`` is the per-variable penalty (zero for MAE/MSE). ``bound_fn(F1, F0)``
    must return a valid lower bound on ``u`` over completions with ``F1``
    forced in and ``F0`` forced out, or ``inf`` if there are none. By
    default the LP relaxation is used for the absolute kinds and the
    combinatorial bound for the squared kinds.
    """
    if bound_fn is None:
        from .bnb import default_bound_fn

        bound_fn = default_bound_fn(model)
    L = model.layout
    m = model.inst.m
    c = model.penalty
    u_bar = bound_fn((), ())
    if not np.isfinite(u_bar):
        raise ModelError("root relaxation infeasible; big-M values are inconsistent")
    beta0 = np.zeros(m)
    beta1 = np.zeros(m)
    for j in range(m):
        beta0[j] = bound_fn((), (j,))
        beta1[j] = bound_fn((j,), ())
    cuts = []
    v0 = L.v.start
    for j in range(m):
        zj = L.z_index(j)
        cuts.append(Cut("incumbent", j, ((v0 + j, 1.0), (zj, -(u_heur + c))), "<=", 0.0))
    for j in range(m):
        zj = L.z_index(j)
        cuts.append(Cut("lower_bound", j, ((v0 + j, 1.0), (zj, -(u_bar + c))), ">=", 0.0))
    for j in range(m):
        b0, b1 = beta0[j], beta1[j]
        if not np.isfinite(b0) and not np.isfinite(b1):
            raise ModelError("both branches of a variable are infeasible")
        # An infeasible side means that value of z_j is impossible; skip the
        # cut rather than writing an infinite coefficient.
        if not (np.isfinite(b0) and np.isfinite(b1)):
            continue
        zj = L.z_index(j)
        cuts.append(Cut("fixing", j, ((L.u, 1.0), (zj, -(b1 - b0))), ">=", float(b0)))
    return CutSet(cuts, u_heur=u_heur, u_bar=float(u_bar), beta0=beta0, beta1=beta1)
