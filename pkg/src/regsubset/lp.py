"""Dense two-phase primal simplex for small linear programs.

Problems are stated as::

    min  c @ x
    s.t. A[i] @ x  (<=, =, >=)  rhs[i]
         0 <= x <= upper        (upper may be +inf)

The solver works on a full tableau. It uses Dantzig pricing and falls back
to Bland's rule once too many degenerate pivots have been made. All
tolerances are fixed module constants so results are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-9
OPT_TOL = 1e-9

LE, EQ, GE = "<=", "=", ">="


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERIC_FAILURE = "numeric_failure"


@dataclass
class LpProblem:
    """A minimization LP over nonnegative variables."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    rhs: np.ndarray
    upper: np.ndarray | None = None
    var_names: list[str] | None = None
    row_names: list[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.A = np.asarray(self.A, dtype=float)
        if self.A.size == 0:
            self.A = self.A.reshape(self.rhs.size, self.c.size)
        self.A = np.atleast_2d(self.A)
        self.senses = list(self.senses)
        if self.upper is None:
            self.upper = np.full(self.c.size, np.inf)
        else:
            self.upper = np.asarray(self.upper, dtype=float)
        nrow, ncol = self.A.shape
        if ncol != self.c.size or self.upper.size != ncol:
            raise ValueError("column dimensions disagree")
        if self.rhs.size != nrow or len(self.senses) != nrow:
            raise ValueError("row dimensions disagree")
        bad = [s for s in self.senses if s not in (LE, EQ, GE)]
        if bad:
            raise ValueError(f"unknown constraint sense {bad[0]!r}")
        for arr in (self.c, self.A, self.rhs):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
        if np.any(self.upper < 0) or np.any(np.isnan(self.upper)):
            raise ValueError("upper bounds must be nonnegative")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def to_text(self) -> str:
        """Plain-text dump, one row per line, for debugging."""
        names = self.var_names or [f"c{j}" for j in range(self.n_vars)]
        rnames = self.row_names or [f"r{i}" for i in range(self.n_rows)]

        def expr(coefs):
            terms = [f"{v:+.10g} {names[j]}" for j, v in enumerate(coefs) if v != 0.0]
            return " ".join(terms) if terms else "0"

        lines = ["minimize", f"  obj: {expr(self.c)}", "subject to"]
        for i in range(self.n_rows):
            lines.append(f"  {rnames[i]}: {expr(self.A[i])} {self.senses[i]} {self.rhs[i]:.10g}")
        lines.append("bounds")
        for j in range(self.n_vars):
            ub = self.upper[j]
            lines.append(f"  0 <= {names[j]}" + (f" <= {ub:.10g}" if np.isfinite(ub) else ""))
        lines.append("end")
        return "\n".join(lines)


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = np.nan
    iterations: int = 0
    message: str = ""
    basis: list[int] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Standard-form tableau ``[A | b]`` with basis bookkeeping."""

    def __init__(self, A, b, basis, n_art):
        self.T = np.hstack([A, b[:, None]])
        self.basis = list(basis)
        self.n_art = n_art
        self.n_cols = A.shape[1]
        self.iterations = 0
        self.degenerate = 0

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        self.basis[r] = q
        self.iterations += 1

    def run(self, cost, allowed, max_iter, bland_after):
        """Minimize ``cost @ x`` over the current tableau.

        Returns "optimal", "unbounded" or "iterations".
        """
        T = self.T
        m = T.shape[0]
        ncol = self.n_cols
        bland = False
        while True:
            cb = cost[self.basis]
            red = cost - cb @ T[:, :ncol]
            red[~allowed] = 0.0
            if bland:
                cand = np.flatnonzero(red < -OPT_TOL)
                if cand.size == 0:
                    return "optimal"
                q = int(cand[0])
            else:
                q = int(np.argmin(red))
                if red[q] >= -OPT_TOL:
                    return "optimal"
            col = T[:, q]
            pos = col > PIVOT_TOL
            if not np.any(pos):
                return "unbounded"
            ratios = np.full(m, np.inf)
            ratios[pos] = T[pos, -1] / col[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            if ties.size > 1:
                # Bland-compatible tie-break: smallest leaving variable index.
                r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            else:
                r = int(ties[0])
            if best <= FEAS_TOL * 1e-3:
                self.degenerate += 1
                if self.degenerate > bland_after:
                    bland = True
            self.pivot(r, q)
            if self.iterations > max_iter:
                return "iterations"


def _standard_form(p: LpProblem):
    """Convert to ``A x = b, x >= 0, b >= 0`` with an initial basis.

    Returns (A, b, cost, basis, n_struct, n_art). Artificial columns are the
    last ``n_art`` columns.
    """
    A = p.A
    rhs = p.rhs
    senses = list(p.senses)
    ub_idx = np.flatnonzero(np.isfinite(p.upper))
    if ub_idx.size:
        extra = np.zeros((ub_idx.size, p.n_vars))
        extra[np.arange(ub_idx.size), ub_idx] = 1.0
        A = np.vstack([A, extra])
        rhs = np.concatenate([rhs, p.upper[ub_idx]])
        senses += [LE] * ub_idx.size
    m, n = A.shape
    n_slack = sum(s != EQ for s in senses)
    S = np.zeros((m, n_slack))
    k = 0
    for i, s in enumerate(senses):
        if s == LE:
            S[i, k] = 1.0
            k += 1
        elif s == GE:
            S[i, k] = -1.0
            k += 1
    M = np.hstack([A, S])
    b = rhs.copy()
    neg = b < 0
    M[neg] *= -1.0
    b[neg] *= -1.0

    # Crash basis: any column that is a positive unit-like singleton in a row.
    nz_count = np.count_nonzero(M, axis=0)
    basis = [-1] * m
    used = set()
    for j in np.flatnonzero(nz_count == 1):
        i = int(np.flatnonzero(M[:, j])[0])
        if basis[i] < 0 and M[i, j] > 0 and j not in used:
            basis[i] = int(j)
            used.add(int(j))
    for i, j in enumerate(basis):
        if j >= 0:
            piv = M[i, j]
            M[i] /= piv
            b[i] /= piv
    missing = [i for i in range(m) if basis[i] < 0]
    n_art = len(missing)
    if n_art:
        art = np.zeros((m, n_art))
        for k, i in enumerate(missing):
            art[i, k] = 1.0
            basis[i] = M.shape[1] + k
        M = np.hstack([M, art])
    cost = np.zeros(M.shape[1])
    cost[:n] = p.c
    return M, b, cost, basis, n, n_art


def solve_lp(p: LpProblem, fixings: Mapping[int, float] | None = None) -> LpSolution:
    """Solve ``p`` to optimality, infeasibility or unboundedness."""
    if fixings:
        return solve_lp_fixed(p, fixings)
    if p.n_vars == 0:
        return _solve_empty(p)
    start = _phase1(p)
    if isinstance(start, LpSolution):
        return start
    return _phase2(p, p.c, *start)


def solve_lp_sequence(p: LpProblem, costs) -> list[LpSolution]:
    """Solve ``p`` once per cost vector, sharing one phase 1.

    Each solve starts from the optimal basis of the previous one, which is
    still feasible because only the objective changes.
    """
    costs = [np.asarray(c, dtype=float) for c in costs]
    if p.n_vars == 0:
        return [_solve_empty(p) for _ in costs]
    start = _phase1(p)
    if isinstance(start, LpSolution):
        return [start for _ in costs]
    out = []
    for c in costs:
        if c.shape != p.c.shape:
            raise ValueError("cost vector length does not match the problem")
        out.append(_phase2(p, c, *start))
    return out


def _phase1(p: LpProblem):
    """Feasible starting tableau, or an LpSolution reporting failure."""
    M, b, cost, basis, n_struct, n_art = _standard_form(p)
    m, ncol = M.shape
    tab = _Tableau(M, b, basis, n_art)
    bland_after = 5 * (m + ncol)
    max_iter = 50 * (m + ncol) + 1000
    art_start = ncol - n_art
    if n_art:
        phase1 = np.zeros(ncol)
        phase1[art_start:] = 1.0
        allowed = np.ones(ncol, dtype=bool)
        status = tab.run(phase1, allowed, max_iter, bland_after)
        if status == "iterations":
            return LpSolution(LpStatus.NUMERIC_FAILURE, iterations=tab.iterations,
                              message="iteration limit in phase 1")
        infeas = float(phase1[tab.basis] @ tab.T[:, -1])
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
        # Drive zero-level artificials out, dropping redundant rows.
        keep = []
        for r in range(m):
            if tab.basis[r] < art_start:
                keep.append(r)
                continue
            row = tab.T[r, :art_start]
            cand = np.flatnonzero(np.abs(row) > 1e-7)
            if cand.size:
                q = int(cand[np.argmax(np.abs(row[cand]))])
                tab.pivot(r, q)
                keep.append(r)
        if len(keep) < m:
            tab.T = tab.T[keep]
            tab.basis = [tab.basis[r] for r in keep]
            M = M[keep]
            b = b[keep]
        tab.T = np.hstack([tab.T[:, :art_start], tab.T[:, -1:]])
        tab.n_cols = art_start
        M = M[:, :art_start]
    return tab, M, b, n_struct, max_iter, bland_after


def _phase2(p, c, tab, M, b, n_struct, max_iter, bland_after) -> LpSolution:
    ncol = tab.n_cols
    cost = np.zeros(ncol)
    cost[:n_struct] = c
    allowed = np.ones(ncol, dtype=bool)
    tab.degenerate = 0
    status = tab.run(cost, allowed, max_iter + tab.iterations, bland_after)
    if status == "iterations":
        return LpSolution(LpStatus.NUMERIC_FAILURE, iterations=tab.iterations,
                          message="iteration limit in phase 2")
    if status == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    xs = np.zeros(ncol)
    xs[tab.basis] = tab.T[:, -1]
    x = np.clip(xs[:n_struct], 0.0, None)
    x = np.minimum(x, p.upper)
    resid = p.A @ x - p.rhs
    viol = 0.0
    for i, s in enumerate(p.senses):
        if s == LE:
            viol = max(viol, resid[i])
        elif s == GE:
            viol = max(viol, -resid[i])
        else:
            viol = max(viol, abs(resid[i]))
    if viol > FEAS_TOL:
        x, viol = _refine(p, M, b, tab.basis, n_struct)
        if viol > FEAS_TOL:
            return LpSolution(LpStatus.NUMERIC_FAILURE, x=x, iterations=tab.iterations,
                              message=f"row violation {viol:.3g} after solve")
    return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(c @ x),
                      iterations=tab.iterations, basis=list(tab.basis))


def _solve_empty(p: LpProblem) -> LpSolution:
    senses = np.asarray(p.senses)
    r = -p.rhs
    ok = np.all(r[senses == LE] <= FEAS_TOL) and np.all(r[senses == GE] >= -FEAS_TOL) \
        and np.all(np.abs(r[senses == EQ]) <= FEAS_TOL)
    if not ok:
        return LpSolution(LpStatus.INFEASIBLE)
    return LpSolution(LpStatus.OPTIMAL, x=np.zeros(0), objective=0.0)


def _refine(p, M, b, basis, n_struct):
    """Recompute basic values from the original data for a final basis."""
    B = M[: len(basis)][:, basis] if M.shape[0] == len(basis) else None
    if B is None:
        return np.zeros(n_struct), np.inf
    try:
        xb = np.linalg.solve(B, b[: len(basis)])
    except np.linalg.LinAlgError:
        return np.zeros(n_struct), np.inf
    xs = np.zeros(M.shape[1])
    xs[basis] = xb
    x = np.minimum(np.clip(xs[:n_struct], 0.0, None), p.upper)
    resid = p.A @ x - p.rhs
    senses = np.asarray(p.senses)
    viol = np.concatenate([resid[senses == LE], -resid[senses == GE],
                           np.abs(resid[senses == EQ]), [0.0]])
    return x, float(viol.max())


def solve_lp_fixed(p: LpProblem, fixings: Mapping[int, float]) -> LpSolution:
    """Solve ``p`` with some variables pinned to given values.

    Fixed columns are substituted out, so the reduced problem is smaller
    than ``p``. The returned primal vector is in the original column space.
    """
    if not fixings:
        return solve_lp(p)
    idx = np.array(sorted(fixings), dtype=int)
    vals = np.array([float(fixings[j]) for j in idx])
    if np.any(vals < -FEAS_TOL) or np.any(vals > p.upper[idx] + FEAS_TOL):
        raise ValueError("fixed value outside variable bounds")
    free = np.setdiff1d(np.arange(p.n_vars), idx)
    sub = LpProblem(
        c=p.c[free],
        A=p.A[:, free],
        senses=p.senses,
        rhs=p.rhs - p.A[:, idx] @ vals,
        upper=p.upper[free],
    )
    sol = solve_lp(sub)
    if not sol.optimal:
        return LpSolution(sol.status, iterations=sol.iterations, message=sol.message)
    x = np.zeros(p.n_vars)
    x[free] = sol.x
    x[idx] = vals
    return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(p.c @ x),
                      iterations=sol.iterations)
