"""Subset-selection criteria evaluated on explicit subsets.

Four criteria are supported, with ``p = |S|``:

* ``MAE   = SAE / (n-1-p)``
* ``MSE   = SSE / (n-1-p)``
* ``MAE_a = (SAE + lam * p/(n-2) * mae_0) / (n-1-p)``
* ``MSE_a = (SSE + lam * p/(n-2) * mse_0) / (n-1-p)``

SAE comes from a least-absolute-deviation fit (an LP), SSE from ordinary
least squares.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import SingularSystemError, min_sse, solve_normal_equations
from .lp import LpProblem, LpStatus, solve_lp


class Kind(enum.Enum):
    MAE = "MAE"
    MSE = "MSE"
    MAE_A = "MAE_a"
    MSE_A = "MSE_a"

    @property
    def absolute(self) -> bool:
        return self in (Kind.MAE, Kind.MAE_A)

    @property
    def adjusted(self) -> bool:
        return self in (Kind.MAE_A, Kind.MSE_A)

    @classmethod
    def parse(cls, s: str) -> "Kind":
        key = s.strip().lower().replace("-", "_")
        for k in cls:
            if k.value.lower() == key:
                return k
        raise ValueError(f"unknown objective {s!r}")


class CardinalityError(ValueError):
    """Subset too large for the criterion to be defined."""


class LadFailure(RuntimeError):
    """The LAD linear program did not solve."""


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: Kind = Kind.MAE
    lam: float = 1.0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", Kind.parse(self.kind))
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass
class SubsetSolution:
    """A fitted regression model on a subset of the predictors."""

    subset: tuple[int, ...]
    coef: np.ndarray
    intercept: float
    errors: np.ndarray
    objective: float = float("nan")
    provenance: str = ""
    sae: float = float("nan")
    sse: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return len(self.subset)

    def coefficients_full(self, m: int) -> np.ndarray:
        x = np.zeros(m)
        x[list(self.subset)] = self.coef
        return x

    def to_dict(self, var_names=None) -> dict:
        names = [var_names[j] for j in self.subset] if var_names else list(self.subset)
        return {
            "subset": names,
            "subset_idx": list(self.subset),
            "coefficients": dict(zip(map(str, names), map(float, self.coef))),
            "intercept": float(self.intercept),
            "objective": float(self.objective),
            "provenance": self.provenance,
        }


def mae_0(b) -> float:
    b = np.asarray(b, dtype=float)
    return float(np.abs(b - b.mean()).sum()) / (b.size - 1)


def mse_0(b) -> float:
    b = np.asarray(b, dtype=float)
    d = b - b.mean()
    return float(d @ d) / (b.size - 1)


def lad_lp(inst, subset) -> LpProblem:
    """LAD fit as an LP over ``[x+, x-, y+, y-, t+, t-]``."""
    S = sorted(subset)
    n, p = inst.n, len(S)
    X = inst.a[:, S]
    I = np.eye(n)
    A = np.hstack([X, -X, np.ones((n, 1)), -np.ones((n, 1)), -I, I])
    c = np.concatenate([np.zeros(2 * p + 2), np.ones(2 * n)])
    return LpProblem(c, A, ["="] * n, inst.b)


def lad_fit(inst, subset, provenance: str = "lad") -> SubsetSolution:
    """Coefficients minimizing the sum of absolute residuals on ``subset``."""
    S = tuple(sorted(subset))
    b = inst.b
    if not S:
        y = float(np.sort(b)[(b.size - 1) // 2])  # lower median
        t = y - b
        return SubsetSolution(S, np.zeros(0), y, t, provenance=provenance,
                              sae=float(np.abs(t).sum()))
    sol = solve_lp(lad_lp(inst, S))
    if sol.status is not LpStatus.OPTIMAL:
        raise LadFailure(f"LAD LP for subset {list(S)} ended with {sol.status.value}: {sol.message}")
    p = len(S)
    v = sol.x
    coef = v[:p] - v[p:2 * p]
    y = float(v[2 * p] - v[2 * p + 1])
    t = inst.a[:, list(S)] @ coef + y - b
    return SubsetSolution(S, coef, y, t, provenance=provenance, sae=float(np.abs(t).sum()))


def ols_fit(inst, subset, provenance: str = "ols") -> SubsetSolution:
    """Least-squares fit; falls back to a minimum-norm solve if singular."""
    S = tuple(sorted(subset))
    try:
        coef, y, _ = solve_normal_equations(inst, S)
    except SingularSystemError:
        X = inst.a[:, list(S)]
        xb = X.mean(axis=0)
        coef, *_ = np.linalg.lstsq(X - xb, inst.b - inst.b.mean(), rcond=None)
        y = float(inst.b.mean() - xb @ coef)
    t = inst.a[:, list(S)] @ coef + y - inst.b if S else y - inst.b
    return SubsetSolution(S, np.asarray(coef, dtype=float), float(y), t,
                          provenance=provenance, sse=float(t @ t))


def ols_sse(inst, subset) -> float:
    try:
        return solve_normal_equations(inst, subset)[2]
    except SingularSystemError:
        return min_sse(inst, subset)


def criterion(error_sum: float, p: int, n: int, spec: ObjectiveSpec, base: float) -> float:
    """Apply the criterion formula to a fitted error sum (SAE or SSE).

    ``base`` is mae_0 or mse_0; it only matters for the adjusted kinds.
    """
    if p > n - 2:
        raise CardinalityError(f"subset size {p} exceeds n-2 = {n - 2}")
    num = error_sum
    if spec.kind.adjusted:
        num += spec.lam * p / (n - 2) * base
    return num / (n - 1 - p)


def fit(inst, subset, spec: ObjectiveSpec, provenance: str = "evaluate") -> SubsetSolution:
    """Fit ``subset`` in the metric of ``spec`` and attach the criterion value."""
    S = tuple(sorted(subset))
    if len(S) > inst.n - 2:
        raise CardinalityError(f"subset size {len(S)} exceeds n-2 = {inst.n - 2}")
    if spec.kind.absolute:
        if S:
            sol = lad_fit(inst, S, provenance)
        else:
            # The empty model predicts the mean, so MAE(empty) = mae_0.
            t = inst.b.mean() - inst.b
            sol = SubsetSolution(S, np.zeros(0), float(inst.b.mean()), t,
                                 provenance=provenance, sae=float(np.abs(t).sum()))
        sol.objective = criterion(sol.sae, len(S), inst.n, spec, mae_0(inst.b))
    else:
        sol = ols_fit(inst, S, provenance)
        sol.objective = criterion(sol.sse, len(S), inst.n, spec, mse_0(inst.b))
    return sol


def evaluate(inst, subset, spec: ObjectiveSpec) -> float:
    """Criterion value of the best fit on ``subset`` (refit from scratch)."""
    return fit(inst, subset, spec).objective


class EvalCache:
    """Memoizes :func:`fit` by subset for one instance and spec."""

    def __init__(self, inst, spec: ObjectiveSpec):
        self.inst = inst
        self.spec = spec
        self._store: dict[frozenset, SubsetSolution] = {}
        self.hits = 0
        self.misses = 0

    def fit(self, subset) -> SubsetSolution:
        key = frozenset(subset)
        sol = self._store.get(key)
        if sol is None:
            self.misses += 1
            sol = fit(self.inst, key, self.spec)
            self._store[key] = sol
        else:
            self.hits += 1
        return sol

    def __call__(self, subset) -> float:
        return self.fit(subset).objective

    def error_sum(self, subset) -> float:
        """SAE or SSE of the fit, whichever the spec's metric is."""
        sol = self.fit(subset)
        return sol.sae if self.spec.kind.absolute else sol.sse

    def __len__(self):
        return len(self._store)
