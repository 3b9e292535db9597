"""Least-squares fits via the normal equations, and exact encoding sizes."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction

import numpy as np

SINGULAR_RTOL = 1e-10


class SingularSystemError(np.linalg.LinAlgError):
    """The design matrix for a subset is rank deficient."""

    def __init__(self, subset, msg="rank-deficient design"):
        self.subset = tuple(subset)
        super().__init__(f"{msg} for subset {list(self.subset)}")


def pivoted_cholesky(G: np.ndarray, rtol: float = SINGULAR_RTOL):
    """Cholesky factor of a symmetric PSD matrix with diagonal pivoting.

    Returns (L, perm, rank) with ``G[perm][:, perm] ~= L @ L.T`` on the
    leading ``rank`` block. Pivots below ``rtol * max(diag(G))`` stop the
    factorization.
    """
    G = np.array(G, dtype=float)
    k = G.shape[0]
    perm = np.arange(k)
    L = np.zeros_like(G)
    if k == 0:
        return L, perm, 0
    thresh = rtol * max(float(np.max(np.diag(G))), 0.0)
    d = np.diag(G).copy()
    for r in range(k):
        p = r + int(np.argmax(d[r:]))
        if d[p] <= thresh or d[p] <= 0.0:
            return L, perm, r
        if p != r:
            G[[r, p]] = G[[p, r]]
            G[:, [r, p]] = G[:, [p, r]]
            L[[r, p]] = L[[p, r]]
            d[[r, p]] = d[[p, r]]
            perm[[r, p]] = perm[[p, r]]
        L[r, r] = math.sqrt(d[r])
        if r + 1 < k:
            L[r + 1:, r] = (G[r + 1:, r] - L[r + 1:, :r] @ L[r, :r]) / L[r, r]
            d[r + 1:] -= L[r + 1:, r] ** 2
    return L, perm, k


def solve_normal_equations(inst, subset):
    """Least-squares fit of ``b`` on an intercept plus the columns in ``subset``.

    Columns are centred before forming the Gram matrix, which keeps the
    intercept out of the factorization. Returns (coefficients, intercept, sse).
    """
    S = sorted(subset)
    b = inst.b
    b_bar = float(b.mean())
    if not S:
        r = b - b_bar
        return np.zeros(0), b_bar, float(r @ r)
    X = inst.a[:, S]
    x_bar = X.mean(axis=0)
    Xc = X - x_bar
    bc = b - b_bar
    if len(S) + 1 > inst.n:
        raise SingularSystemError(S, "more parameters than observations")
    G = Xc.T @ Xc
    L, perm, rank = pivoted_cholesky(G)
    if rank < len(S):
        raise SingularSystemError(S)
    rhs = (Xc.T @ bc)[perm]
    w = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    coef = np.empty(len(S))
    coef[perm] = w
    intercept = b_bar - float(x_bar @ coef)
    r = X @ coef + intercept - b
    return coef, intercept, float(r @ r)


def min_sse(inst, columns) -> float:
    """Smallest achievable SSE over the span of ``columns`` plus intercept.

    Rank-tolerant (uses an SVD-based least-squares solve), so it is safe to
    call for any column set, including ones with more columns than rows.
    """
    S = sorted(columns)
    bc = inst.b - inst.b.mean()
    if not S:
        return float(bc @ bc)
    Xc = inst.a[:, S] - inst.a[:, S].mean(axis=0)
    coef, *_ = np.linalg.lstsq(Xc, bc, rcond=None)
    r = Xc @ coef - bc
    return max(float(r @ r), 0.0)


# --- exact encoding sizes -------------------------------------------------

def to_rational(v) -> Fraction:
    """Exact rational for a number, reading floats as their shortest decimal."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(Decimal(repr(float(v))))


def _ceil_log2(k: int) -> int:
    # ceil(log2(k)) for integer k >= 1
    return (k - 1).bit_length()


def size_of(r) -> int:
    """Binary encoding size of a rational scalar, vector or square matrix.

    scalar: ``1 + ceil(log2(|num|+1)) + ceil(log2(den+1))``;
    vector: sum of entry sizes; matrix (k x k): ``k**2`` plus entry sizes.
    """
    if isinstance(r, np.ndarray) or isinstance(r, (list, tuple)):
        arr = np.asarray(r, dtype=object)
        if arr.ndim == 1:
            return sum(size_of(v) for v in arr)
        if arr.ndim == 2:
            k = arr.shape[0]
            return k * k + sum(size_of(v) for v in arr.ravel())
        raise ValueError("size_of supports scalars, vectors and matrices")
    q = to_rational(r)
    return 1 + _ceil_log2(abs(q.numerator) + 1) + _ceil_log2(q.denominator + 1)


def exact_gram(inst):
    """``A = a^T a`` and ``B = a^T b`` computed in exact rational arithmetic."""
    a = [[to_rational(v) for v in row] for row in inst.a.T]
    b = [to_rational(v) for v in inst.b]
    m = len(a)
    A = [[sum((x * y for x, y in zip(a[i], a[j])), Fraction(0)) for j in range(m)] for i in range(m)]
    B = [sum((x * y for x, y in zip(a[i], b)), Fraction(0)) for i in range(m)]
    return A, B
