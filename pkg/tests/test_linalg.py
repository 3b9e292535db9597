import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regsubset.dataset import Instance
from regsubset.linalg import (SingularSystemError, exact_gram, min_sse, pivoted_cholesky,
                              size_of, solve_normal_equations)


def test_p1_normal_equations(p1):
    coef, y, sse = solve_normal_equations(p1, [0])
    assert coef[0] == pytest.approx(1.5)
    assert y == pytest.approx(-2 / 3)
    assert sse == pytest.approx(1 / 6)


def test_empty_subset(p1):
    coef, y, sse = solve_normal_equations(p1, [])
    assert coef.size == 0
    assert y == pytest.approx(7 / 3)
    assert sse == pytest.approx(float(np.sum((p1.b - 7 / 3) ** 2)))


def test_exact_fit():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(10, 3))
    inst = Instance(a, a @ [1.0, -2.0, 0.5] + 3.0)
    _, y, sse = solve_normal_equations(inst, [0, 1, 2])
    assert sse == pytest.approx(0.0, abs=1e-9)
    assert y == pytest.approx(3.0)


def test_singular_names_subset():
    a = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0], [4.0, 8.0]])
    inst = Instance(a, [1.0, 0.0, 2.0, 1.0])
    with pytest.raises(SingularSystemError, match=r"\[0, 1\]"):
        solve_normal_equations(inst, [0, 1])
    assert min_sse(inst, [0, 1]) == pytest.approx(solve_normal_equations(inst, [0])[2])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(6, 20), m=st.integers(1, 4))
def test_matches_lstsq(seed, n, m):
    rng = np.random.default_rng(seed)
    inst = Instance(rng.normal(size=(n, m)), rng.normal(size=n))
    coef, y, sse = solve_normal_equations(inst, range(m))
    X = np.column_stack([np.ones(n), inst.a])
    ref, *_ = np.linalg.lstsq(X, inst.b, rcond=None)
    np.testing.assert_allclose(np.r_[y, coef], ref, atol=1e-8)
    r = X @ ref - inst.b
    assert sse == pytest.approx(float(r @ r), rel=1e-8, abs=1e-10)
    # residuals orthogonal to the design
    res = inst.a @ coef + y - inst.b
    np.testing.assert_allclose(X.T @ res, 0.0, atol=1e-8)


def test_sse_monotone_in_subset():
    rng = np.random.default_rng(5)
    inst = Instance(rng.normal(size=(15, 5)), rng.normal(size=15))
    for S in itertools.combinations(range(5), 3):
        for j in set(range(5)) - set(S):
            assert min_sse(inst, S + (j,)) <= min_sse(inst, S) + 1e-10


def test_pivoted_cholesky_rank():
    v = np.array([[1.0, 2.0, 3.0]])
    L, perm, rank = pivoted_cholesky(v.T @ v)
    assert rank == 1
    G = np.array([[4.0, 2.0], [2.0, 3.0]])
    L, perm, rank = pivoted_cholesky(G)
    assert rank == 2
    np.testing.assert_allclose(L @ L.T, G[np.ix_(perm, perm)])


@pytest.mark.parametrize("r, size", [(2, 4), (4, 5), (0, 2), (-2, 4), (Fraction(1, 2), 4), (0.5, 4)])
def test_size_scalars(r, size):
    assert size_of(r) == size


def test_size_matrix_and_vector():
    assert size_of(np.array([[2]])) == 5
    assert size_of([4]) == 5
    assert size_of(np.array([[1, 0], [0, 1]])) == 4 + 3 + 2 + 2 + 3


def test_exact_gram():
    inst = Instance(np.array([[1.0], [1.0], [0.0]]), [2.0, 2.0, 0.0])
    A, B = exact_gram(inst)
    assert A == [[2]] and B == [4]
