import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from regsubset.lp import LpProblem, LpStatus, solve_lp, solve_lp_fixed, solve_lp_sequence


def test_simple_bound():
    sol = solve_lp(LpProblem([-1.0], [[1.0]], ["<="], [2.0]))
    assert sol.status is LpStatus.OPTIMAL
    assert sol.x[0] == pytest.approx(2.0)
    assert sol.objective == pytest.approx(-2.0)


def test_infeasible():
    p = LpProblem([1.0], [[1.0], [1.0]], [">=", "<="], [1.0, 0.0])
    assert solve_lp(p).status is LpStatus.INFEASIBLE


def test_unbounded():
    p = LpProblem([-1.0, 0.0], [[1.0, -1.0]], ["<="], [1.0])
    assert solve_lp(p).status is LpStatus.UNBOUNDED


def test_upper_bounds_respected():
    p = LpProblem([-1.0, -1.0], [[1.0, 1.0]], ["<="], [10.0], upper=[3.0, 4.0])
    sol = solve_lp(p)
    assert sol.objective == pytest.approx(-7.0)
    assert np.all(sol.x <= [3.0, 4.0])


def test_fixing_substitutes_columns():
    p = LpProblem([1.0, 1.0], [[1.0, 1.0]], [">="], [2.0])
    sol = solve_lp_fixed(p, {0: 0.5})
    assert sol.x[0] == 0.5
    assert sol.objective == pytest.approx(2.0)
    sol = solve_lp_fixed(p, {0: 0.0, 1: 0.0})
    assert sol.status is LpStatus.INFEASIBLE


def test_fixing_outside_bounds_rejected():
    p = LpProblem([1.0], [[1.0]], ["<="], [1.0], upper=[1.0])
    with pytest.raises(ValueError):
        solve_lp_fixed(p, {0: 2.0})


def test_redundant_equalities():
    p = LpProblem([1.0, 2.0], [[1.0, 1.0], [2.0, 2.0]], ["=", "="], [1.0, 2.0])
    sol = solve_lp(p)
    assert sol.optimal and sol.objective == pytest.approx(1.0)


def test_degenerate_cycling_example():
    # Beale's classic cycling instance under Dantzig pricing
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A = np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]])
    sol = solve_lp(LpProblem(c, A, ["<="] * 3, [0.0, 0.0, 1.0]))
    assert sol.optimal
    assert sol.objective == pytest.approx(-0.05)


def test_invalid_input():
    with pytest.raises(ValueError):
        LpProblem([1.0], [[1.0]], ["<"], [1.0])
    with pytest.raises(ValueError):
        LpProblem([np.nan], [[1.0]], ["<="], [1.0])


def test_sequence_matches_independent_solves():
    rng = np.random.default_rng(3)
    A = rng.uniform(0.1, 1.0, size=(4, 6))
    p = LpProblem(np.zeros(6), A, ["<="] * 4, np.ones(4))
    costs = [-rng.uniform(size=6) for _ in range(5)]
    seq = solve_lp_sequence(p, costs)
    for c, s in zip(costs, seq):
        ref = solve_lp(LpProblem(c, A, ["<="] * 4, np.ones(4)))
        assert s.objective == pytest.approx(ref.objective, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), m=st.integers(1, 6), n=st.integers(1, 7))
def test_matches_scipy_on_random_lps(seed, m, n):
    rng = np.random.default_rng(seed)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    rhs = rng.integers(-2, 6, size=m).astype(float)
    senses = list(rng.choice(["<=", ">=", "="], size=m))
    c = rng.integers(-3, 4, size=n).astype(float)
    upper = np.where(rng.random(n) < 0.5, rng.integers(1, 5, size=n), np.inf)
    ours = solve_lp(LpProblem(c, A, senses, rhs, upper=upper))
    ub = [A[i] if s == "<=" else -A[i] for i, s in enumerate(senses) if s != "="]
    ubr = [rhs[i] if s == "<=" else -rhs[i] for i, s in enumerate(senses) if s != "="]
    eq = [A[i] for i, s in enumerate(senses) if s == "="]
    eqr = [rhs[i] for i, s in enumerate(senses) if s == "="]
    ref = linprog(c, A_ub=np.array(ub) if ub else None, b_ub=ubr or None,
                  A_eq=np.array(eq) if eq else None, b_eq=eqr or None,
                  bounds=[(0, None if not np.isfinite(u) else u) for u in upper], method="highs")
    expected = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}[ref.status]
    assert ours.status is expected
    if expected is LpStatus.OPTIMAL:
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
