import itertools
import math

import numpy as np
import pytest

from regsubset.bigm import (AssumptionViolated, BigMError, BigMResult, Method, Validity,
                            check_size_usable, estimate_m, m_for_v, m_for_x_heuristic, m_for_x_lp,
                            m_for_x_size, penalty_constant, size_bound_log2)
from regsubset.dataset import Instance, InstanceStats, compute_stats, generate_prefix
from regsubset.linalg import solve_normal_equations
from regsubset.objectives import Kind, ObjectiveSpec, SubsetSolution, lad_fit

from conftest import random_instance


def stats(**kw):
    base = dict(b_bar=0.0, t_max=1.0, mae_0=1.0, mse_0=1.0, mae_m=None, mse_m=None,
                sae_m=None, sse_m=None)
    base.update(kw)
    return InstanceStats(**base)


def lp_validity_gap(inst, m_hat):
    """max over subset LAD fits with SAE <= T_max of |coef| - M."""
    t_max = float(np.abs(inst.b - inst.b.mean()).sum())
    worst = -np.inf
    for p in range(1, inst.m + 1):
        for S in itertools.combinations(range(inst.m), p):
            sol = lad_fit(inst, S)
            if sol.sae <= t_max:
                worst = max(worst, float(np.abs(sol.coef).max()) - m_hat)
    return worst


def test_m_for_v_examples():
    assert m_for_v(stats(mae_m=0.25), "thin") == 0.25
    assert m_for_v(stats(), "fat", n=30) == pytest.approx(29 / 28)
    assert m_for_v(stats(), "fat", u_heur=0.8, n=30) == pytest.approx(0.8 + 1 / 28)
    assert m_for_v(stats(mse_m=2.0), "thin", kind=Kind.MSE) == 2.0
    with pytest.raises(BigMError):
        m_for_v(stats(), "thin")


def test_penalty_constant(p1):
    assert penalty_constant(p1, ObjectiveSpec(Kind.MAE)) == 0.0
    assert penalty_constant(p1, ObjectiveSpec(Kind.MAE_A)) == pytest.approx(5 / 3)
    assert penalty_constant(p1, ObjectiveSpec(Kind.MSE_A, 2.0)) == pytest.approx(14 / 3)


def test_lp_bound_p1_reaches_slope(p1):
    res = m_for_x_lp(p1)
    assert res.m_x[0] >= 1.5
    assert res.validity is Validity.PROVEN
    assert lp_validity_gap(p1, res.m_x[0]) <= 1e-6


@pytest.mark.parametrize("eps", [0.3, 0.5, 0.7])
def test_lp_bound_valid_for_several_eps(eps):
    inst = generate_prefix(6, 15, 21)
    res = m_for_x_lp(inst, epsilon=eps)
    assert lp_validity_gap(inst, float(res.m_x.max())) <= 1e-6


def test_lp_bound_small_for_noise_response():
    rng = np.random.default_rng(2)
    inst = Instance(rng.normal(size=(30, 3)), rng.normal(scale=0.01, size=30))
    res = m_for_x_lp(inst)
    assert 0 < res.m_x.max() < 1.0
    assert lp_validity_gap(inst, float(res.m_x.max())) <= 1e-6


def test_lp_bound_random_instances():
    rng = np.random.default_rng(8)
    for _ in range(5):
        inst = random_instance(rng, 12, 4)
        assert lp_validity_gap(inst, float(m_for_x_lp(inst).m_x.max())) <= 1e-6


def test_lp_bound_rejects_exact_data():
    x = np.arange(5.0)
    with pytest.raises(AssumptionViolated):
        m_for_x_lp(Instance(x[:, None], 3 * x))


def test_lp_bound_thin_only():
    with pytest.raises(BigMError):
        m_for_x_lp(generate_prefix(10, 8, 0))


def test_size_bound_example():
    inst = Instance(np.array([[1.0], [1.0], [0.0]]), [2.0, 2.0, 0.0])
    assert size_bound_log2(inst) == (5, 5, 24)
    assert m_for_x_size(inst).m_x[0] == 2.0 ** 24


def test_size_bound_covers_ols():
    rng = np.random.default_rng(4)
    inst = Instance(np.round(rng.normal(size=(10, 4)), 2), np.round(rng.normal(size=10), 2))
    lg = m_for_x_size(inst).log2_m_x
    for p in range(1, 5):
        for S in itertools.combinations(range(4), p):
            coef, _, _ = solve_normal_equations(inst, S)
            assert np.log2(np.abs(coef).max()) <= lg


def test_size_bound_refused_when_huge():
    inst = generate_prefix(10, 30, 1)
    res = m_for_x_size(inst)
    assert res.log2_m_x > 300
    with pytest.raises(BigMError):
        check_size_usable(res)


def test_heuristic_bound():
    sol = SubsetSolution((0, 1, 2), np.array([1.5, -3.0, 0.2]), 0.0, np.zeros(3))
    assert m_for_x_heuristic(sol, 9.0).m_x[0] == 3.0
    sol = SubsetSolution((0,), np.array([-0.5]), 0.0, np.zeros(3))
    assert m_for_x_heuristic(sol, 9.0).m_x[0] == 0.5
    res = m_for_x_heuristic(SubsetSolution((), np.zeros(0), 0.0, np.zeros(3)), 9.0)
    assert res.m_x[0] == 9.0 and res.extra["fallback"]
    assert res.validity is Validity.HEURISTIC


def test_estimate_deterministic_and_above_mean():
    inst = generate_prefix(8, 7, 5)
    a = estimate_m(inst, samples=8, seed=3)
    b = estimate_m(inst, samples=8, seed=3)
    np.testing.assert_array_equal(a.m_x, b.m_x)
    assert a.validity is Validity.CONFIDENCE95
    assert np.all(a.m_x > 0)


def test_estimate_zero_variance_column():
    # only one way to pick the other columns: every draw is the same fit
    rng = np.random.default_rng(0)
    inst = Instance(rng.normal(size=(5, 3)), rng.normal(size=5))
    res = estimate_m(inst, samples=5)
    for k in range(3):
        cols = sorted({k} | {j for j in range(3) if j != k})
        direct = abs(lad_fit(inst, cols).coef[cols.index(k)])
        assert res.m_x[k] == pytest.approx(max(direct, 1e-9))


def test_result_validation():
    with pytest.raises(BigMError):
        BigMResult(np.array([0.0]), 1.0, Method.HEURISTIC)
    with pytest.raises(BigMError):
        BigMResult(np.array([1.0]), -1.0, Method.HEURISTIC)
    d = BigMResult(np.array([2.0]), 1.0, Method.LP_BASED).to_dict()
    assert d["validity"] == "Proven" and d["method"] == "LpBased"
