import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from regsubset.dataset import Instance
from regsubset.objectives import (CardinalityError, EvalCache, Kind, ObjectiveSpec, criterion,
                                  evaluate, fit, lad_fit, mae_0, mse_0)

from conftest import random_instance


def lad_oracle_pairs(x, b):
    """Brute-force LAD for one predictor: an optimum interpolates two points."""
    best = np.inf
    for i, j in itertools.combinations(range(len(b)), 2):
        if x[i] == x[j]:
            continue
        s = (b[j] - b[i]) / (x[j] - x[i])
        best = min(best, float(np.abs(b - (b[i] + s * (x - x[i]))).sum()))
    return best


def test_p1_lad(p1):
    sol = lad_fit(p1, [0])
    assert sol.sae == pytest.approx(0.5)
    assert lad_oracle_pairs(p1.a[:, 0], p1.b) == pytest.approx(0.5)


def test_empty_lad_is_median(p1):
    sol = lad_fit(p1, [])
    assert sol.intercept == 2.0
    assert sol.sae == pytest.approx(3.0)


def test_exact_affine_fit_has_zero_sae():
    x = np.arange(6.0)
    inst = Instance(x[:, None], 2 * x - 1)
    assert lad_fit(inst, [0]).sae == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("kind, S, value", [
    (Kind.MAE, [0], 0.5), (Kind.MAE, [], 5 / 3),
    (Kind.MSE, [0], 1 / 6), (Kind.MSE, [], 7 / 3),
    (Kind.MAE_A, [0], 13 / 6), (Kind.MAE_A, [], 5 / 3),
    (Kind.MSE_A, [], 7 / 3), (Kind.MSE_A, [0], 1 / 6 + 7 / 3),
])
def test_p1_criteria(p1, kind, S, value):
    assert evaluate(p1, S, ObjectiveSpec(kind)) == pytest.approx(value, abs=1e-12)


def test_mean_and_variance_helpers():
    assert mae_0([1, 2, 4]) == pytest.approx(5 / 3)
    assert mse_0([1, 2, 4]) == pytest.approx(7 / 3)


def test_lambda_scales_penalty(p1):
    e1 = evaluate(p1, [0], ObjectiveSpec(Kind.MAE_A, 1.0))
    e2 = evaluate(p1, [0], ObjectiveSpec(Kind.MAE_A, 2.0))
    assert e2 - e1 == pytest.approx(5 / 3)


def test_cardinality_error(p1):
    inst = Instance(np.c_[p1.a, [0.0, 1.0, 0.0]], p1.b)
    with pytest.raises(CardinalityError):
        fit(inst, [0, 1], ObjectiveSpec())
    with pytest.raises(CardinalityError):
        criterion(1.0, 2, 3, ObjectiveSpec(), 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        ObjectiveSpec(Kind.MAE, 0.0)
    assert ObjectiveSpec("mse-a").kind is Kind.MSE_A
    with pytest.raises(ValueError):
        Kind.parse("rmse")


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(5, 15), p=st.integers(1, 3))
def test_lad_matches_scipy(seed, n, p):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, p)
    X = np.column_stack([np.ones(n), inst.a])
    k = X.shape[1]
    c = np.r_[np.zeros(k), np.ones(2 * n)]
    A = np.hstack([X, np.eye(n), -np.eye(n)])
    ref = linprog(c, A_eq=A, b_eq=inst.b, bounds=[(None, None)] * k + [(0, None)] * 2 * n,
                  method="highs")
    assert lad_fit(inst, range(p)).sae == pytest.approx(ref.fun, rel=1e-7, abs=1e-9)


def test_lad_one_predictor_matches_pair_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        inst = random_instance(rng, 7, 1)
        assert lad_fit(inst, [0]).sae == pytest.approx(lad_oracle_pairs(inst.a[:, 0], inst.b))


def test_cache_memoizes(p1):
    ev = EvalCache(p1, ObjectiveSpec())
    assert ev([0]) == ev((0,))
    assert (ev.hits, ev.misses, len(ev)) == (1, 1, 1)
    assert ev.error_sum([0]) == pytest.approx(0.5)


def test_to_dict_uses_names(p1):
    d = fit(p1, [0], ObjectiveSpec(Kind.MSE)).to_dict(p1.var_names)
    assert d["subset"] == ["x1"]
    assert d["coefficients"]["x1"] == pytest.approx(1.5)
