import json

import numpy as np
import pytest

from regsubset.dataset import (Instance, InstanceError, compute_stats, generate, generate_prefix,
                               load_csv, save_csv, sidecar_for)


def write(tmp_path, text, name="inst.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_shape(tmp_path):
    p = write(tmp_path, "b,x1,x2\n1,2,3\n4,5,6\n7,8,9\n1,0,1\n")
    inst = load_csv(p)
    assert (inst.n, inst.m) == (4, 2)
    assert inst.var_names == ["x1", "x2"]
    np.testing.assert_array_equal(inst.b, [1, 4, 7, 1])


def test_response_column_anywhere(tmp_path):
    inst = load_csv(write(tmp_path, "x1,b\n1,2\n2,3\n3,5\n"))
    np.testing.assert_array_equal(inst.b, [2, 3, 5])


def test_text_cell_reports_coordinates(tmp_path):
    p = write(tmp_path, "b,x1\n1,2\n3,oops\n5,6\n")
    with pytest.raises(InstanceError, match=r"row 3, column 2 \(x1\)"):
        load_csv(p)


@pytest.mark.parametrize("text, match", [
    ("x1,x2\n1,2\n3,4\n5,6\n", "no response"),
    ("b,x1,x1\n1,2,3\n1,2,3\n1,2,3\n", "duplicate"),
    ("b,x1\n1,2\n3\n5,6\n", "cells"),
    ("b,x1\n1,2\n3,4\n", "at least 3"),
    ("b,x1\n1,nan\n3,4\n5,6\n", "non-finite"),
    ("", "empty"),
])
def test_malformed(tmp_path, text, match):
    with pytest.raises(InstanceError, match=match):
        load_csv(write(tmp_path, text))


def test_roundtrip_exact(tmp_path):
    inst = generate(10, 25, 3)
    p = tmp_path / "g.csv"
    save_csv(inst, p, sidecar=sidecar_for(inst))
    back = load_csv(p)
    assert back == inst
    meta = json.loads(p.with_suffix(".json").read_text())
    assert meta["seed"] == 3 and meta["m"] == 10


def test_stats_small():
    s = compute_stats(Instance(np.zeros((3, 0)), [1.0, 2.0, 3.0]))
    assert (s.b_bar, s.t_max, s.mae_0) == pytest.approx((2.0, 2.0, 1.0))


def test_stats_p1(p1):
    s = compute_stats(p1)
    assert s.mae_0 == pytest.approx(5 / 3)
    assert s.t_max == pytest.approx(10 / 3)
    # full-model SAE 0.5 divided by n-1-m = 1
    assert s.sae_m == pytest.approx(0.5)
    assert s.mae_m == pytest.approx(0.5)
    assert s.mse_m == pytest.approx(1 / 6)


def test_stats_fat_has_no_full_model():
    inst = generate(10, 8, 0)
    s = compute_stats(inst)
    assert s.mae_m is None and s.mse_m is None


def test_generator_shape_and_groups():
    inst = generate(10, 50, 1)
    assert (inst.n, inst.m) == (50, 10)
    assert inst.meta["parents"] == [None, 0, 0, 0, 0, None, 5, 5, 5, 5]


def test_generator_deterministic():
    assert generate(10, 30, 9) == generate(10, 30, 9)
    assert not generate(10, 30, 9) == generate(10, 30, 10)


def test_generator_large_n_correlation():
    inst = generate(10, 10_000, 1)
    r = np.corrcoef(inst.a[:, 0], inst.b)[0, 1]
    assert 0.1 <= r <= 0.3


@pytest.mark.parametrize("m, n", [(7, 20), (0, 20), (10, 2)])
def test_generator_rejects(m, n):
    with pytest.raises(InstanceError):
        generate(m, n, 0)


def test_prefix_matches_full_generator():
    full = generate(15, 20, 4)
    part = generate_prefix(12, 20, 4)
    np.testing.assert_array_equal(part.a, full.a[:, :12])
    np.testing.assert_array_equal(part.b, full.b)
    assert part.meta["generated_m"] == 15
    assert generate_prefix(10, 20, 4) == generate(10, 20, 4)


def test_instance_validation():
    with pytest.raises(InstanceError):
        Instance(np.ones((3, 1)), np.ones(4))
    with pytest.raises(InstanceError):
        Instance(np.ones((3, 2)), np.ones(3), ["a", "a"])
    with pytest.raises(InstanceError):
        Instance(np.array([[np.inf], [1], [2]]), np.ones(3))


def test_fat_flag():
    assert Instance(np.ones((5, 3)), np.arange(5.0)).is_fat is False
    assert Instance(np.ones((5, 4)), np.arange(5.0)).is_fat is True
