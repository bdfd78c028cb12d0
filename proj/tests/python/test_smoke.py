import math

import pytest

import rotacalc


def test_cf_roundtrip():
    assert rotacalc.cf_expand("0.7") == [1, 2, 3]
    assert rotacalc.cf_value([1, 2, 3]) == (7, 10)
    assert rotacalc.convergents([1, 1, 1])[-1] == (2, 3)


def test_derivative_mean_is_one():
    n = 2048
    total = sum(rotacalc.derivative(6.0, 0.3, k / n) for k in range(n)) / n
    assert total == pytest.approx(1.0, abs=1e-9)


def test_solve_t_hits_prefix():
    s = rotacalc.solve_t(6.0, [1, 1, 1, 1, 1, 1])
    assert s["verified_digits"] >= 6
    rho, err = rotacalc.rotation_number(6.0, s["t"], 200000)
    golden = (math.sqrt(5) - 1) / 2
    assert abs(rho - golden) < 0.02 + err


def test_plateau_is_symmetric_at_zero():
    lo, hi = rotacalc.plateau(5.0, "0/1")
    assert lo < 0 < hi
    assert lo == pytest.approx(-hi, rel=1e-9)


def test_growth_shape():
    g = rotacalc.growth(6.0, 0.1, 64, grid=256, refine_steps=0)
    assert g["n"] == list(range(1, 65))
    assert all(x >= 1 for x in g["gamma"])


def test_small_construction_and_resume():
    opts = dict(grid=128, q_budget=1000, c0_range=200, report_range=400, safety=1)
    one = rotacalc.construct(6.0, "2*n", 1, **opts)
    assert one["aborted"] is None
    assert len(one["stages"]) == 1
    assert one["stages"][0]["accepted"]["max_ratio"] < 1
    assert len(one["report"]["j"]) == 400
    again = rotacalc.resume(one["state"], 0)
    assert again["state"] == one["state"]


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        rotacalc.solve_t(2.0, [1, 1])
    with pytest.raises(ValueError):
        rotacalc.construct(6.0, "sqrt(n)", 1)
    with pytest.raises(ValueError):
        rotacalc.construct(6.0, "n", 1, bogus=3)
