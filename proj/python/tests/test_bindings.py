import math

import pytest

import ripe


def test_binomial_table_estimates():
    m = ripe.Model("binomial", n=10, r=0)
    assert m.parameter_names == ["theta"]
    assert ripe.estimate(m, "pc")["point"]["theta"] == pytest.approx(0.5 / 11, abs=1e-10)
    assert ripe.estimate(m, "d2")["point"]["theta"] == pytest.approx(0.0138365, abs=1e-6)
    lo, hi = ripe.region(m, "d3", 0.95)["intervals"][0]
    assert lo == 0.0
    assert hi == pytest.approx(0.171, abs=0.002)


def test_exponential_from_raw_data():
    m = ripe.Model("exponential", data=[0.5, 1.0, 0.3, 0.2])
    r = ripe.estimate(m, "d2")
    assert r["point"]["theta"] == pytest.approx(4 / 2.0)
    assert r["closed_form_used"]


def test_mc_evaluation_is_seeded():
    m = ripe.Model("exponential", n=10, t=6.08)
    a = ripe.estimate(m, "d3", evaluation="mc", mc_samples=20000, seed=4)
    b = ripe.estimate(m, "d3", evaluation="mc", mc_samples=20000, seed=4)
    assert a == b
    assert abs(a["point"]["theta"] - 1.569) < 0.05


def test_normal_region_is_a_grid():
    m = ripe.Model("normal", n=25, ybar=0.024, msd=1.077)
    r = ripe.region(m, "d3", 0.5)
    assert r["cells"] > 0
    assert abs(r["mass"] - 0.5) < 5e-3
    assert r["estimate"]["mu"] == pytest.approx(0.024, abs=1e-6)


def test_two_level_model():
    m = ripe.Model(
        "two-level",
        group_means=[28, 8, -3, 7, -1, 1, 18, 12],
        group_sigmas=[15, 10, 16, 11, 9, 11, 10, 18],
    )
    p = ripe.estimate(m, "d2")["point"]
    assert abs(p["mu"] - 7.9) < 0.3
    assert abs(p["sigma_alpha"] - 5.7) < 0.3


def test_kl_and_loss_curve():
    m = ripe.Model("normal", n=25, ybar=0.0, msd=1.0)
    assert m.kl([0.0, 1.0], [0.0, 1.0]) == 0.0
    assert m.kl([0.0, 1.0], [1.0, 1.0]) == pytest.approx(0.5)
    values, flags = ripe.loss_curve(ripe.Model("uniform", n=10, t=1.897), "d3", [[1.9], [2.0], [2.5]])
    assert all(math.isfinite(v) for v in values)
    assert flags == ["", "", ""]


def test_coverage():
    prof = ripe.binomial_coverage(10, "pc", 0.95)
    assert len(prof["theta"]) == 1001
    assert 0.9 < prof["average_coverage"] < 1.0
    cov, se = ripe.mc_coverage("exponential", [1.5], 10, "pc", 0.5, 400, seed=3)
    assert abs(cov - 0.5) < 4 * se


def test_errors_carry_codes():
    m = ripe.Model("uniform", n=10, t=1.897)
    with pytest.raises(ripe.RipeError) as info:
        ripe.estimate(m, "d1")
    assert info.value.code == "DIVERGENT_LOSS"
    with pytest.raises(ripe.RipeError) as info:
        ripe.Model("binomial", n=10)
    assert info.value.field == "r"
    with pytest.raises(ValueError):
        ripe.estimate(ripe.Model("binomial", n=10, r=2), "d7")
