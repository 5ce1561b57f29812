import math

import numpy as np
import pytest

from isingperc import experiments as ex
from isingperc import geometry as geo
from isingperc.lattice import build_lattice
from isingperc.model import preset_ferro


def test_lower_bound_verdict():
    assert ex.lower_bound_verdict(0.5, 0.05, 0.6) == ("pass", False)
    assert ex.lower_bound_verdict(0.8, 0.05, 0.6) == ("pass", True)
    assert ex.lower_bound_verdict(0.4, 0.05, 0.6)[0] == "fail"


def test_trend_within_noise():
    rows = [ex._row("q", 8, 50, 100), ex._row("q", 16, 45, 100)]
    assert ex.trend_ok(rows, "up")
    rows = [ex._row("q", 8, 90, 100), ex._row("q", 16, 10, 100)]
    assert not ex.trend_ok(rows, "up") and ex.trend_ok(rows, "down")


def test_unit_shift():
    sq = build_lattice("square", 4)
    assert ex.unit_shift(preset_ferro(0.5), sq) == 1
    b = ex.make_model("staggered", {"beta": 0.6, "h": 0.1}, "square_shifted")
    assert ex.unit_shift(b.sampled, build_lattice("square_shifted", 4)) == 2


def test_make_model_roles():
    b = ex.make_model("hardcore", {"lam": 4.0}, "square_shifted")
    assert b.flipped and b.raw.name.startswith("hardcore")
    with pytest.raises(ValueError):
        ex.make_model("hardcore", {"beta": 1.0}, "square_shifted")
    with pytest.raises((ValueError, KeyError)):
        ex.make_model("potts", {}, "square")


def test_d_step_counts():
    rows = np.arange(4)
    a = geo.InterfaceProfile(rows, np.array([2.0, 0.0, 0.0, np.nan]))
    b = geo.InterfaceProfile(rows, np.array([0.0, 0.0, 0.0, 0.0]))
    assert ex.d_step_counts(a, b, 1) == (2, 1)


def test_tv_distance():
    assert ex.tv_distance({"a": 1.0}, {"b": 1.0}) == pytest.approx(1.0)
    assert ex.tv_distance({"a": 0.5, "b": 0.5}, {"a": 0.5, "b": 0.5}) == 0.0


def test_theta_small_window_deterministic():
    m = preset_ferro(0.8)
    r1 = ex.exp_theta(m, "square", L=6, n=30, seed=4)
    r2 = ex.exp_theta(m, "square", L=6, n=30, seed=4)
    assert r1.to_dict() == r2.to_dict()
    assert 0.0 <= r1.rows[0].estimate <= 1.0


def test_plus_sea_and_control():
    r = ex.exp_plus_sea(preset_ferro(0.9), "square", (8, 12), 40, 1, core=2)
    assert r.verdict == "pass"
    ctl = ex.control_plus_sea("square", (8, 12), 60, 1)
    assert ctl.verdict == "fail"


def test_butterfly_control_fails():
    assert ex.control_butterfly_ground_state("square", 12).verdict == "fail"


def test_duplicated_opposite_control_fails():
    assert ex.control_duplicated_opposite(lattice="square", L=10, n=30).verdict == "fail"


def test_suite_small_ferro():
    res = ex.run_suite("ferro", {"beta": 0.8}, "square", 1,
                       ex.SuiteConfig(L_list=(6, 8), n=20, theta_L=6, theta_n=20, radius=4,
                                      n_semicircuit=30))
    assert [r.experiment for r in res] == list(ex.SUITE_ORDER)
    meta = res[0].notes["suite"]
    assert meta["H1"] and meta["H2"]
    assert math.isclose(meta["min_conditional"], 1 / (1 + math.exp(6.4)))


def test_run_experiment_unknown():
    with pytest.raises(KeyError):
        ex.run_experiment("nope", None, "square", 1, ex.Runner())


def test_runner_cache_prefix():
    R = ex.Runner()
    b = ex.make_model("ferro", {"beta": 0.5}, "square")
    g = build_lattice("square", 4)
    from isingperc.sampler import PLUS
    big = R.batch(b, g, PLUS, 6, 2)
    small = R.batch(b, g, PLUS, 3, 2)
    assert all(x is y for x, y in zip(big, small))


def test_semicircuit_window_all_lattices():
    for name in ("square", "triangular", "honeycomb"):
        g, hp, sigma, x, inner, bc = ex.semicircuit_window(name, 5)
        assert hp.sites[x] and inner[x]
