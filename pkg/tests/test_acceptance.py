"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one PASS/FAIL line that is printed in the terminal
summary.  The statistical criteria share one Runner so that sample batches
(for example the plus-boundary window used by theta and the plus sea) are
drawn once.
"""
import json
import math
import time

import numpy as np
import pytest

from isingperc import experiments as ex
from isingperc import geometry as geo
from isingperc.lattice import build_lattice, half_plane
from isingperc.model import (Configuration, flip_model, min_conditional, preset_ferro,
                             preset_hardcore, validate_H1, validate_H2)
from isingperc.sampler import PLUS, BoundaryCondition, InvariantBreach, Sampler

from conftest import record
from oracles import (bfs_components, check_circuit_case, check_semicircuit_case, ferro_weights,
                     hardcore_weights, square_nbrs)
from test_geometry import _bichromatic, check_int_sigma, eden_semicircuit

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

BETA = 0.6
SEED = 1


@pytest.fixture(scope="module")
def runner():
    return ex.Runner()


@pytest.fixture(scope="module")
def theta(runner):
    b = ex.make_model("ferro", {"beta": BETA}, "square")
    return runner.theta(b, "square", 32, 400, SEED)


def _tv(samples, states, probs):
    idx = {s: k for k, s in enumerate(states)}
    counts = np.zeros(len(states))
    for s in samples:
        counts[idx[s]] += 1
    return 0.5 * np.abs(counts / len(samples) - probs).sum()


# 1 ------------------------------------------------------------------------

def test_c01_sampler_exactness():
    n = 100_000
    lines, ok = [], True
    g = build_lattice("square", 2)           # 3x3 free sites
    for beta in (0.3, 0.5, 0.8):
        s = Sampler(preset_ferro(beta), g, PLUS)
        states, p = ferro_weights(g, beta, s.boundary.astype(float), s.order)
        t = time.perf_counter()
        draws = [tuple(s.cftp(SEED, i).spins[s.order]) for i in range(n)]
        dt = time.perf_counter() - t
        d = _tv(draws, states, p)
        ok &= d <= 0.02 and dt < 120
        lines.append(f"ferro b={beta} TV={d:.4f} {dt:.0f}s")
    gh = build_lattice("square", window=(0, 3, 0, 4))   # 2x3 free sites
    for lam in (0.5, 2.0):
        raw = preset_hardcore(lam)
        vals = np.where(gh.interior, 0, -gh.epsilon).astype(int)   # empty ring
        s = Sampler(flip_model(raw, gh), gh, BoundaryCondition("custom", values=tuple(vals)))
        states, p = hardcore_weights(gh, lam, [], s.order)
        eps = gh.epsilon[s.order]
        t = time.perf_counter()
        draws = [tuple(int(v) for v in ((s.cftp(SEED, i).spins[s.order] * eps) > 0)) for i in range(n)]
        dt = time.perf_counter() - t
        d = _tv(draws, states, p)
        ok &= d <= 0.02 and dt < 120
        lines.append(f"hardcore l={lam} TV={d:.4f} {dt:.0f}s")
    record(1, ok, "; ".join(lines) + " (TV <= 0.02, < 120 s)")
    assert ok, lines


# 2 ------------------------------------------------------------------------

def test_c02_monotone_coupling():
    g = build_lattice("square", 16)
    s = Sampler(preset_ferro(BETA), g, PLUS)
    lo, hi = s.extreme(-1), s.extreme(1)
    violations = 0
    done = 0
    while done < 10_000:
        k = min(500, 10_000 - done)
        try:
            s._run_coupled(lo, hi, s.slots(SEED, 0, done + 1, k), check=True)
        except InvariantBreach:
            violations += 1
            break
        done += k
    violations += int(np.count_nonzero(lo > hi))
    record(2, violations == 0, f"{done} coupled sweeps at L=16, order violations = {violations}")
    assert violations == 0


# 3 ------------------------------------------------------------------------

def test_c03_delta_formulas():
    errs = []
    for beta in (0.2, 0.44, BETA, 0.8, 1.5):
        errs.append(abs(min_conditional(preset_ferro(beta), build_lattice("square", 3))
                        - 1 / (1 + math.exp(8 * beta))))
        errs.append(abs(min_conditional(preset_ferro(beta), build_lattice("triangular", 3))
                        - 1 / (1 + math.exp(12 * beta))))
    ok = max(errs) <= 1e-12
    record(3, ok, f"max |min_conditional - formula| = {max(errs):.2e} (<= 1e-12)")
    assert ok


# 4 ------------------------------------------------------------------------

def test_c04_geometry_oracles():
    rng = np.random.default_rng(SEED)
    g16 = build_lattice("square", window=(-8, 7, -8, 7))
    p16, s16 = square_nbrs(g16), square_nbrs(g16, star=True)
    mism = 0
    contour_bad = 0
    for _ in range(500):
        spins = np.where(rng.random(g16.n_sites) < rng.uniform(0.3, 0.7), 1, -1).astype(np.int8)
        c = Configuration(g16, spins)
        for sign in (1, -1):
            for adj, nb in (("plain", p16), ("star", s16)):
                got = {frozenset(g16.index(p) for p in cl)
                       for cl in geo.label_clusters(c, sign, adj).partition()}
                mism += got != bfs_components(spins == sign, nb)
        cr = [(g16.index(p), g16.index(m)) for ct in geo.trace_contours(c) for p, m in ct.crossings]
        contour_bad += len(cr) != len(set(cr)) or set(cr) != _bichromatic(g16, spins)

    g12 = build_lattice("square", window=(-6, 5, -6, 5))
    p12, s12 = square_nbrs(g12), square_nbrs(g12, star=True)
    hp = half_plane(g12, "up", 0)
    delta = np.zeros(g12.n_sites, dtype=bool)
    delta[g12.index((0, 0))] = True
    outcomes = {"circuit": [0, 0], "semicircuit": [0, 0]}
    failures = 0
    for t in range(10_000):
        spins = np.where(rng.random(g12.n_sites) < rng.uniform(0.2, 0.8), 1, -1).astype(np.int8)
        adj = ("star", "plain")[t % 2]
        try:
            found = check_circuit_case(g12, spins, 1, adj, delta, p12, s12)
            outcomes["circuit"][found] += 1
            found = check_semicircuit_case(g12, spins, 1, adj, hp, delta, p12, s12)
            outcomes["semicircuit"][found] += 1
        except AssertionError:
            failures += 1
        cr = [(g12.index(p), g12.index(m))
              for ct in geo.trace_contours(Configuration(g12, spins)) for p, m in ct.crossings]
        contour_bad += len(cr) != len(set(cr)) or set(cr) != _bichromatic(g12, spins)
    both = all(min(v) > 0 for v in outcomes.values())
    ok = mism == 0 and failures == 0 and contour_bad == 0 and both
    record(4, ok, f"labeling mismatches {mism}/2000, circuit/semicircuit mismatches "
                  f"{failures}/10000 (absent/present {outcomes}), contour identity failures "
                  f"{contour_bad}/10500")
    assert ok


# 5 ------------------------------------------------------------------------

def test_c05_int_sigma():
    g = build_lattice("square", 14)
    hp = half_plane(g, "up", 0)
    rng = np.random.default_rng(SEED)
    bad = 0
    sizes = []
    for _ in range(100):
        sc = eden_semicircuit(g, hp, rng, int(rng.integers(1, 80)))
        sizes.append(len(sc.sites))
        try:
            check_int_sigma(g, sc, hp)
        except AssertionError:
            bad += 1
    record(5, bad == 0, f"{100 - bad}/100 Eden semicircuits with R(Int)=Int and "
                        f"pi & boundary(Int) = sigma (arc lengths {min(sizes)}..{max(sizes)})")
    assert bad == 0


# 6 ------------------------------------------------------------------------

def test_c06_point_to_semicircuit(runner, theta):
    t = time.perf_counter()
    r = ex.exp_point_to_semicircuit(preset_ferro(BETA), "square", radius=8, n=1000, seed=SEED,
                                    theta=theta, runner=runner)
    dt = time.perf_counter() - t
    row = r.rows[0]
    ok = r.verdict == "pass" and dt < 600
    record(6, ok, f"estimate {row.estimate:.3f} +- {row.half_width:.3f} vs theta/2 = "
                  f"{row.bound:.3f} (theta_hat {theta.theta:.3f}, L=32 n=400); "
                  f"strict={r.notes['strict']}; {dt:.0f}s (+ theta run)")
    assert ok


# 7 ------------------------------------------------------------------------

def test_c07_plus_sea(runner):
    r = ex.exp_plus_sea(preset_ferro(BETA), "square", (16, 32), 400, SEED, runner=runner)
    f16, f32 = (x.estimate for x in r.rows if x.quantity == "minus_star_crossing")
    ctl = ex.control_plus_sea("square", (16, 32), 200, SEED)
    # both frequencies are typically exactly 0; "below" is read as not above
    c32 = next(x.estimate for x in ctl.rows if x.quantity == "minus_star_crossing" and x.L == 32)
    ok = f32 < 0.1 and f32 <= f16 and r.verdict == "pass" and ctl.verdict == "fail"
    record(7, ok, f"crossing freq L=16 {f16:.4f}, L=32 {f32:.4f} (< 0.1, <= L=16); "
                  f"beta=0 control verdict {ctl.verdict} (L=32 crossing freq {c32:.3f})")
    assert ok


# 8 ------------------------------------------------------------------------

def test_c08_duplicated_circuit(runner, theta):
    r = ex.exp_duplicated_circuit(preset_ferro(BETA), "square", (32,), 400, SEED, theta=theta,
                                  runner=runner)
    row = r.rows[0]
    ok = r.verdict == "pass"
    record(8, ok, f"<=* circuit freq {row.estimate:.3f} +- {row.half_width:.3f} vs "
                  f"(theta/4)^4 = {row.bound:.5f}; strict={r.notes['strict']}")
    assert ok


# 9 ------------------------------------------------------------------------

def test_c09_interface_fluctuation(runner):
    r = ex.exp_interface_fluctuation(preset_ferro(BETA), "square", (16, 32, 64), 300, SEED,
                                     runner=runner)
    cross = [x for x in r.rows if x.quantity == "interface_crossing"]
    steps = [x for x in r.rows if x.quantity == "d_step"]
    delta = 1 / (1 + math.exp(8 * BETA)) ** 4
    freqs = [x.estimate for x in cross]
    nondecr = all(b >= a for a, b in zip(freqs, freqs[1:]))
    step_ok = all(x.estimate >= delta for x in steps if x.n > 0) and any(x.n > 0 for x in steps)
    ok = nondecr and freqs[-1] >= 0.8 and step_ok
    record(9, ok, "crossing freq " + ", ".join(f"L={x.L}: {x.estimate:.3f}" for x in cross)
           + f" (non-decreasing, >= 0.8 at 64); d-step "
           + ", ".join(f"L={x.L}: {x.estimate:.3f} ({x.n} events)" for x in steps)
           + f" vs delta = {delta:.2e}; experiment verdict {r.verdict}")
    assert ok


# 10 -----------------------------------------------------------------------

def test_c10_determinism(tmp_path):
    from isingperc import cli
    plan = {"lattice": "square", "model": {"family": "ferro", "beta": BETA}, "seed": 7,
            "experiments": "all", "L": [8, 12], "samples": 30, "theta_L": 8, "theta_n": 30,
            "radius": 4}
    outs = []
    for name, extra in (("a", {}), ("b", {}), ("c", {"workers": 2})):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(dict(plan, **extra)))
        code = cli.main(["run", str(p), "--output", str(tmp_path / name)])
        assert code in (0, 1)
        outs.append((tmp_path / name / "results.csv").read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    record(10, ok, f"results.csv identical across two serial runs and a 2-worker run "
                   f"({len(outs[0])} bytes)")
    assert ok


# 11 -----------------------------------------------------------------------

CASES = [
    ("triangular", "ferro", {"beta": 0.8}, (True, True), (True, True)),
    ("honeycomb", "ferro", {"beta": 0.8}, (True, True), (True, True)),
    ("square_shifted", "staggered", {"beta": 0.6, "h": 0.1}, (True, True), (False, False)),
    ("square_shifted", "hardcore", {"lam": 4.0}, (True, True), (False, False)),
]


def test_c11_coverage():
    lines, ok = [], True
    for lattice, family, params, want_sampled, want_raw in CASES:
        t = time.perf_counter()
        res = ex.run_suite(family, params, lattice, SEED)
        dt = time.perf_counter() - t
        meta = res[0].notes["suite"]
        b = ex.make_model(family, params, lattice)
        g = build_lattice(lattice, 4)
        got_sampled = (bool(validate_H1(b.sampled)), bool(validate_H2(b.sampled, g)))
        got_raw = (bool(validate_H1(b.raw)), bool(validate_H2(b.raw, g)))
        complete = [r.experiment for r in res] == list(ex.SUITE_ORDER)
        good = complete and got_sampled == want_sampled and got_raw == want_raw and \
            (meta["H1"], meta["H2"]) == want_sampled
        ok &= good
        lines.append(f"{family}{params}@{lattice}: {len(res)} experiments, H1/H2 sampled "
                     f"{got_sampled} raw {got_raw}, {dt:.0f}s")
    record(11, ok, "; ".join(lines))
    assert ok
