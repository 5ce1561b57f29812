import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingperc.lattice import build_lattice
from isingperc.model import (INF, Configuration, InadmissibleContext, ModelError, SpinModel,
                             conditional_plus_probability, energy, flip_model, load_model,
                             min_conditional, preset_antiferro, preset_ferro, preset_hardcore,
                             preset_staggered, same_potentials, sublattice_flip, validate_H1,
                             validate_H2, violations)


def test_ferro_conditional_matches_formula():
    g = build_lattice("square", 3)
    m = preset_ferro(0.5)
    p = conditional_plus_probability(m, g, (0, 0), [1, 1, 1, -1])
    assert p == pytest.approx(1 / (1 + math.exp(-2 * 0.5 * 2)), abs=1e-15)


def test_conditional_accepts_dict():
    g = build_lattice("square", 3)
    m = preset_ferro(0.5)
    nb = g.lattice_neighbors(g.index((0, 0)))
    a = conditional_plus_probability(m, g, (0, 0), {q: 1 for q in nb})
    assert a == pytest.approx(1 / (1 + math.exp(-4.0)))


@pytest.mark.parametrize("beta", [0.1, 0.44, 0.6, 1.3])
def test_min_conditional_square_and_triangular(beta):
    sq = build_lattice("square", 3)
    tri = build_lattice("triangular", 3)
    assert abs(min_conditional(preset_ferro(beta), sq) - 1 / (1 + math.exp(8 * beta))) < 1e-12
    assert abs(min_conditional(preset_ferro(beta), tri) - 1 / (1 + math.exp(12 * beta))) < 1e-12


def test_h1_h2_presets():
    g = build_lattice("square", 4)
    assert validate_H1(preset_ferro(0.3))
    assert validate_H2(preset_ferro(0.3), g)
    assert not validate_H1(preset_antiferro(0.3))
    assert not validate_H1(preset_hardcore(4.0))


@pytest.mark.parametrize("lattice,holds", [("square_shifted", True), ("square", False)])
def test_h2_of_sublattice_models_depends_on_parity_swap(lattice, holds):
    # reflections must exchange the two sublattices
    g = build_lattice(lattice, 4)
    st_ = preset_staggered(0.6, 0.1, g)
    fl = flip_model(preset_hardcore(4.0), g)
    assert validate_H1(st_) and validate_H1(fl)
    assert bool(validate_H2(st_, g)) == holds
    assert bool(validate_H2(fl, g)) == holds
    assert not validate_H2(preset_hardcore(4.0), g)


def test_homogeneous_field_breaks_h2():
    g = build_lattice("square", 3)
    r = validate_H2(preset_antiferro(0.5, 0.2), g)
    assert not r and r.witness is not None


def test_ferro_requires_positive_beta():
    with pytest.raises(ModelError):
        preset_ferro(0.0)
    assert preset_ferro(0.0, force=True).params["beta"] == 0.0


def test_flip_is_involution():
    g = build_lattice("square", 3)
    hc = preset_hardcore(2.0)
    assert same_potentials(flip_model(flip_model(hc, g), g), hc, g)


def test_flip_requires_bipartite():
    with pytest.raises(ModelError):
        flip_model(preset_hardcore(2.0), build_lattice("triangular", 3))


def test_staggered_flip_is_antiferro_in_field():
    g = build_lattice("square", 3)
    assert same_potentials(flip_model(preset_staggered(0.6, 0.1, g), g),
                           preset_antiferro(0.6, 0.1), g)


@given(st.lists(st.sampled_from([-1, 1]), min_size=49, max_size=49))
def test_sublattice_flip_involution_and_energy(bits):
    g = build_lattice("square", 3)
    c = Configuration(g, np.array(bits))
    f = sublattice_flip(c)
    assert sublattice_flip(f) == c
    m = preset_antiferro(0.7, 0.2)
    fm = flip_model(m, g)
    assert energy(fm, f) == pytest.approx(energy(m, c))


def test_flip_of_all_plus_is_epsilon():
    g = build_lattice("honeycomb", 3)
    c = Configuration(g, np.ones(g.n_sites))
    assert np.array_equal(sublattice_flip(c).spins, g.epsilon)


def test_hardcore_inadmissible_context():
    g = build_lattice("square", 3)
    hc = preset_hardcore(2.0)
    assert conditional_plus_probability(hc, g, (0, 0), [1, -1, -1, -1]) == 0.0
    bad = SpinModel("bad", {None: (INF, 0.0, 0.0, INF)})
    with pytest.raises(InadmissibleContext):
        conditional_plus_probability(bad, g, (0, 0), [1, -1, -1, -1])


def test_violations_and_energy_inf():
    g = build_lattice("square", 1)
    s = -np.ones(g.n_sites)
    s[g.index((0, 0))] = 1
    s[g.index((1, 0))] = 1
    c = Configuration(g, s)
    hc = preset_hardcore(1.5)
    assert violations(hc, c) == [(g.index((0, 0)), g.index((1, 0)))] or len(violations(hc, c)) == 1
    assert energy(hc, c) is INF
    assert not c.admissible(hc)


def test_pair_tables_must_transpose():
    with pytest.raises(ModelError):
        SpinModel("x", {((0, 0), (1, 0)): (0, 1, 2, 3), ((1, 0), (-1, 0)): (0, 1, 2, 3)})


def test_model_json_roundtrip(tmp_path):
    g = build_lattice("square", 3)
    for m in (preset_ferro(0.4), preset_hardcore(2.0), flip_model(preset_hardcore(2.0), g),
              preset_staggered(0.6, 0.1, g)):
        p = tmp_path / "m.json"
        p.write_text(m.to_json())
        assert same_potentials(load_model(p), m, g)


def test_configuration_rejects_zero():
    g = build_lattice("square", 1)
    with pytest.raises(ValueError):
        Configuration(g, np.zeros(g.n_sites))


@given(st.data())
def test_h2_energy_conjugation(data):
    from isingperc.lattice import index_map, reflection
    g = build_lattice("square_shifted", 3)
    m = preset_staggered(0.6, 0.3, g)
    bits = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=g.n_sites,
                                       max_size=g.n_sites)))
    op = data.draw(st.sampled_from([reflection("vert", 0), reflection("hor", 0)]))
    imap = index_map(g, op)
    assert (imap >= 0).all()
    img = np.empty_like(bits)
    img[imap] = -bits
    assert energy(m, Configuration(g, img)) == pytest.approx(energy(m, Configuration(g, bits)))
