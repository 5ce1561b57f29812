from fractions import Fraction as F

import numpy as np
import pytest

from isingperc.lattice import (LatticeError, LatticeSpec, OutOfWindow, PRESETS, apply_symmetry,
                               build_lattice, half_plane, index_map, load_spec, matching_graph,
                               preset, reflection, translation, validate_spec)


def interior_degrees(name, L=4):
    g = build_lattice(name, L)
    return sorted({g.degree(int(i)) for i in np.flatnonzero(g.interior)})


def test_square_counts():
    g = build_lattice("square", 2)
    assert g.n_sites == 25
    assert len(g.edges()) == 40


@pytest.mark.parametrize("name,degrees", [
    ("square", [4]), ("square_shifted", [4]), ("triangular", [6]), ("honeycomb", [3]),
    ("diced", [3, 6]), ("kagome", [4]),
])
def test_interior_degrees(name, degrees):
    assert interior_degrees(name) == degrees


@pytest.mark.parametrize("name,bip", [("square", True), ("square_shifted", True),
                                      ("triangular", False), ("honeycomb", True),
                                      ("diced", True), ("kagome", False)])
def test_bipartite(name, bip):
    assert build_lattice(name, 4).bipartite == bip


def test_every_preset_validates():
    for name in PRESETS:
        validate_spec(preset(name))


def test_square_star_adds_diagonals():
    g = build_lattice("square", 3)
    o = g.index((0, 0))
    plain = {g.point(int(j)) for j in g.neighbors(o)}
    star = {g.point(int(j)) for j in g.star_neighbors(o)}
    assert star - plain == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_triangular_self_matching():
    g = build_lattice("triangular", 4)
    for i in np.flatnonzero(g.interior):
        assert set(g.neighbors(int(i))) == set(g.star_neighbors(int(i)))


def test_honeycomb_hexagon_pairs_star_adjacent():
    g = build_lattice("honeycomb", 4)
    hexes = [f for f in g.faces if len(f) == 6]
    assert hexes
    for f in hexes[:5]:
        for a in f:
            assert set(f) - {a} <= set(int(j) for j in g.star_neighbors(a))
    m = matching_graph(g)
    assert m.n_sites == g.n_sites


def test_faces_square():
    g = build_lattice("square", 1)
    assert sorted(tuple(sorted(f)) for f in g.faces) == [(0, 1, 3, 4), (1, 2, 4, 5),
                                                           (3, 4, 6, 7), (4, 5, 7, 8)]


def test_half_plane_square():
    g = build_lattice("square", 3)
    hp = half_plane(g, "up", 0)
    line = {g.point(int(i)) for i in np.flatnonzero(hp.boundary_line)}
    assert line == {(F(x), F(0)) for x in range(-3, 4)}


def test_half_plane_triangular_right():
    g = build_lattice("triangular", 4)
    hp = half_plane(g, "right", 0)
    line = {g.point(int(i)) for i in np.flatnonzero(hp.boundary_line)}
    on_axis = {p for p in line if p[0] == 0}
    extra = line - on_axis
    assert on_axis and extra
    assert all(p[0] == 1 and p[1] % 2 == 0 for p in extra)


def test_half_plane_honeycomb_straight():
    g = build_lattice("honeycomb", 4)
    hp = half_plane(g, "up", 0)
    ys = {g.point(int(i))[1] for i in np.flatnonzero(hp.boundary_line)}
    assert len(ys) == 1


def test_reflection_example():
    g = build_lattice("square", 4)
    assert apply_symmetry(g, reflection("hor", 0), (3, 2)) == (3, -2)
    with pytest.raises(OutOfWindow):
        apply_symmetry(g, translation((9, 0)), (0, 0))


def test_honeycomb_vertical_reflection_preserves_edges():
    g = build_lattice("honeycomb", 3)
    R = reflection("vert", 0)
    assert apply_symmetry(g, R, (F(1, 3), F(1))) == (F(-1, 3), F(1))
    a, b = g.index((F(1, 3), F(1))), g.index((F(2, 3), F(0)))
    assert b in g.neighbors(a)
    ra, rb = g.index((F(-1, 3), F(1))), g.index((F(-2, 3), F(0)))
    assert rb in g.neighbors(ra)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_reflections_are_graph_automorphisms(name):
    g = build_lattice(name, 4)
    for op in (reflection("hor", 0), reflection("vert", 0), reflection("hor", 1)):
        imap = index_map(g, op)
        for a, b in g.edges():
            ia, ib = imap[a], imap[b]
            if ia >= 0 and ib >= 0:
                assert ib in g.neighbors(int(ia))


def test_index_roundtrip_and_ring():
    g = build_lattice("square", 2)
    for i in range(g.n_sites):
        assert g.index(g.point(i)) == i
    assert int(g.interior.sum()) == 9


def test_rejects_crossing_edges():
    bad = LatticeSpec("bad", ((F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1), F(1))),
                      (((F(0), F(0)), (F(1), F(1))), ((F(1), F(0)), (F(0), F(1))),
                       ((F(0), F(0)), (F(1), F(0))), ((F(0), F(0)), (F(0), F(1))),
                       ((F(0), F(1)), (F(1), F(1))), ((F(1), F(0)), (F(1), F(1)))))
    with pytest.raises(LatticeError):
        validate_spec(bad)


def test_spec_json_roundtrip(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(preset("honeycomb").to_json())
    assert load_spec(p) == preset("honeycomb")


def test_epsilon_origin_even():
    g = build_lattice("square", 3)
    assert g.epsilon[g.nearest((0, 0))] == 1
    a, b = g.edges()[0]
    assert g.epsilon[a] == -g.epsilon[b]
