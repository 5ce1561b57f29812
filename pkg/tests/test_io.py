import numpy as np
import pytest
from hypothesis import given, strategies as st

from isingperc import io as iio
from isingperc import experiments as ex
from isingperc.geometry import trace_contours
from isingperc.lattice import build_lattice
from isingperc.model import Configuration


@pytest.mark.parametrize("name", ["square", "triangular", "honeycomb", "kagome"])
def test_grid_roundtrip(tmp_path, name):
    g = build_lattice(name, 3)
    rng = np.random.default_rng(0)
    c = Configuration(g, rng.choice(np.array([-1, 1], dtype=np.int8), g.n_sites), "x")
    p = tmp_path / "c.grid"
    iio.write_grid(c, p)
    back = iio.read_grid(p)
    assert back.graph is g and np.array_equal(back.spins, c.spins)


def test_grid_rejects_garbage(tmp_path):
    p = tmp_path / "bad.grid"
    p.write_text("hello\n")
    with pytest.raises(ValueError):
        iio.read_grid(p)


@given(st.lists(st.sampled_from([-1, 1]), min_size=25, max_size=25))
def test_pgm_roundtrip(bits):
    import tempfile, os
    g = build_lattice("square", 2)
    c = Configuration(g, np.array(bits))
    img = iio.render_pgm(c, trace_contours(c))
    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "a.pgm")
        iio.write_pgm(img, p)
        assert np.array_equal(iio.read_pgm(p), img)
    assert set(np.unique(img)) <= {0, 128, 200, 255}


def test_results_csv_columns(tmp_path):
    r = ex.ExperimentResult("exp_x", "m", "square", 1, "exact", [ex._row("q", 8, 3, 10, 0.1)],
                            "b", "pass", {})
    p = tmp_path / "r.csv"
    iio.write_results_csv([r], p)
    lines = p.read_text().splitlines()
    assert lines[0].split(",") == iio.CSV_COLUMNS
    assert lines[1].startswith(iio.SCHEMA_VERSION + ",exp_x,")


def test_atomic_write_leaves_no_temp(tmp_path):
    iio.atomic_write(tmp_path / "a.txt", "x")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]


def test_path_csv(tmp_path):
    iio.write_path_csv([(0, 1), (0.5, 2)], tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines() == ["x,y", "0,1", "1/2,2"]
