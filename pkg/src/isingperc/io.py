"""Text grids, PGM snapshots and CSV export.

Grid files hold one window configuration as rows of ``+``/``-`` (``.``
where the raster has no site), top row first, after a header line that
names the lattice and window.  Results CSVs carry their schema version in
the first header column and are written to a temporary file that is then
renamed, so a reader never sees a partial file.
"""
from __future__ import annotations

import csv
import io as _io
import os
import tempfile
from fractions import Fraction

import numpy as np

from .lattice import build_lattice
from .model import Configuration

__all__ = [
    "GRID_MAGIC", "SCHEMA_VERSION", "CSV_COLUMNS", "write_grid", "read_grid", "format_grid",
    "render_pgm", "write_pgm", "read_pgm", "results_csv_text", "write_results_csv",
    "write_path_csv", "atomic_write",
]

GRID_MAGIC = "# isingperc-grid v1"
SCHEMA_VERSION = "1"
CSV_COLUMNS = ["schema_version", "experiment", "model", "lattice", "seed", "mode", "quantity",
               "L", "n", "estimate", "ci_lo", "ci_hi", "bound", "bound_formula", "verdict"]

PLUS_GRAY, MINUS_GRAY, EMPTY_GRAY, CONTOUR_GRAY = 255, 0, 200, 128


def atomic_write(path, data, binary: bool = False) -> None:
    """Write ``data`` next to ``path`` and rename it into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb" if binary else "w", newline="" if not binary else None) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# grids


def format_grid(c: Configuration) -> str:
    g = c.graph
    rows, cols, r, k = g.raster_grid()
    canvas = [["."] * cols for _ in range(rows)]
    for i in range(g.n_sites):
        canvas[r[i]][k[i]] = "+" if c.spins[i] > 0 else ("-" if c.spins[i] < 0 else "0")
    w = ",".join(str(Fraction(v)) for v in g.window)
    head = f"{GRID_MAGIC} lattice={g.spec.name} window={w} label={c.label or ''}"
    return head + "\n" + "\n".join("".join(row) for row in canvas) + "\n"


def write_grid(c: Configuration, path) -> None:
    atomic_write(path, format_grid(c))


def read_grid(path) -> Configuration:
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip()]
    if not lines or not lines[0].startswith(GRID_MAGIC):
        raise ValueError(f"{path}: not a grid file (missing '{GRID_MAGIC}' header)")
    fields = dict(tok.split("=", 1) for tok in lines[0][len(GRID_MAGIC):].split() if "=" in tok)
    try:
        window = tuple(Fraction(v) for v in fields["window"].split(","))
        g = build_lattice(fields["lattice"], window=window)
    except KeyError as e:
        raise ValueError(f"{path}: header lacks {e}") from None
    rows, cols, r, k = g.raster_grid()
    body = lines[1:]
    if len(body) != rows or any(len(b) != cols for b in body):
        raise ValueError(f"{path}: expected a {rows}x{cols} grid")
    spins = np.zeros(g.n_sites, dtype=np.int8)
    code = {"+": 1, "-": -1, "0": 0}
    for i in range(g.n_sites):
        ch = body[r[i]][k[i]]
        if ch not in code:
            raise ValueError(f"{path}: bad symbol {ch!r} at site {g.point(i)}")
        spins[i] = code[ch]
    return Configuration(g, spins, fields.get("label", ""))


# --------------------------------------------------------------------------
# snapshots


def render_pgm(c: Configuration, contours=(), unit: int = 8) -> np.ndarray:
    """Gray image of a configuration with optional contour overlays.

    Sites are squares of half a lattice unit: white for +1, black for -1.
    Contours are drawn as mid-gray polylines through their dual vertices.
    """
    g = c.graph
    s = g.scale
    keys = np.array(g.keys, dtype=np.int64).reshape(-1, 2)
    px = max(1, unit // s) if s > 1 else unit
    x0, y0 = keys[:, 0].min() - s, keys[:, 1].min() - s
    x1, y1 = keys[:, 0].max() + s, keys[:, 1].max() + s
    W = int((x1 - x0) * px) + 1
    H = int((y1 - y0) * px) + 1
    img = np.full((H, W), EMPTY_GRAY, dtype=np.uint8)
    half = max(1, (s * px) // 4)

    def to_px(x, y):
        return int(round((float(y1) - y) * px)), int(round((x - float(x0)) * px))

    for i in range(g.n_sites):
        r, q = to_px(keys[i, 0], keys[i, 1])
        val = PLUS_GRAY if c.spins[i] > 0 else (MINUS_GRAY if c.spins[i] < 0 else EMPTY_GRAY)
        img[max(0, r - half):r + half + 1, max(0, q - half):q + half + 1] = val
    for ct in contours:
        pts = [(float(vx) * s, float(vy) * s) for vx, vy in ct.vertices]
        if ct.closed and pts:
            pts = pts + pts[:1]
        for (ax, ay), (bx, by) in zip(pts, pts[1:]):
            ra, qa = to_px(ax, ay)
            rb, qb = to_px(bx, by)
            steps = max(abs(rb - ra), abs(qb - qa), 1)
            for t in range(steps + 1):
                rr = int(round(ra + (rb - ra) * t / steps))
                qq = int(round(qa + (qb - qa) * t / steps))
                if 0 <= rr < H and 0 <= qq < W:
                    img[rr, qq] = CONTOUR_GRAY
    return img


def write_pgm(img: np.ndarray, path) -> None:
    h, w = img.shape
    atomic_write(path, f"P5\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img, np.uint8).tobytes(),
                 binary=True)


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, mx = int(parts[1]), int(parts[2]), int(parts[3])
    if mx != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    return np.frombuffer(parts[4][:w * h], dtype=np.uint8).reshape(h, w)


# --------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float) or isinstance(v, np.floating):
        return format(float(v), ".10g")
    return str(v)


def results_csv_text(results) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for res in results:
        for r in res.rows:
            w.writerow([SCHEMA_VERSION, res.experiment, res.model, res.lattice, res.seed, res.mode,
                        r.quantity, r.L, r.n, _fmt(r.estimate), _fmt(r.ci_lo), _fmt(r.ci_hi),
                        _fmt(r.bound), res.bound_formula, r.verdict or res.verdict])
    return buf.getvalue()


def write_results_csv(results, path) -> None:
    atomic_write(path, results_csv_text(results))


def write_path_csv(points, path) -> None:
    """Ordered coordinate list (circuit, semicircuit or contour) as x,y rows."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for x, y in points:
        w.writerow([str(Fraction(x)), str(Fraction(y))])
    atomic_write(path, buf.getvalue())
