"""Finite windows of reflection-symmetric planar lattices.

A lattice is given by its sites in the unit cell and a few generator edges;
everything else follows from invariance under the reflections in all
horizontal and vertical integer lines.  Windows are materialized eagerly
with dense row-major indexing so that the kernels can work on CSR arrays.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

__all__ = [
    "LatticeError", "OutOfWindow", "LatticeSpec", "LatticeGraph",
    "HalfPlaneRegion", "SymmetryOp", "PRESETS", "preset", "load_spec",
    "build_lattice", "matching_graph", "half_plane", "apply_symmetry",
    "reflection", "translation", "spin_flip",
]


class LatticeError(ValueError):
    """The lattice data violates one of the lattice axioms."""


class OutOfWindow(LookupError):
    """A symmetry image or a requested point is not a site of the window."""


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(1000)
    return Fraction(v)


def _pt(p) -> tuple[Fraction, Fraction]:
    return (_frac(p[0]), _frac(p[1]))


@dataclass(frozen=True)
class LatticeSpec:
    """Unit-cell description of an R-invariant lattice.

    ``cell_sites`` are all sites in the closed square ``[0, 1]^2``; the
    lattice is their orbit under the reflections in integer lines, i.e. under
    ``x -> (+-x1 + 2m, +-x2 + 2n)``.  ``cell_edges`` are generator pairs whose
    reflected and translated copies make up the neighbor relation.
    """

    name: str
    cell_sites: tuple
    cell_edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "cell_sites", tuple(_pt(p) for p in self.cell_sites))
        object.__setattr__(
            self, "cell_edges", tuple((_pt(p), _pt(q)) for p, q in self.cell_edges))

    @property
    def denominator(self) -> int:
        d = 1
        for p in self.cell_sites:
            for c in p:
                d = math.lcm(d, c.denominator)
        for e in self.cell_edges:
            for p in e:
                for c in p:
                    d = math.lcm(d, c.denominator)
        return d

    @property
    def max_edge_length(self) -> float:
        return max(math.dist(p, q) for p, q in self.cell_edges)

    def unit_translation_invariant(self) -> bool:
        """True if the lattice is also invariant under the unit shifts."""
        g = build_lattice(self, window=(-4, 4, -4, 4))
        pts = set(g.keys)
        d = g.scale
        for dx, dy in ((d, 0), (0, d)):
            for (x, y) in g.keys:
                img = (x + dx, y + dy)
                if abs(img[0]) <= 3 * d and abs(img[1]) <= 3 * d and img not in pts:
                    return False
        return True

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "cell_sites": [[str(c) for c in p] for p in self.cell_sites],
            "cell_edges": [[[str(c) for c in p], [str(c) for c in q]]
                           for p, q in self.cell_edges],
        }, indent=2)


def load_spec(path) -> LatticeSpec:
    """Read a LatticeSpec from a JSON file.

    Coordinates may be integers or rational strings such as ``"1/3"``.
    """
    data = json.loads(Path(path).read_text())
    unknown = set(data) - {"name", "cell_sites", "cell_edges"}
    if unknown:
        raise LatticeError(f"unknown keys in lattice spec: {sorted(unknown)}")
    spec = LatticeSpec(
        name=data.get("name", Path(path).stem),
        cell_sites=[tuple(p) for p in data["cell_sites"]],
        cell_edges=[(tuple(p), tuple(q)) for p, q in data["cell_edges"]],
    )
    validate_spec(spec)
    return spec


F = Fraction
PRESETS = {
    "square": LatticeSpec("square", [(0, 0), (1, 0), (0, 1), (1, 1)],
                         [((0, 0), (1, 0)), ((0, 1), (1, 1)),
                          ((0, 0), (0, 1)), ((1, 0), (1, 1))]),
    "square_shifted": LatticeSpec(
        "square_shifted", [(F(1, 2), F(1, 2))],
        [((F(-1, 2), F(1, 2)), (F(1, 2), F(1, 2))), ((F(1, 2), F(1, 2)), (F(3, 2), F(1, 2))),
         ((F(1, 2), F(-1, 2)), (F(1, 2), F(1, 2))), ((F(1, 2), F(1, 2)), (F(1, 2), F(3, 2)))]),
    "triangular": LatticeSpec(
        "triangular", [(1, 0), (0, 1)],
        [((-1, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 1), (2, 1))]),
    "honeycomb": LatticeSpec(
        "honeycomb", [(F(1, 3), 1), (F(2, 3), 0)],
        [((F(-1, 3), 1), (F(1, 3), 1)), ((F(1, 3), 1), (F(2, 3), 0)),
         ((F(2, 3), 0), (F(4, 3), 0))]),
    # honeycomb plus face centers joined to the west, north-east and
    # south-east corners, shifted by (-1/3, 0)
    "diced": LatticeSpec(
        "diced", [(1, 0), (0, 1), (F(1, 3), 0), (F(2, 3), 1)],
        [((F(1, 3), 0), (1, 0)), ((F(1, 3), 0), (0, 1)),
         ((F(2, 3), 1), (0, 1)), ((F(2, 3), 1), (1, 2)), ((F(2, 3), 1), (1, 0))]),
    # midpoints of honeycomb edges
    "kagome": LatticeSpec(
        "kagome", [(0, 1), (1, 0), (F(1, 2), F(1, 2))],
        [((0, 1), (F(1, 2), F(1, 2))), ((0, 1), (F(1, 2), F(3, 2))),
         ((F(1, 2), F(1, 2)), (F(1, 2), F(3, 2))), ((1, 0), (F(1, 2), F(1, 2))),
         ((F(1, 2), F(1, 2)), (F(1, 2), F(-1, 2))), ((1, 0), (F(1, 2), F(-1, 2)))]),
}


def preset(name: str) -> LatticeSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise LatticeError(
            f"unknown lattice preset {name!r}; choose from {sorted(PRESETS)}") from None


# --------------------------------------------------------------------------
# expansion of the cell data


def _orbit_points(spec, d, box):
    """Scaled integer sites of the lattice inside ``box`` (scaled ints)."""
    x0, x1, y0, y1 = box
    per = 2 * d
    pts = set()
    for c in spec.cell_sites:
        cx, cy = int(c[0] * d), int(c[1] * d)
        for sx, sy in product((1, -1), repeat=2):
            bx, by = sx * cx, sy * cy
            for mx in range(math.ceil((x0 - bx) / per), math.floor((x1 - bx) / per) + 1):
                for my in range(math.ceil((y0 - by) / per), math.floor((y1 - by) / per) + 1):
                    pts.add((bx + mx * per, by + my * per))
    return pts


def _orbit_edges(spec, d, box):
    x0, x1, y0, y1 = box
    per = 2 * d
    edges = set()
    for p, q in spec.cell_edges:
        px, py, qx, qy = (int(v * d) for v in (p[0], p[1], q[0], q[1]))
        for sx, sy in product((1, -1), repeat=2):
            a = (sx * px, sy * py)
            b = (sx * qx, sy * qy)
            lo_x, hi_x = min(a[0], b[0]), max(a[0], b[0])
            lo_y, hi_y = min(a[1], b[1]), max(a[1], b[1])
            for mx in range(math.ceil((x0 - lo_x) / per), math.floor((x1 - hi_x) / per) + 1):
                for my in range(math.ceil((y0 - lo_y) / per), math.floor((y1 - hi_y) / per) + 1):
                    u = (a[0] + mx * per, a[1] + my * per)
                    v = (b[0] + mx * per, b[1] + my * per)
                    if u != v:
                        edges.add((min(u, v), max(u, v)))
    return edges


def _segments_cross(a, b, c, d):
    """Do closed segments ab and cd share a point other than a common endpoint?"""
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (v > 0) - (v < 0)

    def on_seg(p, q, r):
        return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
                and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))

    shared = {a, b} & {c, d}
    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if shared:
        if len(shared) == 2:
            return False
        s = shared.pop()
        # a shared endpoint is fine unless the segments overlap collinearly
        p = a if s == b else b
        r = c if s == d else d
        if orient(s, p, r) != 0:
            return False
        return (p[0] - s[0]) * (r[0] - s[0]) + (p[1] - s[1]) * (r[1] - s[1]) > 0
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(a, b, c)) or (o2 == 0 and on_seg(a, b, d))
            or (o3 == 0 and on_seg(c, d, a)) or (o4 == 0 and on_seg(c, d, b)))


@lru_cache(maxsize=None)
def validate_spec(spec: LatticeSpec) -> None:
    """Check (L1)-(L4) on a patch of the expanded lattice; raise LatticeError."""
    d = spec.denominator
    r = 6 * d
    box = (-r, r, -r, r)
    pts = _orbit_points(spec, d, box)
    edges = _orbit_edges(spec, d, box)
    for u, v in edges:
        if u not in pts or v not in pts:
            raise LatticeError(f"{spec.name}: generator edge endpoint {u} or {v} is not a site")
    # (L4) planarity on the central patch
    inner = 3 * d
    local = [e for e in edges
             if all(abs(c) <= inner for p in e for c in p)]
    for i in range(len(local)):
        a, b = local[i]
        for j in range(i + 1, len(local)):
            c, dd = local[j]
            if _segments_cross(a, b, c, dd):
                raise LatticeError(
                    f"{spec.name}: edges {_unscale(a, d)}-{_unscale(b, d)} and "
                    f"{_unscale(c, d)}-{_unscale(dd, d)} cross (L4)")
    # (L3) connectivity of a window inside the patch
    adj = {p: [] for p in pts}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    core = [p for p in pts if abs(p[0]) <= 2 * d and abs(p[1]) <= 2 * d]
    seen = {core[0]}
    queue = deque([core[0]])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    if not all(p in seen for p in core):
        raise LatticeError(f"{spec.name}: lattice is not connected (L3)")


def _unscale(p, d):
    return (Fraction(p[0], d), Fraction(p[1], d))


# --------------------------------------------------------------------------
# the materialized window


@dataclass(eq=False)
class LatticeGraph:
    """A window of a planar lattice with plain and star (matching) adjacency.

    Sites are indexed row-major by ``(y, x)``.  Coordinates are kept as
    integers scaled by ``scale``; use :meth:`point` / :meth:`index` to go
    between indices and rational coordinates.
    """

    spec: LatticeSpec
    window: tuple
    scale: int
    keys: list                     # scaled integer coordinates per site
    coords: np.ndarray             # float coordinates, shape (n, 2)
    nbr_ptr: np.ndarray            # CSR plain adjacency, neighbors in ccw order
    nbr_idx: np.ndarray
    interior: np.ndarray           # all lattice neighbors lie in the window
    faces: list = field(default_factory=list)
    face_centers: list = field(default_factory=list)
    he_face: np.ndarray | None = None
    he_rev: np.ndarray | None = None
    star_ptr: np.ndarray | None = None
    star_idx: np.ndarray | None = None
    parity: np.ndarray | None = None
    _index: dict = field(default_factory=dict, repr=False)
    _he_pos: dict = field(default_factory=dict, repr=False)
    _full_nbrs: list = field(default_factory=list, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    # --- basic access
    @property
    def n_sites(self) -> int:
        return len(self.keys)

    @property
    def name(self) -> str:
        return self.spec.name

    def __len__(self):
        return len(self.keys)

    def point(self, i: int) -> tuple[Fraction, Fraction]:
        x, y = self.keys[i]
        return (Fraction(x, self.scale), Fraction(y, self.scale))

    def points(self, idx) -> list:
        return [self.point(int(i)) for i in idx]

    def index(self, p) -> int:
        q = _pt(p)
        key = (q[0] * self.scale, q[1] * self.scale)
        if key[0].denominator != 1 or key[1].denominator != 1:
            raise OutOfWindow(f"{p} is not a site of {self.name}")
        try:
            return self._index[(int(key[0]), int(key[1]))]
        except KeyError:
            raise OutOfWindow(f"{p} is not in the window") from None

    def has(self, p) -> bool:
        try:
            self.index(p)
        except OutOfWindow:
            return False
        return True

    def neighbors(self, i: int) -> np.ndarray:
        return self.nbr_idx[self.nbr_ptr[i]:self.nbr_ptr[i + 1]]

    def star_neighbors(self, i: int) -> np.ndarray:
        return self.star_idx[self.star_ptr[i]:self.star_ptr[i + 1]]

    def degree(self, i: int) -> int:
        return int(self.nbr_ptr[i + 1] - self.nbr_ptr[i])

    def lattice_neighbors(self, i: int) -> list:
        """Neighbor points in the infinite lattice (may lie outside the window)."""
        return [_unscale(k, self.scale) for k in self._full_nbrs[i]]

    def edges(self) -> np.ndarray:
        """Plain edges as an (m, 2) array with i < j."""
        if "edges" not in self._cache:
            src = np.repeat(np.arange(self.n_sites), np.diff(self.nbr_ptr))
            m = src < self.nbr_idx
            self._cache["edges"] = np.stack([src[m], self.nbr_idx[m]], axis=1).astype(np.int64)
        return self._cache["edges"]

    def adjacency(self, mode: str = "plain"):
        """CSR arrays ``(ptr, idx)`` for 'plain' or 'star' adjacency."""
        if mode == "plain":
            return self.nbr_ptr, self.nbr_idx
        if mode == "star":
            if self.star_ptr is None:
                matching_graph(self)
            return self.star_ptr, self.star_idx
        raise ValueError(f"adjacency must be 'plain' or 'star', got {mode!r}")

    @property
    def ring(self) -> np.ndarray:
        return ~self.interior

    @property
    def bipartite(self) -> bool:
        return self.parity is not None

    @property
    def epsilon(self) -> np.ndarray:
        """+1 on the even sublattice, -1 on the odd one."""
        if self.parity is None:
            raise LatticeError(f"{self.name} is not bipartite")
        return np.where(self.parity == 0, 1, -1).astype(np.int8)

    def raster_grid(self):
        """Map to a 2D array for snapshots: (rows, cols, row_of_site, col_of_site)."""
        xs = sorted({k[0] for k in self.keys})
        ys = sorted({k[1] for k in self.keys})
        cx = {v: i for i, v in enumerate(xs)}
        cy = {v: i for i, v in enumerate(ys)}
        col = np.array([cx[k[0]] for k in self.keys])
        row = np.array([len(ys) - 1 - cy[k[1]] for k in self.keys])
        return len(ys), len(xs), row, col

    def box(self, x0, x1, y0, y1) -> np.ndarray:
        """Boolean mask of sites with coordinates in the closed box."""
        s = self.scale
        c = np.array(self.keys, dtype=np.int64).reshape(-1, 2)
        return ((c[:, 0] >= x0 * s) & (c[:, 0] <= x1 * s)
                & (c[:, 1] >= y0 * s) & (c[:, 1] <= y1 * s))

    def nearest(self, p=(0, 0)) -> int:
        """Index of the site closest to ``p`` (ties broken by (y, x))."""
        d = np.hypot(self.coords[:, 0] - float(p[0]), self.coords[:, 1] - float(p[1]))
        best = np.flatnonzero(np.isclose(d, d.min()))
        return int(min(best, key=lambda i: (self.keys[i][1], self.keys[i][0])))

    def outer_layer(self, mask) -> np.ndarray:
        """Sites in ``mask`` with a plain lattice neighbor outside ``mask``.

        Neighbors outside the window count as outside.
        """
        mask = np.asarray(mask, dtype=bool)
        out = np.zeros(self.n_sites, dtype=bool)
        for i in np.flatnonzero(mask):
            if len(self._full_nbrs[i]) != self.degree(i):
                out[i] = True
                continue
            if not mask[self.neighbors(i)].all():
                out[i] = True
        return out

    def boundary_of(self, mask, mode: str = "plain") -> np.ndarray:
        """Outer boundary: sites not in ``mask`` adjacent to a site in ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        ptr, idx = self.adjacency(mode)
        out = np.zeros(self.n_sites, dtype=bool)
        src = np.repeat(np.arange(self.n_sites), np.diff(ptr))
        hit = mask[src] & ~mask[idx]
        out[idx[hit]] = True
        return out


def _window_box(window, L):
    if window is None:
        if L is None or L < 1:
            raise LatticeError("window radius L must be >= 1")
        window = (-L, L, -L, L)
    return tuple(_frac(v) for v in window)


def build_lattice(spec: LatticeSpec | str, L: int | None = None, window=None) -> LatticeGraph:
    """Materialize the sites with both coordinates in ``[-L, L]``.

    ``window`` may be given instead as ``(x0, x1, y0, y1)``.  Graphs are
    cached per (spec, window) and must be treated as read-only.
    """
    if isinstance(spec, str):
        spec = preset(spec)
    validate_spec(spec)
    return _build(spec, _window_box(window, L))


@lru_cache(maxsize=32)
def _build(spec, window):
    d = spec.denominator
    x0, x1, y0, y1 = (int(v * d) if (v * d).denominator == 1 else None for v in window)
    if None in (x0, x1, y0, y1):
        raise LatticeError("window bounds must be multiples of the lattice denominator")
    margin = int(math.ceil(spec.max_edge_length)) * d + d
    big = (x0 - margin, x1 + margin, y0 - margin, y1 + margin)
    pts = _orbit_points(spec, d, big)
    edges = _orbit_edges(spec, d, big)
    full = {p: [] for p in pts}
    for u, v in edges:
        full[u].append(v)
        full[v].append(u)

    keys = sorted((p for p in pts if x0 <= p[0] <= x1 and y0 <= p[1] <= y1),
                  key=lambda p: (p[1], p[0]))
    if not keys:
        raise LatticeError("window contains no sites")
    index = {k: i for i, k in enumerate(keys)}
    coords = np.array(keys, dtype=float) / d

    def in_full_box(q):
        return big[0] + margin // 2 <= q[0] <= big[1] - margin // 2 and \
            big[2] + margin // 2 <= q[1] <= big[3] - margin // 2

    # (L3) on the window plus margin
    seen = {keys[0]}
    queue = deque([keys[0]])
    while queue:
        u = queue.popleft()
        for v in full[u]:
            if v not in seen and in_full_box(v):
                seen.add(v)
                queue.append(v)
    if not all(k in seen for k in keys):
        raise LatticeError(f"{spec.name}: window graph is disconnected (L3)")

    nbr_lists = []
    full_nbrs = []
    for k in keys:
        ns = [v for v in full[k] if v in index]
        ns.sort(key=lambda v: math.atan2(v[1] - k[1], v[0] - k[0]))
        nbr_lists.append([index[v] for v in ns])
        full_nbrs.append(sorted(full[k]))
    ptr = np.zeros(len(keys) + 1, dtype=np.int32)
    ptr[1:] = np.cumsum([len(n) for n in nbr_lists])
    idx = np.array([j for n in nbr_lists for j in n], dtype=np.int32)
    interior = np.array([len(nbr_lists[i]) == len(full_nbrs[i]) for i in range(len(keys))])

    g = LatticeGraph(spec=spec, window=window, scale=d, keys=keys, coords=coords,
                     nbr_ptr=ptr, nbr_idx=idx, interior=interior,
                     _index=index, _full_nbrs=full_nbrs)
    g.faces = _faces(g)
    g.parity = _two_coloring(g, full, keys)
    matching_graph(g)
    return g


def _faces(g: LatticeGraph) -> list:
    """Bounded faces as ccw site cycles, from the rotation system.

    Also fills ``g.he_face`` (face left of each CSR half-edge, -1 for the
    outer face), ``g.he_rev`` (CSR position of the reverse half-edge) and
    ``g.face_centers`` (exact centroids as Fractions, scaled back).
    """
    n = g.n_sites
    ptr, idx = g.nbr_ptr, g.nbr_idx
    pos = {}
    for i in range(n):
        for k in range(ptr[i], ptr[i + 1]):
            pos[(i, int(idx[k]))] = k
    he_rev = np.array([pos[(int(idx[k]), i)] for i in range(n)
                       for k in range(ptr[i], ptr[i + 1])], dtype=np.int64)
    he_face = np.full(len(idx), -1, dtype=np.int64)
    visited = np.zeros(len(idx), dtype=bool)
    faces = []
    for start in range(len(idx)):
        if visited[start]:
            continue
        cycle, hes = [], []
        k = start
        while not visited[k]:
            visited[k] = True
            hes.append(k)
            rk = he_rev[k]
            v = int(idx[k])
            cycle.append(int(idx[rk]))
            # predecessor of u in the ccw order around v
            deg = ptr[v + 1] - ptr[v]
            j = rk - ptr[v]
            k = ptr[v] + (j - 1) % deg
        area = 0
        for a in range(len(cycle)):
            p = g.keys[cycle[a]]
            q = g.keys[cycle[(a + 1) % len(cycle)]]
            area += p[0] * q[1] - q[0] * p[1]
        if area > 0:
            he_face[hes] = len(faces)
            faces.append(tuple(cycle))
    g.he_rev = he_rev
    g.he_face = he_face
    g._he_pos = pos
    d = g.scale
    g.face_centers = [
        (Fraction(sum(g.keys[v][0] for v in f), d * len(f)),
         Fraction(sum(g.keys[v][1] for v in f), d * len(f))) for f in faces]
    return faces


def _two_coloring(g, full, keys):
    """Parity 0/1 per window site if the lattice is bipartite, else None.

    Colored on the expanded patch so the answer does not depend on the window
    rim; normalized so the site nearest the origin (ties by (y, x)) is even.
    """
    start = keys[g.nearest((0, 0))]
    color = {start: 0}
    queue = deque([start])
    limit = max(abs(v) for k in keys for v in k) + 4 * g.scale
    while queue:
        u = queue.popleft()
        for v in full[u]:
            if abs(v[0]) > limit or abs(v[1]) > limit or v not in full:
                continue
            if v not in color:
                color[v] = 1 - color[u]
                queue.append(v)
            elif color[v] == color[u]:
                return None
    if not all(k in color for k in keys):
        return None
    return np.array([color[k] for k in keys], dtype=np.int8)


def matching_graph(g: LatticeGraph) -> LatticeGraph:
    """Populate star adjacency: plain neighbors plus co-face pairs.

    Only complete bounded faces of the window contribute, so no spurious
    star edges appear along the rim.
    """
    n = g.n_sites
    star = [set(int(j) for j in g.neighbors(i)) for i in range(n)]
    for f in g.faces:
        for a in f:
            for b in f:
                if a != b:
                    star[a].add(b)
    lists = []
    for i in range(n):
        s = sorted(star[i], key=lambda j: math.atan2(g.coords[j][1] - g.coords[i][1],
                                                     g.coords[j][0] - g.coords[i][0]))
        lists.append(s)
    ptr = np.zeros(n + 1, dtype=np.int32)
    ptr[1:] = np.cumsum([len(s) for s in lists])
    g.star_ptr = ptr
    g.star_idx = np.array([j for s in lists for j in s], dtype=np.int32)
    return g


# --------------------------------------------------------------------------
# half-planes and symmetries


@dataclass(frozen=True)
class HalfPlaneRegion:
    side: str
    k: int
    sites: np.ndarray          # boolean mask over the window
    boundary_line: np.ndarray  # boolean mask: sites of pi with a neighbor outside pi

    def reflection(self) -> "SymmetryOp":
        """The reflection mapping this half-plane onto its conjugate."""
        return reflection("hor" if self.side in ("up", "down") else "vert", self.k)


_SIDES = ("up", "down", "left", "right")


def _in_half_plane(side, k, x, y):
    return {"up": y >= k, "down": y <= k, "right": x >= k, "left": x <= k}[side]


def half_plane(g: LatticeGraph, side: str, k: int = 0) -> HalfPlaneRegion:
    """Sites of ``g`` in the half-plane and its boundary line.

    The boundary line is ``{x in pi : x ~ y for some y not in pi}`` with the
    neighbor relation of the infinite lattice, so it need not be straight.
    """
    if side not in _SIDES:
        raise ValueError(f"side must be one of {_SIDES}")
    s = g.scale
    kk = k * s
    inside = np.array([_in_half_plane(side, kk, x, y) for x, y in g.keys], dtype=bool)
    if not inside.any():
        raise LatticeError(f"half-plane {side} k={k} misses the window")
    line = np.zeros_like(inside)
    for i in np.flatnonzero(inside):
        for v in g._full_nbrs[i]:
            if not _in_half_plane(side, kk, *v):
                line[i] = True
                break
    return HalfPlaneRegion(side=side, k=k, sites=inside, boundary_line=line)


@dataclass(frozen=True)
class SymmetryOp:
    """Reflection, translation, spin flip, or a composition (applied right to left).

    ``kind`` is one of 'hor', 'vert' (reflection in ``x2 = k`` resp.
    ``x1 = k``), 'shift' (by ``vector``), 'flip', 'compose'.
    """

    kind: str
    k: Fraction = Fraction(0)
    vector: tuple = (Fraction(0), Fraction(0))
    parts: tuple = ()

    def __matmul__(self, other: "SymmetryOp") -> "SymmetryOp":
        return SymmetryOp("compose", parts=(self, other))

    @property
    def flips_spins(self) -> bool:
        if self.kind == "flip":
            return True
        if self.kind == "compose":
            return sum(p.flips_spins for p in self.parts) % 2 == 1
        return False

    def map_point(self, p):
        x, y = _pt(p)
        if self.kind == "hor":
            return (x, 2 * self.k - y)
        if self.kind == "vert":
            return (2 * self.k - x, y)
        if self.kind == "shift":
            return (x + self.vector[0], y + self.vector[1])
        if self.kind == "flip":
            return (x, y)
        if self.kind == "compose":
            for part in reversed(self.parts):
                x, y = part.map_point((x, y))
            return (x, y)
        raise ValueError(f"unknown symmetry kind {self.kind!r}")


def reflection(axis: str, k=0) -> SymmetryOp:
    if axis not in ("hor", "vert"):
        raise ValueError("axis must be 'hor' or 'vert'")
    return SymmetryOp(axis, k=_frac(k))


def translation(vector) -> SymmetryOp:
    return SymmetryOp("shift", vector=_pt(vector))


def spin_flip() -> SymmetryOp:
    return SymmetryOp("flip")


def apply_symmetry(g: LatticeGraph, op: SymmetryOp, site):
    """Image of a site (given as a point) under ``op``; raises OutOfWindow."""
    img = op.map_point(site)
    if not g.has(img):
        raise OutOfWindow(f"image {img} of {site} is outside the window")
    return img


def index_map(g: LatticeGraph, op: SymmetryOp) -> np.ndarray:
    """Array ``m`` with ``m[i]`` the index of the image of site i, or -1."""
    key = ("imap", op)
    if key not in g._cache:
        out = np.full(g.n_sites, -1, dtype=np.int64)
        for i in range(g.n_sites):
            img = op.map_point(g.point(i))
            try:
                out[i] = g.index(img)
            except OutOfWindow:
                pass
        g._cache[key] = out
    return g._cache[key]
