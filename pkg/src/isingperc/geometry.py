"""Percolation geometry on finite windows.

Cluster labeling, surrounding circuits and half-plane semicircuits found by
duality, interiors, contours with their faces, Dobrushin interfaces and the
profile ``a_n``.  Everything here is deterministic.

Conventions.  A contour crosses every plain edge joining a +1 and a -1
site.  Inside a face the crossings are paired so that each maximal run of
-1 sites along the face border is cut off on its own, i.e. the curve bends
around the -1 spins: the -1 side of a contour is plain-connected and the +1
side star-connected.  Contours are oriented with the +1 side on the left.
Dual vertices are face centroids; where a crossed edge has no face on one
side (window rim), a terminal point mirrored across the edge is used.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .lattice import HalfPlaneRegion, LatticeGraph, OutOfWindow, half_plane, index_map

__all__ = [
    "GeometryError", "ClusterLabeling", "Circuit", "Semicircuit", "Contour",
    "InterfaceProfile", "label_members", "label_clusters", "connects",
    "find_surrounding_circuit", "find_semicircuit", "interior", "trace_contours",
    "open_interface", "interface_profile", "count_crossings", "leq_star_analysis",
    "butterfly_proxy", "region_boundary", "even_odd_inside", "component_containing",
    "anchored", "shift_spins", "wilson", "ThetaEstimate", "estimate_theta",
    "origin_connected_to_ring",
]


class GeometryError(RuntimeError):
    """A constructed object failed its own consistency check."""


def _dual(adjacency: str) -> str:
    if adjacency == "star":
        return "plain"
    if adjacency == "plain":
        return "star"
    raise ValueError(f"adjacency must be 'plain' or 'star', got {adjacency!r}")


def _mask(g, s) -> np.ndarray:
    """Coerce a boolean mask, index list or point list to a boolean mask."""
    if s is None:
        return np.zeros(g.n_sites, dtype=bool)
    if isinstance(s, np.ndarray) and s.dtype == bool:
        if s.shape != (g.n_sites,):
            raise ValueError("mask does not match the window")
        return s
    out = np.zeros(g.n_sites, dtype=bool)
    for x in s:
        if isinstance(x, (int, np.integer)):
            out[int(x)] = True
        else:
            out[g.index(x)] = True
    return out


# --------------------------------------------------------------------------
# labeling


def label_members(g: LatticeGraph, member, adjacency: str = "plain") -> np.ndarray:
    """Canonical cluster labels (smallest member index) of ``member``; -1 elsewhere."""
    ptr, idx = g.adjacency(adjacency)
    return _kernels.label(np.ascontiguousarray(member, dtype=np.uint8), ptr, idx)


@dataclass
class ClusterLabeling:
    graph: LatticeGraph
    sign: int
    adjacency: str
    labels: np.ndarray
    sizes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.sizes:
            lab = self.labels[self.labels >= 0]
            ids, counts = np.unique(lab, return_counts=True)
            self.sizes = {int(i): int(c) for i, c in zip(ids, counts)}

    @property
    def n_clusters(self) -> int:
        return len(self.sizes)

    def cluster_of(self, site) -> int:
        i = site if isinstance(site, (int, np.integer)) else self.graph.index(site)
        return int(self.labels[int(i)])

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def partition(self) -> set:
        """The clusters as a set of frozensets of point coordinates."""
        out = {}
        for i in np.flatnonzero(self.labels >= 0):
            out.setdefault(int(self.labels[i]), []).append(self.graph.keys[i])
        return {frozenset(v) for v in out.values()}


def label_clusters(c, sign: int, adjacency: str = "plain", mask=None) -> ClusterLabeling:
    """Clusters of the sites with spin ``sign`` (optionally within ``mask``)."""
    member = c.spins == sign
    if mask is not None:
        member &= _mask(c.graph, mask)
    return ClusterLabeling(c.graph, int(sign), adjacency,
                           label_members(c.graph, member, adjacency))


def connects(l: ClusterLabeling, A, B):
    """Does some cluster meet both A and B?  Returns ``(answer, witness label)``."""
    a = _mask(l.graph, A)
    b = _mask(l.graph, B)
    la = set(np.unique(l.labels[a & (l.labels >= 0)]).tolist())
    lb = np.unique(l.labels[b & (l.labels >= 0)]).tolist()
    common = sorted(la.intersection(lb))
    if common:
        return True, int(common[0])
    return False, None


def anchored(labels: np.ndarray, A, B) -> np.ndarray:
    """Mask of sites whose cluster meets both A and B."""
    la = np.unique(labels[A & (labels >= 0)])
    lb = np.unique(labels[B & (labels >= 0)])
    both = np.intersect1d(la, lb)
    return np.isin(labels, both) & (labels >= 0)


def component_containing(g, allowed, seeds, adjacency="plain") -> np.ndarray:
    """Union of the clusters of ``allowed`` that contain a seed site."""
    labels = label_members(g, allowed, adjacency)
    ids = np.unique(labels[seeds & allowed])
    ids = ids[ids >= 0]
    return np.isin(labels, ids) & allowed


def region_boundary(g, region, adjacency="plain") -> np.ndarray:
    """Sites outside ``region`` adjacent to it."""
    return g.boundary_of(region, adjacency)


def _touching(g, region, target, adjacency):
    """Sites of ``region`` equal to or adjacent to a site of ``target``."""
    ptr, idx = g.adjacency(adjacency)
    src = np.repeat(np.arange(g.n_sites), np.diff(ptr))
    hit = np.zeros(g.n_sites, dtype=bool)
    hit[src[target[idx]]] = True
    return region & (hit | target)


# --------------------------------------------------------------------------
# contours


@dataclass
class Contour:
    """Dual curve through face centers.

    ``crossings`` lists the crossed edges as (plus site, minus site) in
    traversal order; ``vertices`` the dual points (one more than the number of
    crossings for open contours, equal for closed ones).
    """

    graph: LatticeGraph
    crossings: list
    vertices: list
    closed: bool
    plus_face: list
    minus_face: list

    @property
    def length(self) -> int:
        return len(self.crossings)

    def vertex_set(self, shift=(0, 0)) -> set:
        dx, dy = Fraction(shift[0]), Fraction(shift[1])
        return {(x + dx, y + dy) for x, y in self.vertices}

    def shifted(self, shift) -> "Contour":
        dx, dy = Fraction(shift[0]), Fraction(shift[1])
        return Contour(self.graph, self.crossings, [(x + dx, y + dy) for x, y in self.vertices],
                       self.closed, self.plus_face, self.minus_face)

    def points(self) -> list:
        return [(float(x), float(y)) for x, y in self.vertices]

    def sites(self) -> set:
        return {p for p, _ in self.crossings} | {m for _, m in self.crossings}


def _face_cycle_pos(g):
    """For every half-edge on a bounded face, its position in the face cycle."""
    if "fpos" not in g._cache:
        fpos = np.full(len(g.nbr_idx), -1, dtype=np.int64)
        for k in range(len(g.nbr_idx)):
            f = g.he_face[k]
            if f < 0:
                continue
            src = int(g.nbr_idx[g.he_rev[k]])
            cyc = g.faces[f]
            # a site can occur twice on a face only for degenerate faces
            pos = [a for a, v in enumerate(cyc) if v == src
                   and cyc[(a + 1) % len(cyc)] == int(g.nbr_idx[k])]
            fpos[k] = pos[0]
        g._cache["fpos"] = fpos
    return g._cache["fpos"]


def _terminal(g, k):
    """Dual point beyond the rim for the crossing of half-edge k (+ -> -)."""
    p = int(g.nbr_idx[g.he_rev[k]])
    m = int(g.nbr_idx[k])
    s = g.scale
    px, py = g.keys[p]
    mx, my = g.keys[m]
    mid = (Fraction(px + mx, 2 * s), Fraction(py + my, 2 * s))
    other = g.he_face[g.he_rev[k]]
    fk = g.he_face[k]
    f = other if other >= 0 else fk
    if f >= 0:
        c = g.face_centers[f]
        return (2 * mid[0] - c[0], 2 * mid[1] - c[1])
    # no face on either side: offset by half the edge length, rotated
    return (mid[0] + Fraction(my - py, 2 * s), mid[1] + Fraction(px - mx, 2 * s))


def _crossing_list(g, spins):
    """CSR positions of half-edges going from a +1 site to a -1 site."""
    src = np.repeat(np.arange(g.n_sites), np.diff(g.nbr_ptr))
    return np.flatnonzero((spins[src] > 0) & (spins[g.nbr_idx] < 0))


def trace_contours(c, spins=None) -> list:
    """All contours of a window configuration.

    Every disagreement edge is crossed by exactly one contour; contours are
    closed or end at terminal points beyond the window rim.
    """
    g = c.graph if c is not None else None
    if spins is None:
        spins = c.spins
    return _trace(g, np.asarray(spins))


def _trace(g, spins):
    fpos = _face_cycle_pos(g)
    ks = _crossing_list(g, spins)
    ks_set = set(int(k) for k in ks)
    done = set()

    def step(k):
        """Follow crossing k into its face; return (next crossing, minus run, plus site)."""
        f = g.he_face[k]
        if f < 0:
            return None, [], None
        cyc = g.faces[f]
        n = len(cyc)
        a = (fpos[k] + 1) % n          # position of the minus site
        run = []
        while spins[cyc[a]] < 0:
            run.append(cyc[a])
            a = (a + 1) % n
        p2 = cyc[a]
        m2 = run[-1]
        # crossing (p2 -> m2); half-edge position from p2
        return g._he_pos[(p2, m2)], run, p2

    def walk(k0, closed_expected):
        crossings, verts, plus, minus = [], [], [], []
        k = k0
        if not closed_expected:
            verts.append(_terminal_start(k))
        while True:
            done.add(k)
            p = int(g.nbr_idx[g.he_rev[k]])
            m = int(g.nbr_idx[k])
            crossings.append((p, m))
            plus.append(p)
            f = g.he_face[k]
            if f < 0:
                minus.append(m)
                verts.append(_terminal(g, k))
                return crossings, verts, plus, minus, False
            verts.append(g.face_centers[f])
            nk, run, _ = step(k)
            minus.extend(run)
            if nk == k0:
                return crossings, verts, plus, minus, True
            if nk in done:
                raise GeometryError("contour walk revisited a crossing")
            k = nk

    def _terminal_start(k):
        # the crossing enters the window from a missing face on the far side
        p = int(g.nbr_idx[g.he_rev[k]])
        m = int(g.nbr_idx[k])
        s = g.scale
        px, py = g.keys[p]
        mx, my = g.keys[m]
        mid = (Fraction(px + mx, 2 * s), Fraction(py + my, 2 * s))
        f = g.he_face[k]
        if f >= 0:
            cc = g.face_centers[f]
            return (2 * mid[0] - cc[0], 2 * mid[1] - cc[1])
        return (mid[0] - Fraction(my - py, 2 * s), mid[1] - Fraction(px - mx, 2 * s))

    out = []
    # open contours start at crossings whose origin side has no face
    starts = [int(k) for k in ks if g.he_face[g.he_rev[k]] < 0]
    for k in starts:
        if k in done:
            continue
        cr, vs, pl, mi, closed = walk(k, False)
        out.append(Contour(g, _pts(g, cr), vs, closed, _dedupe(g, pl, False),
                           _dedupe(g, mi, False)))
    for k in ks:
        k = int(k)
        if k in done:
            continue
        cr, vs, pl, mi, closed = walk(k, True)
        if not closed:
            raise GeometryError("contour without a start reached the rim")
        vs = vs[:-1] if len(vs) > len(cr) else vs
        # vertices of a closed contour: the faces entered, one per crossing
        out.append(Contour(g, _pts(g, cr), vs, True, _dedupe(g, pl, True),
                           _dedupe(g, mi, True)))
    if len(done) != len(ks_set):
        raise GeometryError("some disagreement edges were not covered")
    return out


def _pts(g, crossings):
    return [(g.point(p), g.point(m)) for p, m in crossings]


def _dedupe(g, seq, cyclic):
    out = []
    for v in seq:
        if not out or out[-1] != v:
            out.append(v)
    if cyclic and len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return [g.point(v) for v in out]


def count_crossings(a: Contour, b: Contour, shift_b=(0, 0)) -> int:
    """Number of distinct dual vertices shared by two contours (touch or cross)."""
    return len(a.vertex_set() & b.vertex_set(shift_b))


# --------------------------------------------------------------------------
# circuits and semicircuits


@dataclass
class Circuit:
    """Ordered closed path of one sign; ``interior`` is the enclosed site mask."""

    graph: LatticeGraph
    sites: list
    adjacency: str
    interior: np.ndarray
    sign: int | None = None

    def points(self) -> list:
        return [self.graph.point(i) for i in self.sites]

    def site_set(self) -> set:
        return set(self.sites)


@dataclass
class Semicircuit:
    graph: LatticeGraph
    sites: list
    adjacency: str
    interior: np.ndarray
    halfplane: HalfPlaneRegion
    sign: int | None = None

    def points(self) -> list:
        return [self.graph.point(i) for i in self.sites]

    def site_set(self) -> set:
        return set(self.sites)


def _ordered_boundary(g, region, adjacency):
    """Closed boundary walk of a hole-free region, as a cyclic site list.

    For a star circuit the region is plain-connected and is traced as the -1
    side; its +1 face is the ordered star circuit.  For a plain circuit the
    region is star-connected and traced as the +1 side.
    """
    if adjacency == "star":
        spins = np.where(region, -1, 1).astype(np.int8)
    else:
        spins = np.where(region, 1, -1).astype(np.int8)
    contours = _trace(g, spins)
    ring = [ct for ct in contours
            if any(region[g.index(m if adjacency == "star" else p)] for p, m in ct.crossings)]
    if len(ring) != 1 or not ring[0].closed:
        raise GeometryError(f"region boundary splits into {len(ring)} contours")
    ct = ring[0]
    face = ct.plus_face if adjacency == "star" else ct.minus_face
    return [g.index(p) for p in face], ct


def even_odd_inside(polygon, points) -> np.ndarray:
    """Even-odd test of ``points`` (n, 2) against a closed polygon (m, 2).

    Uses a ray with an irrational slope so lattice points never hit vertices.
    Points on the polygon vertices must be excluded by the caller.
    """
    poly = np.asarray(polygon, dtype=float)
    pts = np.asarray(points, dtype=float)
    if len(poly) < 3 or len(pts) == 0:
        return np.zeros(len(pts), dtype=bool)
    # rotate so the ray is the +x axis in the rotated frame
    ang = math.atan(math.sqrt(2) / 7.0)
    ca, sa = math.cos(ang), math.sin(ang)
    rot = np.array([[ca, sa], [-sa, ca]])
    P = poly @ rot.T
    Q = pts @ rot.T
    a = P
    b = np.roll(P, -1, axis=0)
    inside = np.zeros(len(Q), dtype=bool)
    for (ax, ay), (bx, by) in zip(a, b):
        if ay == by:
            continue
        cond = (ay > Q[:, 1]) != (by > Q[:, 1])
        xint = ax + (Q[:, 1] - ay) * (bx - ax) / (by - ay)
        inside ^= cond & (Q[:, 0] < xint)
    return inside


def _enclosed(g, polygon_sites, exclude):
    coords = g.coords
    poly = coords[polygon_sites]
    inside = even_odd_inside(poly, coords)
    return inside & ~exclude


def _dual_region(g, member, delta, region, escape, adjacency):
    """Shared part of circuit and semicircuit search.

    Returns the plain (dual) component structure or None if a blocking
    opposite path exists.
    """
    dual = _dual(adjacency)
    non = region & ~member & ~delta
    lab = label_members(g, non, dual)
    touch = _touching(g, non, escape, dual)
    o_ids = np.unique(lab[touch])
    O = np.isin(lab, o_ids[o_ids >= 0]) & non
    if (_touching(g, O, delta, dual)).any():
        return None
    return O


def find_surrounding_circuit(c, sign: int | None = None, adjacency: str = "star",
                             delta=None, lam=None, member=None) -> Circuit | None:
    """Outermost circuit of ``member`` sites in ``lam`` surrounding ``delta``.

    ``member`` defaults to ``c.spins == sign``.  ``lam`` defaults to the
    interior of the window.  A star circuit exists iff no plain path of
    non-members in ``lam \\ delta`` joins the sites next to ``delta`` to the
    outer layer of ``lam`` (and dually for plain circuits).
    """
    g = c.graph
    if member is None:
        member = c.spins == sign
    member = np.asarray(member, dtype=bool)
    delta = _mask(g, delta)
    lam = g.interior.copy() if lam is None else _mask(g, lam)
    if not delta.any():
        raise ValueError("delta is empty")
    if (delta & ~lam).any():
        raise ValueError("delta must lie inside lam")
    outside = ~lam
    dual = _dual(adjacency)
    if (_touching(g, delta, outside, dual)).any() or (_touching(g, delta, outside, adjacency)).any():
        raise ValueError("delta needs a one-site margin inside lam")
    O = _dual_region(g, member, delta, lam, outside, adjacency)
    if O is None:
        return None
    X = O | outside
    H = component_containing(g, lam & ~O, delta, dual)
    NX = _touching(g, H, X, dual) & ~(H & X)
    NX &= H
    K = H & ~NX
    inner = component_containing(g, K, delta, dual)
    order, _ = _ordered_boundary(g, inner, adjacency)
    bset = region_boundary(g, inner, dual)
    if not member[bset].all():
        raise GeometryError("circuit contains a non-member site")
    if set(order) != set(np.flatnonzero(bset).tolist()):
        raise GeometryError("ordered circuit differs from the region boundary")
    enc = _enclosed(g, order, bset)
    if not enc[delta].all():
        raise GeometryError("circuit does not enclose delta under even-odd testing")
    return Circuit(g, order, adjacency, inner, sign)


def find_semicircuit(c, sign: int | None, adjacency: str, hp: HalfPlaneRegion,
                     delta, lam=None, member=None) -> Semicircuit | None:
    """Outermost semicircuit of ``member`` sites in the half-plane around ``delta``.

    ``delta`` must lie in the half-plane and meet its boundary line.  Such a
    semicircuit exists iff no dual path of non-members inside the half-plane
    joins the sites next to ``delta`` to the window rim on that side.
    """
    g = c.graph
    if member is None:
        member = c.spins == sign
    member = np.asarray(member, dtype=bool)
    delta = _mask(g, delta)
    lam = g.interior.copy() if lam is None else _mask(g, lam)
    P = hp.sites & lam
    if not delta.any() or (delta & ~P).any():
        raise ValueError("delta must be a non-empty subset of the half-plane window")
    if not (delta & hp.boundary_line).any():
        raise ValueError("delta must meet the boundary line")
    outside = ~lam
    dual = _dual(adjacency)
    if _touching(g, delta, outside, adjacency).any():
        raise ValueError("delta needs a one-site margin inside lam")
    O = _dual_region(g, member, delta, P, outside, adjacency)
    if O is None:
        return None
    X = O | outside
    H = component_containing(g, P & ~O, delta, dual)
    NX = _touching(g, H, X, dual) & H
    K = H & ~NX
    half = component_containing(g, K, delta, dual)
    R = hp.reflection()
    imap = index_map(g, R)
    if (imap[half] < 0).any():
        raise OutOfWindow("reflected interior leaves the window")
    inner = half.copy()
    inner[imap[half]] = True
    sigma = _semicircuit_arc(g, inner, hp, adjacency)
    bset = region_boundary(g, inner, dual) & hp.sites
    if not member[bset].all():
        raise GeometryError("semicircuit contains a non-member site")
    return Semicircuit(g, sigma, adjacency, inner, hp, sign)


def _semicircuit_arc(g, inner, hp, adjacency):
    """The part inside the half-plane of the ordered boundary of ``inner``."""
    order, _ = _ordered_boundary(g, inner, adjacency)
    inside = [bool(hp.sites[i]) for i in order]
    if all(inside):
        raise GeometryError("boundary never leaves the half-plane")
    n = len(order)
    # rotate so the walk starts right after a site outside the half-plane
    start = next(a for a in range(n) if not inside[a - 1] and inside[a])
    rot = order[start:] + order[:start]
    ins = inside[start:] + inside[:start]
    arc = []
    for i, ok in zip(rot, ins):
        if not ok:
            break
        arc.append(i)
    if sum(1 for a in range(n) if inside[a] and not inside[a - 1]) != 1:
        raise GeometryError("semicircuit boundary meets the half-plane in several arcs")
    for e in (arc[0], arc[-1]):
        if not _closes_on_line(g, e, hp, adjacency):
            raise GeometryError("semicircuit endpoints are not on the boundary line")
    return arc


def _closes_on_line(g, e, hp, adjacency):
    """Endpoint rule: on the boundary line, or adjacent to its own mirror image.

    The second case only arises on lattices whose boundary line has gaps
    (honeycomb); the doubled curve is still a closed circuit.
    """
    if hp.boundary_line[e]:
        return True
    r = int(index_map(g, hp.reflection())[e])
    ptr, idx = g.adjacency(adjacency)
    return r >= 0 and r in idx[ptr[e]:ptr[e + 1]]


def interior(g: LatticeGraph, sigma, hp: HalfPlaneRegion, adjacency: str = "star") -> np.ndarray:
    """Int sigma: sites strictly enclosed by the closed curve sigma + R(sigma).

    ``sigma`` is an ordered list of sites (indices or points) in the
    half-plane, both ends on its boundary line.
    """
    idx = [s if isinstance(s, (int, np.integer)) else g.index(s) for s in sigma]
    idx = [int(i) for i in idx]
    if not idx:
        raise ValueError("empty semicircuit")
    if not all(_closes_on_line(g, e, hp, adjacency) for e in (idx[0], idx[-1])):
        raise ValueError("semicircuit must start and end on the boundary line")
    if not hp.sites[idx].all():
        raise ValueError("semicircuit leaves the half-plane")
    imap = index_map(g, hp.reflection())
    img = [int(imap[i]) for i in idx]
    if min(img) < 0:
        raise OutOfWindow("reflected semicircuit leaves the window")
    loop = idx + img[::-1]
    on = np.zeros(g.n_sites, dtype=bool)
    on[idx] = True
    on[img] = True
    return _enclosed(g, loop, on)


# --------------------------------------------------------------------------
# Dobrushin interfaces


@dataclass
class InterfaceProfile:
    """Row levels n and the abscissas a_n (NaN where undefined)."""

    rows: np.ndarray
    a: np.ndarray

    def d(self, other: "InterfaceProfile") -> np.ndarray:
        if not np.array_equal(self.rows, other.rows):
            raise ValueError("profiles cover different rows")
        return self.a - other.a


def _row_levels(g):
    """Integer levels n whose upper half-plane line lies strictly inside the window."""
    if "rows" not in g._cache:
        ys = g.coords[:, 1]
        lo = math.ceil(ys[g.interior].min())
        hi = math.floor(ys[g.interior].max())
        g._cache["rows"] = np.arange(lo, hi + 1)
    return g._cache["rows"]


def interface_profile(c, plus_side: str = "left", rows=None) -> InterfaceProfile:
    """a_n for a vertical interface.

    For each level n, the +* clusters of the window part ``x2 >= n`` that
    contain +1 ring sites are formed; a_n is the largest (``plus_side`` =
    'left') or smallest ('right') abscissa of their sites on the boundary
    line of ``{x2 >= n}``.
    """
    g = c.graph
    rows = _row_levels(g) if rows is None else np.asarray(rows)
    plus = c.spins > 0
    ring_plus = plus & g.ring
    a = np.full(len(rows), np.nan)
    for t, n in enumerate(rows):
        hp = _hp_cached(g, "up", int(n))
        member = plus & hp.sites
        lab = label_members(g, member, "star")
        ids = np.unique(lab[ring_plus & hp.sites])
        ids = ids[ids >= 0]
        on = np.isin(lab, ids) & hp.boundary_line & member
        if on.any():
            xs = g.coords[on, 0]
            a[t] = xs.max() if plus_side == "left" else xs.min()
    return InterfaceProfile(np.asarray(rows), a)


def _hp_cached(g, side, k):
    key = ("hp", side, k)
    if key not in g._cache:
        g._cache[key] = half_plane(g, side, k)
    return g._cache[key]


@dataclass
class InterfaceReport:
    contour: Contour | None
    n_open: int
    ambiguous: bool
    profile: InterfaceProfile | None = None


def open_interface(c, plus_side: str | None = "left") -> InterfaceReport:
    """The unique open contour of a Dobrushin configuration and the a_n profile.

    With the whole ring in the configuration the ring carries exactly two
    sign changes on rim edges and a single open contour results; other
    rim-attached open contours are reported as ambiguity.
    """
    contours = trace_contours(c)
    open_ = [ct for ct in contours if not ct.closed]
    prof = interface_profile(c, plus_side) if plus_side else None
    if len(open_) != 1:
        return InterfaceReport(None, len(open_), True, prof)
    return InterfaceReport(open_[0], 1, False, prof)


def shift_spins(c, shift) -> tuple:
    """Spins of the translate ``y -> c(y - shift)`` on the same window.

    Returns ``(spins, valid)``; sites whose preimage is outside the window
    are marked invalid (and hold 0).
    """
    g = c.graph
    from .lattice import translation
    imap = index_map(g, translation((-Fraction(shift[0]), -Fraction(shift[1]))))
    valid = imap >= 0
    out = np.zeros(g.n_sites, dtype=np.int8)
    out[valid] = c.spins[imap[valid]]
    return out, valid


def leq_star_analysis(c, c_hat, delta, lam=None, hat_spins=None, hat_valid=None):
    """Search a star circuit of sites with ``c <= c_hat`` around ``delta``."""
    g = c.graph
    s_hat = c_hat.spins if hat_spins is None else hat_spins
    member = c.spins <= s_hat
    lam_m = g.interior.copy() if lam is None else _mask(g, lam)
    if hat_valid is not None:
        lam_m &= hat_valid
        # stay one site away from the invalid strip
        lam_m &= ~g.boundary_of(~hat_valid, "star")
    return find_surrounding_circuit(c, None, "star", delta, lam_m, member=member)


# --------------------------------------------------------------------------
# butterflies


def butterfly_proxy(c, orientation: str, sign: int, level: int = 0,
                    adjacency: str | None = None) -> bool:
    """Same-sign wings in both halves of a conjugate half-plane pair.

    Each half is the window interior on one side of the level line; a wing
    is a sign-s cluster inside that half meeting both its boundary line and
    the outermost interior layer on the far side.  Adjacency defaults to
    star for +1 and plain for -1.
    """
    g = c.graph
    if adjacency is None:
        adjacency = "star" if sign > 0 else "plain"
    sides = ("up", "down") if orientation in ("hor", "horizontal") else ("left", "right")
    member = (c.spins == sign) & g.interior
    for side in sides:
        hp = _hp_cached(g, side, level)
        m = member & hp.sites
        lab = label_members(g, m, adjacency)
        far = _far_layer(g, side)
        if not (anchored(lab, hp.boundary_line & m, far & m)).any():
            return False
    return True


def _far_layer(g, side):
    key = ("far", side)
    if key not in g._cache:
        c = g.coords[g.interior]
        axis = 1 if side in ("up", "down") else 0
        v = g.coords[:, axis]
        ext = c[:, axis].max() if side in ("up", "right") else c[:, axis].min()
        tol = 1e-9
        # outermost interior layer: interior sites next to the ring on that side
        near_ring = g.boundary_of(g.ring, "plain") & g.interior
        if side in ("up", "right"):
            sel = near_ring & (v > ext - 1 + tol)
        else:
            sel = near_ring & (v < ext + 1 - tol)
        g._cache[key] = sel
    return g._cache[key]


# --------------------------------------------------------------------------
# theta


Z99 = 2.5758293035489004


def wilson(k: int, n: int, z: float = Z99) -> tuple:
    """Wilson score interval ``(p_hat, lo, hi)`` for k successes in n trials."""
    if n <= 0:
        return float("nan"), 0.0, 1.0
    p = k / n
    z2 = z * z
    den = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / den
    return p, max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class ThetaEstimate:
    theta: float
    ci_lo: float
    ci_hi: float
    L: int
    n: int
    mode: str
    proxy: str = "origin +*-connected to the window ring under all-plus bc"

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_hi - self.ci_lo)


def origin_connected_to_ring(c, sign: int = 1) -> bool:
    """Is the site nearest the origin star-connected to the ring by sign spins?"""
    g = c.graph
    o = g.nearest((0, 0))
    if c.spins[o] != sign:
        return False
    lab = label_members(g, c.spins == sign, "star")
    return bool(np.any(lab[g.ring] == lab[o]))


def estimate_theta(m, g, L: int | None = None, n_samples: int = 200, seed: int = 0,
                   mode=None, samples=None, workers=None) -> ThetaEstimate:
    """theta proxy from exact all-plus samples on the window of radius L.

    ``g`` is a lattice preset name, spec or graph; pass ``samples`` to reuse
    an existing all-plus batch.
    """
    from .lattice import build_lattice
    from .sampler import EXACT, PLUS, sample_batch
    mode = mode or EXACT
    if not isinstance(g, LatticeGraph):
        g = build_lattice(g, L)
    if samples is None:
        samples = sample_batch(m, g, PLUS, n_samples, mode, seed, workers=workers)
    k = sum(origin_connected_to_ring(c) for c in samples)
    p, lo, hi = wilson(k, len(samples))
    radius = int(round(max(abs(g.window[1]), abs(g.window[3]))))
    return ThetaEstimate(p, lo, hi, radius, len(samples), mode.label)
