"""Pair/site potentials, attractivity and flip-reflection checks, presets.

Potentials take values in the extended reals.  ``INF`` is a dedicated
marker for +infinity; energies are never summed with it, weights are
short-circuited to zero instead, so no ``inf - inf`` can arise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from .lattice import LatticeGraph, LatticeError, index_map, reflection

__all__ = [
    "INF", "ModelError", "InadmissibleContext", "SpinModel", "Configuration",
    "CheckResult", "BETA_C", "preset_ferro", "preset_staggered",
    "preset_hardcore", "preset_antiferro", "flip_model", "sublattice_flip",
    "validate_H1", "validate_H2", "conditional_plus_probability",
    "min_conditional", "energy", "site_tables", "load_model", "orbit_of",
]

BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))


class _Infinity:
    """Singleton marker for a +infinite energy (a forbidden pattern)."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(v) -> bool:
    return v is INF


def _parse_ext(v):
    if v is INF:
        return INF
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        v = float(v)
    v = float(v)
    if math.isinf(v) or math.isnan(v):
        raise ModelError(f"non-finite potential value {v!r}; use the token 'inf' for +infinity")
    return v


class ModelError(ValueError):
    pass


class InadmissibleContext(ModelError):
    """Both single-site weights vanish: the neighborhood is itself forbidden."""


def orbit_of(p) -> tuple:
    """Class of a point modulo the translations by 2Z^2."""
    return (Fraction(p[0]) % 2, Fraction(p[1]) % 2)


def _offset(p, q) -> tuple:
    return (Fraction(q[0]) - Fraction(p[0]), Fraction(q[1]) - Fraction(p[1]))


# index of U(a, b) in a 4-tuple ordered (--, -+, +-, ++)
def _ui(a, b):
    return (a > 0) * 2 + (b > 0)


def _transpose(t):
    return (t[0], t[2], t[1], t[3])


@dataclass(frozen=True)
class SpinModel:
    """Hamiltonian ``sum U_{x,y}(w_x, w_y) + sum V_x(w_x)`` with beta folded in.

    ``pair`` maps ``(orbit(x), y - x)`` to the 4-tuple
    ``(U(-,-), U(-,+), U(+,-), U(+,+))``; the key ``None`` is the default for
    edges not listed.  ``site`` maps ``orbit(x)`` to ``(V(-1), V(+1))``, with
    ``None`` as default (zero if absent).
    """

    name: str
    pair: dict
    site: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        pair = {}
        for k, t in self.pair.items():
            if len(t) != 4:
                raise ModelError(f"pair table for {k} needs 4 entries")
            pair[k] = tuple(_parse_ext(v) for v in t)
        site = {}
        for k, t in self.site.items():
            if len(t) != 2:
                raise ModelError(f"site table for {k} needs 2 entries")
            site[k] = tuple(_parse_ext(v) for v in t)
            if any(v is INF for v in site[k]):
                raise ModelError("site potentials must be finite")
        # U_{x,y}(a,b) = U_{y,x}(b,a) for explicitly listed both ways
        for k, t in pair.items():
            if k is None:
                continue
            (ox, off) = k
            other = (orbit_of((ox[0] + off[0], ox[1] + off[1])), (-off[0], -off[1]))
            if other in pair and pair[other] != _transpose(t):
                raise ModelError(f"pair tables {k} and {other} are not transposes")
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "site", site)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.pair.items(), key=repr)),
                     tuple(sorted(self.site.items(), key=repr))))

    def pair_table(self, x, y) -> tuple:
        """4-tuple U_{x,y}(a, b) for points x ~ y."""
        key = (orbit_of(x), _offset(x, y))
        if key in self.pair:
            return self.pair[key]
        rkey = (orbit_of(y), _offset(y, x))
        if rkey in self.pair:
            return _transpose(self.pair[rkey])
        if None in self.pair:
            return self.pair[None]
        raise ModelError(f"no pair potential for edge {x} ~ {y}")

    def site_table(self, x) -> tuple:
        o = orbit_of(x)
        if o in self.site:
            return self.site[o]
        return self.site.get(None, (0.0, 0.0))

    def U(self, x, y, a, b):
        return self.pair_table(x, y)[_ui(a, b)]

    def V(self, x, a):
        return self.site_table(x)[a > 0]

    @property
    def has_hard_constraints(self) -> bool:
        return any(v is INF for t in self.pair.values() for v in t)

    def to_json(self) -> str:
        def enc(v):
            return "inf" if v is INF else v

        def key(k):
            if k is None:
                return None
            return {"orbit": [str(c) for c in k[0]], "offset": [str(c) for c in k[1]]}

        return json.dumps({
            "name": self.name,
            "params": self.params,
            "pair": [dict(key=key(k), U=[enc(v) for v in t]) for k, t in self.pair.items()],
            "site": [dict(orbit=None if k is None else [str(c) for c in k], V=list(t))
                     for k, t in self.site.items()],
        }, indent=2)


def load_model(path) -> SpinModel:
    """Read a SpinModel from JSON; ``"inf"`` marks +infinity."""
    data = json.loads(Path(path).read_text())
    unknown = set(data) - {"name", "params", "pair", "site"}
    if unknown:
        raise ModelError(f"unknown keys in model file: {sorted(unknown)}")

    def pt(v):
        return (Fraction(v[0]), Fraction(v[1]))

    pair = {}
    for e in data.get("pair", []):
        k = e.get("key")
        pair[None if k is None else (orbit_of(pt(k["orbit"])), pt(k["offset"]))] = e["U"]
    site = {}
    for e in data.get("site", []):
        o = e.get("orbit")
        site[None if o is None else orbit_of(pt(o))] = e["V"]
    return SpinModel(data.get("name", Path(path).stem), pair, site, data.get("params", {}))


# --------------------------------------------------------------------------
# configurations


@dataclass
class Configuration:
    """Spins on every window site (interior and boundary ring)."""

    graph: LatticeGraph
    spins: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8)
        if self.spins.shape != (self.graph.n_sites,):
            raise ValueError("spin array does not match the window")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +-1")

    def copy(self):
        return Configuration(self.graph, self.spins.copy(), self.label)

    def __eq__(self, other):
        return (isinstance(other, Configuration) and other.graph is self.graph
                and np.array_equal(other.spins, self.spins))

    def at(self, p) -> int:
        return int(self.spins[self.graph.index(p)])

    def magnetization(self, mask=None) -> float:
        s = self.spins if mask is None else self.spins[mask]
        return float(s.mean())

    def admissible(self, model: SpinModel) -> bool:
        return violations(model, self) == []


def violations(model: SpinModel, c: Configuration) -> list:
    """Edges (i, j) carrying an infinite pair energy."""
    if not model.has_hard_constraints:
        return []
    g = c.graph
    bad = []
    for i, j in g.edges():
        t = model.pair_table(g.point(i), g.point(j))
        if t[_ui(c.spins[i], c.spins[j])] is INF:
            bad.append((int(i), int(j)))
    return bad


def sublattice_flip(c: Configuration) -> Configuration:
    """Negate spins on the odd sublattice; an involution."""
    eps = c.graph.epsilon
    return Configuration(c.graph, c.spins * eps, c.label)


# --------------------------------------------------------------------------
# presets


def _orbit_parity(g: LatticeGraph) -> dict:
    if not g.bipartite:
        raise ModelError(f"{g.name} is not bipartite; sublattice constructions need parity")
    par = {}
    for i in range(g.n_sites):
        o = orbit_of(g.point(i))
        v = int(g.parity[i])
        if par.setdefault(o, v) != v:
            raise ModelError("parity is not periodic under 2Z^2 translations")
    return par


def _edge_classes(g: LatticeGraph) -> set:
    out = set()
    for i, j in g.edges():
        x, y = g.point(i), g.point(j)
        out.add((orbit_of(x), _offset(x, y)))
        out.add((orbit_of(y), _offset(y, x)))
    return out


def preset_ferro(beta: float, force: bool = False) -> SpinModel:
    """Nearest-neighbor ferromagnet ``U = -beta a b``, ``V = 0``."""
    if not force and not beta > 0:
        raise ModelError(f"beta must be > 0 (got {beta}); pass force=True for controls")
    b = float(beta)
    return SpinModel(f"ferro(beta={beta})", {None: (-b, b, b, -b)}, {},
                     {"beta": b})


def preset_antiferro(beta: float, h: float = 0.0) -> SpinModel:
    """Antiferromagnet ``U = +beta a b`` in a homogeneous field ``V = -h a``."""
    b = float(beta)
    return SpinModel(f"antiferro(beta={beta},h={h})", {None: (b, -b, -b, b)},
                     {None: (float(h), -float(h))}, {"beta": b, "h": float(h)})


def preset_staggered(beta: float, h: float, g: LatticeGraph) -> SpinModel:
    """Ferromagnet in the field ``-h eps(x)``: ``V_x(a) = -h a`` on even sites."""
    if not beta > 0:
        raise ModelError(f"beta must be > 0 (got {beta})")
    par = _orbit_parity(g)
    h = float(h)
    site = {o: ((h, -h) if p == 0 else (-h, h)) for o, p in par.items()}
    b = float(beta)
    return SpinModel(f"staggered(beta={beta},h={h})", {None: (-b, b, b, -b)}, site,
                     {"beta": b, "h": h})


def preset_hardcore(lam: float, flipped: bool = False, g: LatticeGraph | None = None) -> SpinModel:
    """Hard-core gas with activity ``lam``: +1 is a particle, adjacent particles forbidden.

    With ``flipped`` the odd sublattice is negated, which makes the model
    attractive on bipartite lattices.
    """
    if not lam > 0:
        raise ModelError(f"activity lambda must be > 0 (got {lam})")
    raw = SpinModel(f"hardcore(lambda={lam})", {None: (0.0, 0.0, 0.0, INF)},
                    {None: (0.0, -math.log(lam))}, {"lambda": float(lam)})
    if not flipped:
        return raw
    if g is None:
        raise ModelError("the flipped hard-core model needs the lattice for its parity")
    return flip_model(raw, g)


def flip_model(m: SpinModel, g: LatticeGraph) -> SpinModel:
    """Conjugate by the sublattice flip: ``U'_{x,y}(a,b) = U_{x,y}(eps_x a, eps_y b)``."""
    par = _orbit_parity(g)
    eps = {o: (1 if p == 0 else -1) for o, p in par.items()}
    pair = {}
    for (ox, off) in _edge_classes(g):
        x = ox
        y = (ox[0] + off[0], ox[1] + off[1])
        t = m.pair_table(x, y)
        ex, ey = eps[ox], eps[orbit_of(y)]
        pair[(ox, off)] = tuple(t[_ui(ex * a, ey * b)] for a, b in product((-1, 1), repeat=2))
    site = {}
    for o, e in eps.items():
        v = m.site_table(o)
        site[o] = (v[0], v[1]) if e == 1 else (v[1], v[0])
    name = m.name[len("flipped:"):] if m.name.startswith("flipped:") else "flipped:" + m.name
    return SpinModel(name, pair, site, dict(m.params, flipped=not m.params.get("flipped", False)))


def same_potentials(m1: SpinModel, m2: SpinModel, g: LatticeGraph) -> bool:
    """Do two models agree on every edge and site of the window?"""
    for i, j in g.edges():
        x, y = g.point(i), g.point(j)
        if m1.pair_table(x, y) != m2.pair_table(x, y):
            return False
    return all(m1.site_table(g.point(i)) == m2.site_table(g.point(i))
               for i in range(g.n_sites))


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    witness: object = None
    message: str = ""

    def __bool__(self):
        return self.ok


def _diff(hi, lo):
    """Extended-real ``hi - lo``; None if both are infinite."""
    if hi is INF and lo is INF:
        return None
    if hi is INF:
        return math.inf
    if lo is INF:
        return -math.inf
    return hi - lo


def _h1_table(t, key):
    for tt, orient in ((t, "x,y"), (_transpose(t), "y,x")):
        d = {}
        for b in (-1, 1):
            v = _diff(tt[_ui(1, b)], tt[_ui(-1, b)])
            if v is None:
                raise ModelError(
                    f"ill-formed potential {key} ({orient}): U(1,{b}) and U(-1,{b}) both infinite")
            d[b] = v
        if d[-1] < d[1]:
            return CheckResult(False, (key, orient, (-1, 1)),
                               f"U(1,b)-U(-1,b) increases from b=-1 ({d[-1]}) to b=1 ({d[1]})")
    return None


def validate_H1(m: SpinModel) -> CheckResult:
    """Attractivity: ``U(1, .) - U(-1, .)`` decreasing, in both orientations."""
    for key, t in m.pair.items():
        bad = _h1_table(t, key)
        if bad is not None:
            return bad
    return CheckResult(True)


GENERATORS = (("R0,hor", reflection("hor", 0)), ("R0,vert", reflection("vert", 0)),
              ("R1,hor", reflection("hor", 1)), ("R1,vert", reflection("vert", 1)))


def validate_H2(m: SpinModel, g: LatticeGraph) -> CheckResult:
    """Flip-reflection invariance on every window edge/site with image in the window."""
    checked = 0
    for name, op in GENERATORS:
        imap = index_map(g, op)
        for i, j in g.edges():
            ri, rj = imap[i], imap[j]
            if ri < 0 or rj < 0:
                continue
            t = m.pair_table(g.point(i), g.point(j))
            rt = m.pair_table(g.point(ri), g.point(rj))
            for a, b in product((-1, 1), repeat=2):
                if t[_ui(a, b)] != rt[_ui(-a, -b)]:
                    return CheckResult(False, (name, g.point(i), g.point(j), a, b),
                                       f"U differs under {name} with spin flip")
            checked += 1
        for i in range(g.n_sites):
            ri = imap[i]
            if ri < 0:
                continue
            v, rv = m.site_table(g.point(i)), m.site_table(g.point(ri))
            if v[0] != rv[1] or v[1] != rv[0]:
                return CheckResult(False, (name, g.point(i)),
                                   f"V differs under {name} with spin flip")
    if checked == 0:
        raise ModelError("window too small to check (H2)")
    return CheckResult(True)


# --------------------------------------------------------------------------
# single-site conditionals


def _local_energies(pair_tables, site_table, nbr_spins):
    """Energies E(-1), E(+1) as floats or INF."""
    out = []
    for a in (-1, 1):
        e = site_table[a > 0]
        if e is INF:
            out.append(INF)
            continue
        for t, b in zip(pair_tables, nbr_spins):
            u = t[_ui(a, b)]
            if u is INF:
                e = INF
                break
            e += u
        out.append(e)
    return out


def _plus_prob(e_minus, e_plus):
    if e_minus is INF and e_plus is INF:
        return math.nan
    if e_plus is INF:
        return 0.0
    if e_minus is INF:
        return 1.0
    d = e_plus - e_minus
    if d >= 0:
        z = math.exp(-d)
        return z / (1.0 + z)
    return 1.0 / (1.0 + math.exp(d))


def conditional_plus_probability(m: SpinModel, g: LatticeGraph, x, neighbor_spins) -> float:
    """P(spin at x = +1 | neighbors), neighbors in ``g.lattice_neighbors`` order.

    ``neighbor_spins`` may also be a dict mapping neighbor points to spins.
    """
    i = g.index(x) if not isinstance(x, (int, np.integer)) else int(x)
    p = g.point(i)
    nbrs = g.lattice_neighbors(i)
    if isinstance(neighbor_spins, dict):
        spins = [neighbor_spins[q] for q in nbrs]
    else:
        spins = list(neighbor_spins)
    if len(spins) != len(nbrs):
        raise ValueError(f"site {p} has {len(nbrs)} neighbors, got {len(spins)} spins")
    tables = [m.pair_table(p, q) for q in nbrs]
    em, ep = _local_energies(tables, m.site_table(p), spins)
    pr = _plus_prob(em, ep)
    if math.isnan(pr):
        raise InadmissibleContext(f"both spin values forbidden at {p}")
    return pr


def _signature(m, g, i):
    p = g.point(i)
    return (m.site_table(p),) + tuple(m.pair_table(p, g.point(int(j))) for j in g.neighbors(i))


def _table_for(sig):
    site, tables = sig[0], sig[1:]
    k = len(tables)
    out = np.empty(1 << k, dtype=np.float64)
    for code in range(1 << k):
        spins = [1 if (code >> b) & 1 else -1 for b in range(k)]
        em, ep = _local_energies(tables, site, spins)
        out[code] = _plus_prob(em, ep)
    return out


def site_tables(m: SpinModel, g: LatticeGraph, order) -> tuple:
    """Kernel tables for the sites in ``order``.

    Returns ``(tbl_ptr, table)`` with ``table[tbl_ptr[j] + code]`` the
    probability of +1 at ``order[j]`` given the neighbor bit pattern
    ``code`` (bit k set iff the k-th neighbor in CSR order is +1).  NaN
    marks a forbidden neighborhood.
    """
    blocks = {}
    chunks = []
    ptr = np.empty(len(order), dtype=np.int64)
    offset = 0
    for j, i in enumerate(order):
        i = int(i)
        if not g.interior[i]:
            raise ModelError(f"site {g.point(i)} is on the ring and cannot be updated")
        sig = _signature(m, g, i)
        if sig not in blocks:
            tbl = _table_for(sig)
            blocks[sig] = offset
            chunks.append(tbl)
            offset += len(tbl)
        ptr[j] = blocks[sig]
    table = np.concatenate(chunks) if chunks else np.zeros(0)
    return ptr, table


def min_conditional(m: SpinModel, g: LatticeGraph) -> float:
    """Smallest positive single-site conditional probability over interior sites.

    Runs over every neighbor assignment that leaves at least one spin value
    allowed; for each, the smaller of the two conditional probabilities of
    the allowed values (1 if only one value is allowed).
    """
    seen = set()
    best = 1.0
    for i in np.flatnonzero(g.interior):
        sig = _signature(m, g, int(i))
        if sig in seen:
            continue
        seen.add(sig)
        for p in _table_for(sig):
            if math.isnan(p):
                continue
            q = min(p, 1.0 - p) if 0.0 < p < 1.0 else 1.0
            best = min(best, q)
    return best


def energy(m: SpinModel, c: Configuration, mask=None):
    """Energy of the window configuration: all edges within ``mask`` plus its sites.

    Returns INF if a forbidden pattern occurs.
    """
    g = c.graph
    if mask is None:
        mask = np.ones(g.n_sites, dtype=bool)
    s = c.spins
    total = 0.0
    for i, j in g.edges():
        if mask[i] and mask[j]:
            u = m.pair_table(g.point(i), g.point(j))[_ui(s[i], s[j])]
            if u is INF:
                return INF
            total += u
    for i in np.flatnonzero(mask):
        total += m.site_table(g.point(i))[int(s[i] > 0)]
    return total


def check_model_for_sampling(m: SpinModel) -> None:
    """Raise ModelError unless the model is attractive."""
    r = validate_H1(m)
    if not r:
        raise ModelError(f"model {m.name} violates (H1): {r.message} at {r.witness}")


__all__ += ["violations", "same_potentials", "check_model_for_sampling", "is_inf",
            "GENERATORS", "LatticeError"]
