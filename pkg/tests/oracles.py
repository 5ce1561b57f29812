"""Independent reference implementations used by the tests.

Everything here works from site coordinates of square-type windows and
plain Python containers, without the package's adjacency arrays.
"""
from collections import deque
from itertools import product

import numpy as np


def square_nbrs(g, star=False):
    """Neighbor lists from coordinates: distance 1 (plain) or Chebyshev 1 (star)."""
    pos = {tuple(map(float, g.coords[i])): i for i in range(g.n_sites)}
    out = []
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if star:
        steps += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    for i in range(g.n_sites):
        x, y = map(float, g.coords[i])
        out.append([pos[(x + dx, y + dy)] for dx, dy in steps if (x + dx, y + dy) in pos])
    return out


def bfs_components(member, nbrs):
    """Partition of member sites into connected sets (frozensets of indices)."""
    seen = set()
    comps = set()
    for s in np.flatnonzero(member):
        s = int(s)
        if s in seen:
            continue
        comp = {s}
        q = deque([s])
        seen.add(s)
        while q:
            u = q.popleft()
            for v in nbrs[u]:
                if member[v] and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    q.append(v)
        comps.add(frozenset(comp))
    return comps


def blocked(nonmember, region, delta, escape, nbrs):
    """Is there a path of non-members in ``region`` minus ``delta`` from a site
    next to ``delta`` to a site next to ``escape``?"""
    n = len(nbrs)
    allowed = [bool(region[i] and nonmember[i] and not delta[i]) for i in range(n)]
    start = [i for i in range(n) if allowed[i] and any(delta[j] for j in nbrs[i])]
    seen = set(start)
    q = deque(start)
    while q:
        u = q.popleft()
        if any(escape[j] for j in nbrs[u]):
            return True
        for v in nbrs[u]:
            if allowed[v] and v not in seen:
                seen.add(v)
                q.append(v)
    return False


def escapes(start, wall, region, nbrs):
    """Flood from ``start`` avoiding ``wall``; does it leave ``region``?"""
    seen = set(start)
    q = deque(start)
    while q:
        u = q.popleft()
        if not region[u]:
            return True
        for v in nbrs[u]:
            if v not in wall and v not in seen:
                seen.add(v)
                q.append(v)
    return False


def ferro_weights(g, beta, boundary, order):
    """Exact Boltzmann law of the free sites ``order`` (list of states, probabilities)."""
    n = len(order)
    edges = [(int(a), int(b)) for a, b in g.edges()]
    states, w = [], []
    for bits in product((-1, 1), repeat=n):
        s = boundary.copy()
        s[order] = bits
        e = sum(s[a] * s[b] for a, b in edges if s[a] != 0 and s[b] != 0)
        states.append(tuple(bits))
        w.append(np.exp(beta * e))
    w = np.array(w)
    return states, w / w.sum()


def hardcore_weights(g, lam, occupied_ring, order):
    """Exact independent-set law on ``order`` given occupied ring sites."""
    n = len(order)
    edges = [(int(a), int(b)) for a, b in g.edges()]
    states, w = [], []
    for bits in product((0, 1), repeat=n):
        occ = set(occupied_ring)
        occ.update(int(order[k]) for k in range(n) if bits[k])
        ok = not any(a in occ and b in occ for a, b in edges)
        states.append(bits)
        w.append(lam ** sum(bits) if ok else 0.0)
    w = np.array(w)
    return states, w / w.sum()


def cyclic_adjacent(seq, nbrs, closed=True):
    pairs = list(zip(seq, seq[1:])) + ([(seq[-1], seq[0])] if closed and len(seq) > 1 else [])
    return all(b in nbrs[a] for a, b in pairs)


def check_circuit_case(g, spins, sign, adjacency, delta, plain, star):
    """Compare find_surrounding_circuit against a BFS obstruction oracle.

    Returns True if a circuit exists.  A found circuit is verified as a
    certificate: member sites, cyclic adjacency, and no dual escape from delta.
    """
    from isingperc.geometry import find_surrounding_circuit
    from isingperc.model import Configuration

    c = Configuration(g, spins)
    member = spins == sign
    lam = g.interior
    dual_n = plain if adjacency == "star" else star
    own_n = star if adjacency == "star" else plain
    res = find_surrounding_circuit(c, sign, adjacency, delta)
    obstructed = blocked(~member, lam, delta, ~lam, dual_n)
    assert (res is None) == obstructed
    if res is None:
        return False
    sites = res.sites
    assert member[sites].all() and lam[sites].all() and not delta[sites].any()
    assert cyclic_adjacent(sites, own_n)
    start = [int(i) for i in np.flatnonzero(delta)]
    assert not escapes(start, set(sites), lam, dual_n)
    assert res.interior[delta].all() and not res.interior[sites].any()
    return True


def check_semicircuit_case(g, spins, sign, adjacency, hp, delta, plain, star):
    from isingperc.geometry import find_semicircuit
    from isingperc.lattice import index_map
    from isingperc.model import Configuration

    c = Configuration(g, spins)
    member = spins == sign
    lam = g.interior
    P = hp.sites & lam
    dual_n = plain if adjacency == "star" else star
    own_n = star if adjacency == "star" else plain
    res = find_semicircuit(c, sign, adjacency, hp, delta)
    obstructed = blocked(~member, P, delta, ~lam, dual_n)
    assert (res is None) == obstructed
    if res is None:
        return False
    arc = res.sites
    assert member[arc].all() and P[arc].all() and not delta[arc].any()
    assert cyclic_adjacent(arc, own_n, closed=False)
    assert hp.boundary_line[arc[0]] and hp.boundary_line[arc[-1]]
    imap = index_map(g, hp.reflection())
    wall = set(arc) | {int(imap[i]) for i in arc}
    start = [int(i) for i in np.flatnonzero(delta)]
    assert not escapes(start, wall, lam, dual_n)
    return True
