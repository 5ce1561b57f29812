"""Pure-Python reference versions of the hot loops.

Same signatures and bit-identical results as the compiled ``_core`` module;
used when the extension is not built.  Slow, but only the inner loops live
here so everything else stays shared.
"""
import math

import numpy as np

OK = 0
INADMISSIBLE = 1
ORDER_VIOLATION = 2


def _code(spins, nbr_ptr, nbr_idx, x):
    c = 0
    k = 0
    for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
        if spins[nbr_idx[j]] > 0:
            c |= 1 << k
        k += 1
    return c


def sweeps(spins, order, nbr_ptr, nbr_idx, tbl_ptr, table, uniforms):
    """Run ``uniforms.shape[0]`` raster sweeps in place.

    Returns ``(status, site)``; ``site`` is the offending index when status
    is not OK.
    """
    n_sweeps, n = uniforms.shape
    for s in range(n_sweeps):
        for j in range(n):
            x = order[j]
            p = table[tbl_ptr[j] + _code(spins, nbr_ptr, nbr_idx, x)]
            if math.isnan(p):
                return INADMISSIBLE, int(x)
            spins[x] = 1 if uniforms[s, j] < p else -1
    return OK, -1


def coupled_sweeps(lo, hi, order, nbr_ptr, nbr_idx, tbl_ptr, table, uniforms,
                   check_order):
    n_sweeps, n = uniforms.shape
    for s in range(n_sweeps):
        for j in range(n):
            x = order[j]
            u = uniforms[s, j]
            p_lo = table[tbl_ptr[j] + _code(lo, nbr_ptr, nbr_idx, x)]
            p_hi = table[tbl_ptr[j] + _code(hi, nbr_ptr, nbr_idx, x)]
            if math.isnan(p_lo) or math.isnan(p_hi):
                return INADMISSIBLE, int(x)
            lo[x] = 1 if u < p_lo else -1
            hi[x] = 1 if u < p_hi else -1
            if check_order and lo[x] > hi[x]:
                return ORDER_VIOLATION, int(x)
    return OK, -1


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def label(member, nbr_ptr, nbr_idx):
    """Union-find labeling of the sites where ``member`` is true.

    Labels are canonical: each cluster is labeled by its smallest site index.
    Non-members get -1.
    """
    n = member.shape[0]
    parent = list(range(n))
    for x in range(n):
        if not member[x]:
            continue
        for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
            y = nbr_idx[j]
            if y < x and member[y]:
                rx = _find(parent, x)
                ry = _find(parent, y)
                if rx != ry:
                    if rx < ry:
                        parent[ry] = rx
                    else:
                        parent[rx] = ry
    out = np.full(n, -1, dtype=np.int32)
    for x in range(n):
        if member[x]:
            out[x] = _find(parent, x)
    return out
