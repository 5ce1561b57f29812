# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_fallback`` for the reference semantics."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF OK = 0
DEF INADMISSIBLE = 1
DEF ORDER_VIOLATION = 2


cdef inline int _code(const signed char[::1] spins, const int[::1] nbr_ptr,
                      const int[::1] nbr_idx, int x) nogil:
    cdef int c = 0
    cdef int k = 0
    cdef int j
    for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
        if spins[nbr_idx[j]] > 0:
            c |= 1 << k
        k += 1
    return c


def sweeps(signed char[::1] spins, const int[::1] order, const int[::1] nbr_ptr,
           const int[::1] nbr_idx, const long long[::1] tbl_ptr,
           const double[::1] table, const double[:, ::1] uniforms):
    cdef Py_ssize_t n_sweeps = uniforms.shape[0]
    cdef Py_ssize_t n = uniforms.shape[1]
    cdef Py_ssize_t s, j
    cdef int x
    cdef double p
    with nogil:
        for s in range(n_sweeps):
            for j in range(n):
                x = order[j]
                p = table[tbl_ptr[j] + _code(spins, nbr_ptr, nbr_idx, x)]
                if p != p:
                    with gil:
                        return INADMISSIBLE, x
                spins[x] = 1 if uniforms[s, j] < p else -1
    return OK, -1


def coupled_sweeps(signed char[::1] lo, signed char[::1] hi, const int[::1] order,
                   const int[::1] nbr_ptr, const int[::1] nbr_idx,
                   const long long[::1] tbl_ptr, const double[::1] table,
                   const double[:, ::1] uniforms, bint check_order):
    cdef Py_ssize_t n_sweeps = uniforms.shape[0]
    cdef Py_ssize_t n = uniforms.shape[1]
    cdef Py_ssize_t s, j
    cdef int x
    cdef double u, p_lo, p_hi
    with nogil:
        for s in range(n_sweeps):
            for j in range(n):
                x = order[j]
                u = uniforms[s, j]
                p_lo = table[tbl_ptr[j] + _code(lo, nbr_ptr, nbr_idx, x)]
                p_hi = table[tbl_ptr[j] + _code(hi, nbr_ptr, nbr_idx, x)]
                if p_lo != p_lo or p_hi != p_hi:
                    with gil:
                        return INADMISSIBLE, x
                lo[x] = 1 if u < p_lo else -1
                hi[x] = 1 if u < p_hi else -1
                if check_order and lo[x] > hi[x]:
                    with gil:
                        return ORDER_VIOLATION, x
    return OK, -1


cdef inline int _find(int[::1] parent, int x) nogil:
    cdef int root = x
    cdef int nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def label(member, const int[::1] nbr_ptr, const int[::1] nbr_idx):
    cdef const unsigned char[::1] m = np.ascontiguousarray(member, dtype=np.uint8)
    cdef Py_ssize_t n = m.shape[0]
    cdef cnp.ndarray[int, ndim=1] parent_arr = np.arange(n, dtype=np.int32)
    cdef int[::1] parent = parent_arr
    cdef cnp.ndarray[int, ndim=1] out_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef int x, y, j, rx, ry
    with nogil:
        for x in range(n):
            if not m[x]:
                continue
            for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
                y = nbr_idx[j]
                if y < x and m[y]:
                    rx = _find(parent, x)
                    ry = _find(parent, y)
                    if rx != ry:
                        if rx < ry:
                            parent[ry] = rx
                        else:
                            parent[rx] = ry
        for x in range(n):
            if m[x]:
                out[x] = _find(parent, x)
    return out_arr
