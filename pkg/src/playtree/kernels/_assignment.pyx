# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assignment kernels: Hungarian solver and batched play alignment.

Mirrors the contract of ``_fallback.py``; both backends produce identical
assignments (totals may differ in the last float bits from accumulation
order).
"""

from libc.stdlib cimport malloc, free
from libc.math cimport sqrt, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef int _solve(const double* a, Py_ssize_t m_size, long* mapping,
                double* u, double* v) noexcept nogil:
    # Shortest augmenting path with potentials; column 0 is a sentinel.
    # u, v are caller-provided buffers of length m_size + 1.
    cdef Py_ssize_t i, j, i0, j0, j1
    cdef double delta, cur
    cdef int* p = <int*> malloc((m_size + 1) * sizeof(int))
    cdef int* way = <int*> malloc((m_size + 1) * sizeof(int))
    cdef double* minv = <double*> malloc((m_size + 1) * sizeof(double))
    cdef char* used = <char*> malloc((m_size + 1) * sizeof(char))
    if p == NULL or way == NULL or minv == NULL or used == NULL:
        if p != NULL: free(p)
        if way != NULL: free(way)
        if minv != NULL: free(minv)
        if used != NULL: free(used)
        return -1
    for j in range(m_size + 1):
        u[j] = 0.0
        v[j] = 0.0
        p[j] = 0
        way[j] = 0
    for i in range(1, m_size + 1):
        p[0] = <int> i
        j0 = 0
        for j in range(m_size + 1):
            minv[j] = INFINITY
            used[j] = 0
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INFINITY
            j1 = 0
            for j in range(1, m_size + 1):
                if not used[j]:
                    cur = a[(i0 - 1) * m_size + (j - 1)] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = <int> j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m_size + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    for j in range(1, m_size + 1):
        mapping[p[j] - 1] = j - 1
    free(p)
    free(way)
    free(minv)
    free(used)
    return 0


cdef int _has_alt_optimum(const double* a, Py_ssize_t m_size,
                          const double* u, const double* v,
                          const long* mapping) noexcept nogil:
    # Alternate optima exist iff the zero reduced-cost graph admits an
    # alternating cycle: row i steals row i2's matched column along a zero
    # edge.  Eliminate rows with no outgoing steal edges; survivors cycle.
    cdef Py_ssize_t i, j, k
    cdef char* adj = <char*> malloc(m_size * m_size * sizeof(char))
    cdef int* col_row = <int*> malloc(m_size * sizeof(int))
    cdef char* alive = <char*> malloc(m_size * sizeof(char))
    if adj == NULL or col_row == NULL or alive == NULL:
        if adj != NULL: free(adj)
        if col_row != NULL: free(col_row)
        if alive != NULL: free(alive)
        return 1  # be conservative on allocation failure
    for i in range(m_size):
        col_row[mapping[i]] = <int> i
        alive[i] = 1
    for i in range(m_size):
        for k in range(m_size):
            adj[i * m_size + k] = 0
        for j in range(m_size):
            if j != mapping[i] and a[i * m_size + j] - u[i + 1] - v[j + 1] == 0.0:
                adj[i * m_size + col_row[j]] = 1
    cdef int changed = 1
    cdef int deg
    cdef int remaining = <int> m_size
    while changed:
        changed = 0
        for i in range(m_size):
            if alive[i]:
                deg = 0
                for k in range(m_size):
                    if alive[k] and adj[i * m_size + k]:
                        deg += 1
                if deg == 0:
                    alive[i] = 0
                    remaining -= 1
                    changed = 1
    free(adj)
    free(col_row)
    free(alive)
    return 1 if remaining > 0 else 0


def hungarian(cost):
    """Solve a square min-cost assignment problem exactly.

    Returns ``(mapping, total, ambiguous)``; see the fallback docstring.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] a = \
        np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t m_size = a.shape[0]
    if a.shape[1] != m_size:
        raise ValueError(f"cost matrix must be square, got {a.shape[0]}x{a.shape[1]}")
    if not np.isfinite(a).all():
        raise ValueError("cost matrix contains non-finite entries")
    cdef cnp.ndarray[cnp.int64_t, ndim=1] mapping = np.empty(m_size, dtype=np.int64)
    cdef double* u = <double*> malloc((m_size + 1) * sizeof(double))
    cdef double* v = <double*> malloc((m_size + 1) * sizeof(double))
    if u == NULL or v == NULL:
        if u != NULL: free(u)
        if v != NULL: free(v)
        raise MemoryError()
    cdef int rc
    try:
        rc = _solve(<const double*> a.data, m_size, <long*> mapping.data, u, v)
        if rc != 0:
            raise MemoryError()
        total = float(a[np.arange(m_size), mapping].sum())
        amb = _has_alt_optimum(<const double*> a.data, m_size, u, v,
                               <const long*> mapping.data)
    finally:
        free(u)
        free(v)
    return mapping, total, bool(amb)


def batch_align(template, plays, squared):
    """Align every play in a batch against one template.

    template: (M, F, 2); plays: (N, M, F, 2).  Returns ``(perms, costs,
    ambiguous)`` of shapes (N, M), (N,), (N,).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=3, mode="c"] t = \
        np.ascontiguousarray(template, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=4, mode="c"] x = \
        np.ascontiguousarray(plays, dtype=np.float64)
    cdef Py_ssize_t m_size = t.shape[0]
    cdef Py_ssize_t n_frames = t.shape[1]
    cdef Py_ssize_t n_plays = x.shape[0]
    if x.shape[1] != m_size or x.shape[2] != n_frames or t.shape[2] != 2 or x.shape[3] != 2:
        raise ValueError("template/plays shape mismatch")
    cdef bint sq_metric = bool(squared)

    cdef cnp.ndarray[cnp.int64_t, ndim=2, mode="c"] perms = \
        np.empty((n_plays, m_size), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] costs = np.empty(n_plays, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flags = np.zeros(n_plays, dtype=np.uint8)

    cdef double* a = <double*> malloc(m_size * m_size * sizeof(double))
    cdef double* u = <double*> malloc((m_size + 1) * sizeof(double))
    cdef double* v = <double*> malloc((m_size + 1) * sizeof(double))
    if a == NULL or u == NULL or v == NULL:
        if a != NULL: free(a)
        if u != NULL: free(u)
        if v != NULL: free(v)
        raise MemoryError()

    cdef const double* tp = <const double*> t.data
    cdef const double* xp = <const double*> x.data
    cdef long* pp = <long*> perms.data
    cdef double* cp = <double*> costs.data
    cdef unsigned char* fp = <unsigned char*> flags.data

    cdef Py_ssize_t i, m, n, f
    cdef Py_ssize_t play_stride = m_size * n_frames * 2
    cdef const double* xi
    cdef double acc, dx, dy, d2, total
    cdef int rc = 0
    with nogil:
        for i in range(n_plays):
            xi = xp + i * play_stride
            for m in range(m_size):
                for n in range(m_size):
                    acc = 0.0
                    for f in range(n_frames):
                        dx = tp[(m * n_frames + f) * 2] - xi[(n * n_frames + f) * 2]
                        dy = tp[(m * n_frames + f) * 2 + 1] - xi[(n * n_frames + f) * 2 + 1]
                        d2 = dx * dx + dy * dy
                        if sq_metric:
                            acc += d2
                        else:
                            acc += sqrt(d2)
                    a[m * m_size + n] = acc
            rc = _solve(a, m_size, pp + i * m_size, u, v)
            if rc != 0:
                break
            total = 0.0
            for m in range(m_size):
                total += a[m * m_size + pp[i * m_size + m]]
            cp[i] = total
            if _has_alt_optimum(a, m_size, u, v, pp + i * m_size):
                fp[i] = 1
    free(a)
    free(u)
    free(v)
    if rc != 0:
        raise MemoryError()
    return perms, costs, flags
