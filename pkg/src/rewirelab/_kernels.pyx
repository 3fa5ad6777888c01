# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  ``_kernels_py`` holds the reference twins; both must
return identical results for identical inputs."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY, NAN

cnp.import_array()


def louvain_move_nodes(const long long[::1] indptr, const long long[::1] indices,
                       const double[::1] weights, const double[::1] strengths,
                       long long[::1] comm, const long long[::1] order,
                       double two_m, double resolution, int max_passes=1000,
                       double eps=1e-10):
    """Louvain local-moving phase, in place on ``comm``. Returns the move count."""
    cdef Py_ssize_t n = strengths.shape[0]
    cdef double[::1] tot = np.zeros(n, dtype=np.float64)
    cdef double[::1] wc = np.zeros(n, dtype=np.float64)
    cdef char[::1] flag = np.zeros(n, dtype=np.int8)
    cdef long long[::1] touched = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t ntouched, idx, t, i, j
    cdef long long p, ci, c, best
    cdef double ki, gain, best_gain
    cdef long long moves = 0, pass_moves
    cdef int passes = 0

    if two_m <= 0:
        return 0
    for i in range(n):
        tot[comm[i]] += strengths[i]

    while passes < max_passes:
        passes += 1
        pass_moves = 0
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            ki = strengths[i]
            ntouched = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                c = comm[j]
                if not flag[c]:
                    flag[c] = 1
                    touched[ntouched] = c
                    ntouched += 1
                wc[c] += weights[p]
            tot[ci] -= ki
            best = ci
            best_gain = wc[ci] - resolution * tot[ci] * ki / two_m
            for t in range(ntouched):
                c = touched[t]
                gain = wc[c] - resolution * tot[c] * ki / two_m
                if gain > best_gain + eps or (gain >= best_gain - eps and c < best):
                    best = c
                    best_gain = gain
            tot[best] += ki
            if best != ci:
                comm[i] = best
                pass_moves += 1
            for t in range(ntouched):
                c = touched[t]
                wc[c] = 0.0
                flag[c] = 0
        moves += pass_moves
        if pass_moves == 0:
            break
    return moves


def proxy_best_nonedge(const double[::1] f, double lam,
                       const long long[::1] indptr, const long long[::1] indices,
                       double sign, double rel_tol=1e-12):
    """Scan every non-edge ``u < v`` and return ``(u, v, score)`` minimising
    ``sign * ((f_u - f_v)^2 - lam * (f_u^2 + f_v^2))``.

    Scores within ``rel_tol`` of the optimum count as ties and the
    lexicographically smallest pair wins.  ``(-1, -1, nan)`` when the graph
    is complete.
    """
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t u, v
    cdef long long p, end
    cdef double fu, fv, d, s, best = INFINITY, thr

    for u in range(n):
        fu = f[u]
        p = indptr[u]
        end = indptr[u + 1]
        while p < end and indices[p] <= u:
            p += 1
        for v in range(u + 1, n):
            if p < end and indices[p] == v:
                p += 1
                continue
            fv = f[v]
            d = fu - fv
            s = sign * (d * d - lam * (fu * fu + fv * fv))
            if s < best:
                best = s
    if best == INFINITY:
        return -1, -1, NAN

    thr = best + rel_tol * max(1.0, fabs(best))
    for u in range(n):
        fu = f[u]
        p = indptr[u]
        end = indptr[u + 1]
        while p < end and indices[p] <= u:
            p += 1
        for v in range(u + 1, n):
            if p < end and indices[p] == v:
                p += 1
                continue
            fv = f[v]
            d = fu - fv
            s = sign * (d * d - lam * (fu * fu + fv * fv))
            if s <= thr:
                return u, v, sign * s
    return -1, -1, NAN
