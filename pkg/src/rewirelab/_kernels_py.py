"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``REWIRELAB_PURE_PYTHON`` is
set.  Arithmetic is ordered exactly as in the compiled code so both
backends agree bit for bit.
"""

import math

import numpy as np


def louvain_move_nodes(indptr, indices, weights, strengths, comm, order,
                       two_m, resolution, max_passes=1000, eps=1e-10):
    n = len(strengths)
    if two_m <= 0:
        return 0
    indptr = indptr.tolist()
    indices = indices.tolist()
    weights = weights.tolist()
    strengths_l = strengths.tolist()
    order = order.tolist()
    cm = comm.tolist()
    tot = [0.0] * n
    for i in range(n):
        tot[cm[i]] += strengths_l[i]
    wc = [0.0] * n
    flag = [False] * n

    moves = 0
    for _ in range(max_passes):
        pass_moves = 0
        for i in order:
            ci = cm[i]
            ki = strengths_l[i]
            touched = []
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                c = cm[j]
                if not flag[c]:
                    flag[c] = True
                    touched.append(c)
                wc[c] += weights[p]
            tot[ci] -= ki
            best = ci
            best_gain = wc[ci] - resolution * tot[ci] * ki / two_m
            for c in touched:
                gain = wc[c] - resolution * tot[c] * ki / two_m
                if gain > best_gain + eps or (gain >= best_gain - eps and c < best):
                    best = c
                    best_gain = gain
            tot[best] += ki
            if best != ci:
                cm[i] = best
                pass_moves += 1
            for c in touched:
                wc[c] = 0.0
                flag[c] = False
        moves += pass_moves
        if pass_moves == 0:
            break
    comm[:] = cm
    return moves


def _score_rows(f, f2, lam, sign, lo, hi, indptr, indices):
    fu = f[lo:hi, None]
    d = fu - f[None, :]
    s = sign * (d * d - lam * (f2[lo:hi, None] + f2[None, :]))
    rows = np.arange(lo, hi)
    s[np.arange(f.size)[None, :] <= rows[:, None]] = np.inf
    a, b = indptr[lo], indptr[hi]
    if b > a:
        r = np.repeat(rows - lo, np.diff(indptr[lo : hi + 1]))
        s[r, indices[a:b]] = np.inf
    return s


def proxy_best_nonedge(f, lam, indptr, indices, sign, rel_tol=1e-12, block=256):
    f = np.ascontiguousarray(f, dtype=np.float64)
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    n = f.size
    f2 = f * f
    best = math.inf
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        m = _score_rows(f, f2, lam, sign, lo, hi, indptr, indices).min(initial=math.inf)
        if m < best:
            best = float(m)
    if best == math.inf:
        return -1, -1, math.nan
    thr = best + rel_tol * max(1.0, abs(best))
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        s = _score_rows(f, f2, lam, sign, lo, hi, indptr, indices)
        hit = np.flatnonzero(s.ravel() <= thr)
        if hit.size:
            r, v = divmod(int(hit[0]), n)
            return lo + r, v, float(sign * s[r, v])
    return -1, -1, math.nan
