"""Spectral gap of the normalized Laplacian and the closed-form SBM gaps.

The gap is the second-smallest eigenvalue of ``L = I - D^-1/2 A D^-1/2``.
It is found by power iteration on the flipped operator ``2I - L`` with the
trivial eigenvector ``D^1/2 1`` projected out after every step.  Degree-0
nodes get an identity row in ``L`` (eigenvalue 1) and carry no weight in the
deflation vector.

A graph whose non-isolated part splits into several components has a
repeated zero eigenvalue; in that case the gap is 0 and the returned
vector is a component-indicator contrast (largest-volume component against
the rest) so that the first-order proxies below still have something to
work with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as sla

from .errors import NonConvergenceError, ValidationError
from .graph import Graph

#: fixed warm-started iterations after each accepted edge modification
REFRESH_ITERS = 15
#: full re-solve period (in modifications) during greedy proxy rewiring
RESOLVE_EVERY = 25
RITZ_EVERY = 20
RITZ_BLOCK = 6


@dataclass(frozen=True)
class SpectralState:
    gap: float
    fiedler: np.ndarray
    residual: float
    iterations: int = 0
    connected: bool = True
    num_components: int = 1
    method: str = "power"

    def to_dict(self) -> dict:
        return {
            "gap": float(self.gap),
            "residual": float(self.residual),
            "connected": bool(self.connected),
            "iters": int(self.iterations),
            "num_components": int(self.num_components),
            "method": self.method,
        }


class _FlippedOperator:
    """Matvecs with ``L`` and ``2I - L`` plus the deflation projector."""

    def __init__(self, g: Graph):
        self.n = g.num_nodes
        deg = g.degrees.astype(np.float64)
        self.sqrt_deg = np.sqrt(deg)
        self.inv_sqrt = np.zeros(self.n)
        nz = deg > 0
        self.inv_sqrt[nz] = 1.0 / self.sqrt_deg[nz]
        self.adj = g.adjacency()
        norm = np.linalg.norm(self.sqrt_deg)
        self.b = self.sqrt_deg / norm if norm > 0 else None

        if g.num_edges:
            _, labels = csgraph.connected_components(self.adj, directed=False)
            vol = np.bincount(labels, weights=deg)
            comps = np.flatnonzero(vol > 0)
        else:
            labels, vol, comps = np.zeros(self.n, dtype=np.int64), np.zeros(1), np.array([], dtype=np.int64)
        self.labels, self.vol, self.components = labels, vol, comps

    @property
    def num_components(self) -> int:
        return int(self.components.size)

    def normalized_adj(self, x):
        return self.inv_sqrt * (self.adj @ (self.inv_sqrt * x))

    def laplacian(self, x):
        return x - self.normalized_adj(x)

    def deflate(self, x):
        if self.b is not None:
            x = x - (self.b @ x) * self.b
        return x

    def rayleigh(self, x):
        lx = self.laplacian(x)
        lam = float(x @ lx)
        return lam, float(np.linalg.norm(lx - lam * x))


def normalized_laplacian(g: Graph):
    """Sparse ``I - D^-1/2 A D^-1/2`` with identity rows for degree-0 nodes."""
    import scipy.sparse as sp

    op = _FlippedOperator(g)
    dinv = sp.diags(op.inv_sqrt)
    return (sp.identity(g.num_nodes, format="csr") - dinv @ op.adj @ dinv).tocsr()


def _fix_sign(x):
    i = int(np.argmax(np.abs(x)))
    return -x if x[i] < 0 else x


def _start_vector(n, seed):
    return np.random.default_rng(seed).standard_normal(n)


def _disconnected_state(op: _FlippedOperator) -> SpectralState:
    comps = op.components
    # largest volume first, lowest component label on ties
    order = sorted(comps.tolist(), key=lambda c: (-op.vol[c], c))
    big = order[0]
    in_big = op.labels == big
    rest = np.isin(op.labels, order[1:])
    f = np.zeros(op.n)
    f[in_big] = op.sqrt_deg[in_big] / op.vol[big]
    f[rest] = -op.sqrt_deg[rest] / op.vol[order[1:]].sum()
    f = _fix_sign(f / np.linalg.norm(f))
    _, res = op.rayleigh(f)
    return SpectralState(0.0, f, res, 0, False, op.num_components, "components")


def _ritz(op: _FlippedOperator, hist):
    """Best approximation to the gap eigenvector within span(hist)."""
    Q, R = np.linalg.qr(np.stack(hist, axis=1))
    d = np.abs(np.diag(R))
    Q = Q[:, d > 1e-10 * d[0]]
    LQ = np.stack([op.laplacian(q) for q in Q.T], axis=1)
    w, V = np.linalg.eigh(Q.T @ LQ)
    x = op.deflate(Q @ V[:, 0])
    return x / np.linalg.norm(x)


def _power(op: _FlippedOperator, x, tol, max_iter, raise_on_fail=True):
    """Deflated power iteration on ``2I - L``.  Every ``RITZ_EVERY`` steps
    the last ``RITZ_BLOCK`` iterates are combined by a Rayleigh-Ritz step,
    which removes the slow tail when lambda_2 and lambda_3 nearly coincide."""
    x = op.deflate(np.asarray(x, dtype=np.float64))
    nrm = np.linalg.norm(x)
    if nrm == 0:
        x = op.deflate(_start_vector(op.n, 0))
        nrm = np.linalg.norm(x)
    x = x / nrm
    it = 0
    hist = []
    while True:
        nx = op.normalized_adj(x)
        lx = x - nx
        lam = float(x @ lx)
        res = float(np.linalg.norm(lx - lam * x))
        if res <= tol or it >= max_iter:
            break
        y = op.deflate(x + nx)
        x = y / np.linalg.norm(y)
        it += 1
        hist.append(x)
        if len(hist) > RITZ_BLOCK:
            hist.pop(0)
        if it % RITZ_EVERY == 0 and len(hist) == RITZ_BLOCK:
            x = _ritz(op, hist)
            hist = [x]
    if res > tol and raise_on_fail:
        best = SpectralState(min(max(lam, 0.0), 2.0), _fix_sign(x), res, it)
        raise NonConvergenceError(
            f"power iteration did not reach residual {tol:g} in {max_iter} iterations "
            f"(residual {res:.3g}, gap estimate {lam:.6g})",
            estimate=best, residual=res, iterations=it,
        )
    return lam, x, res, it


def _lanczos(op: _FlippedOperator, x0, tol, max_iter):
    n = op.n
    if n <= 12:
        L = np.array([op.laplacian(e) for e in np.eye(n)]).T
        if op.b is not None:
            P = np.eye(n) - np.outer(op.b, op.b)
            L = P @ L @ P + 4.0 * np.outer(op.b, op.b)
        w, V = np.linalg.eigh((L + L.T) / 2)
        x = V[:, 0]
        lam, res = op.rayleigh(x)
        return lam, x, res, 1

    def mv(v):
        v = op.deflate(np.ravel(v))
        return op.deflate(v + op.normalized_adj(v))

    lin = sla.LinearOperator((n, n), matvec=mv, dtype=np.float64)
    v0 = op.deflate(np.asarray(x0, dtype=np.float64))
    if not np.any(v0):
        v0 = op.deflate(_start_vector(n, 0))
    try:
        vals, vecs = sla.eigsh(lin, k=1, which="LA", v0=v0, tol=0, maxiter=max_iter)
    except sla.ArpackNoConvergence as exc:
        raise NonConvergenceError("Lanczos did not converge", iterations=max_iter) from exc
    x = op.deflate(vecs[:, 0])
    x /= np.linalg.norm(x)
    lam, res = op.rayleigh(x)
    if res > tol:
        # polish; Lanczos residuals sit near machine precision times ||L||
        lam, x, res, _ = _power(op, x, tol, 50, raise_on_fail=False)
    if res > tol:
        raise NonConvergenceError(
            f"Lanczos residual {res:.3g} above tolerance {tol:g}",
            estimate=SpectralState(lam, _fix_sign(x), res, max_iter, method="lanczos"),
            residual=res, iterations=max_iter,
        )
    return lam, x, res, 1


def spectral_gap(g: Graph, tol: float = 1e-8, max_iter: int | None = None,
                 method: str = "power", x0=None, seed: int = 0) -> SpectralState:
    """Second-smallest normalized-Laplacian eigenpair of ``g``.

    ``method`` is ``"power"`` (deflated power iteration on ``2I - L``) or
    ``"lanczos"`` (ARPACK on the same deflated operator).  ``max_iter``
    defaults to ``10 N``.  ``x0`` warm-starts
    the iteration.  Raises NonConvergenceError carrying the best estimate
    when the residual ``||L f - gap f||`` stays above ``tol``.
    """
    if g.num_nodes < 2:
        raise ValidationError("spectral gap needs at least 2 nodes")
    if method not in ("power", "lanczos"):
        raise ValidationError(f"unknown eigensolver {method!r}")
    if max_iter is None:
        max_iter = 10 * g.num_nodes
    op = _FlippedOperator(g)
    if op.num_components >= 2:
        return _disconnected_state(op)
    start = _start_vector(g.num_nodes, seed) if x0 is None else x0
    if method == "power":
        lam, x, res, it = _power(op, start, tol, max_iter)
    else:
        lam, x, res, it = _lanczos(op, start, tol, max_iter)
    lam = min(max(lam, 0.0), 2.0)
    return SpectralState(lam, _fix_sign(x), res, it, True, op.num_components, method)


def refine(g: Graph, state: SpectralState, iters: int = REFRESH_ITERS) -> SpectralState:
    """Fixed number of warm-started power steps; never raises on residual."""
    op = _FlippedOperator(g)
    if op.num_components >= 2:
        return _disconnected_state(op)
    lam, x, res, it = _power(op, state.fiedler, 0.0, iters, raise_on_fail=False)
    return SpectralState(min(max(lam, 0.0), 2.0), _fix_sign(x), res, it, True, op.num_components, "refine")


def _check_prob(name, x, closed=False):
    ok = 0 <= x <= 1 if closed else 0 < x < 1
    if not ok:
        raise ValidationError(f"{name}={x} outside {'[0, 1]' if closed else '(0, 1)'}")


def expected_gap_two_block(N: int, p: float, q: float) -> float:
    """Gap of the expected two-block SBM adjacency (unit diagonal)."""
    if N % 2 or N <= 2:
        raise ValidationError("N must be even and greater than 2")
    _check_prob("p", p)
    _check_prob("q", q)
    h = N / 2
    return ((q - p) * h + (1 - p)) / ((q + p) * h + (1 - p)) + 1


def expected_gap_k_block(N: int, k: int, p: float, q: float) -> float:
    """Gap of the expected ``k``-block SBM adjacency with equal blocks."""
    if k < 2:
        raise ValidationError("k must be at least 2")
    if N % k:
        raise ValidationError(f"k={k} does not divide N={N}")
    _check_prob("p", p)
    _check_prob("q", q)
    s = N / k
    return ((q - p) * s + (1 - p)) / (s * p + N * (k - 1) / k * q + (1 - p)) + 1


def expected_gap_unequal(N: int, M: int, p: float, q: float) -> float:
    """Gap of the expected two-block SBM adjacency with block sizes ``M`` and ``N - M``."""
    if not (N / 2 <= M < N):
        raise ValidationError(f"larger block size M={M} must satisfy N/2 <= M < N")
    _check_prob("p", p)
    _check_prob("q", q)
    return ((q - p) * M + (1 - p)) / (1 + (M - 1) * p + (N - M) * q) + 1


def expected_gap_blocks(sizes, p: float, q: float) -> float:
    """Exact second-smallest eigenvalue of the normalized Laplacian of the
    expected block adjacency (``p`` inside blocks, ``q`` across, ones on the
    diagonal) for arbitrary block sizes.

    Block-constant vectors reduce to a ``k x k`` quotient problem; vectors
    summing to zero inside one block give ``1 - (1 - p) / D_i``.  The
    closed forms above agree with this value only up to ``O(1/N)`` (equal
    blocks) and can differ by far more for unequal blocks.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    if sizes.ndim != 1 or sizes.size < 2 or np.any(sizes < 1):
        raise ValidationError("need at least two blocks of positive size")
    _check_prob("p", p, closed=True)
    _check_prob("q", q, closed=True)
    n = sizes.sum()
    deg = 1 + (sizes - 1) * p + (n - sizes) * q
    w = np.sqrt(sizes / deg)
    C = np.full((sizes.size, sizes.size), q)
    np.fill_diagonal(C, p)
    B = w[:, None] * C * w[None, :]
    B[np.diag_indices_from(B)] += (1 - p) / deg
    vals = list(1.0 - np.linalg.eigvalsh(B))
    vals += [1.0 - (1 - p) / d for s, d in zip(sizes, deg) if s >= 2]
    return float(sorted(vals)[1])


def proxy_gap_after_add(s: SpectralState, u: int, v: int) -> float:
    """First-order estimate of the gap after adding ``(u, v)``."""
    fu, fv, lam = s.fiedler[u], s.fiedler[v], s.gap
    return float(lam + ((fu - fv) ** 2 - lam * (fu * fu + fv * fv)))


def proxy_gap_after_del(s: SpectralState, u: int, v: int) -> float:
    """First-order estimate of the gap after deleting ``(u, v)``."""
    fu, fv, lam = s.fiedler[u], s.fiedler[v], s.gap
    return float(lam - ((fu - fv) ** 2 - lam * (fu * fu + fv * fv)))
