"""Rewiring algorithms: ComMa, FeaSt, ComFy and greedy proxy-spectral rewiring.

Every function returns an :class:`~rewirelab.graph.EdgeDelta` against the
input graph; nothing is modified in place.

FeaSt and ComFy rank candidates by the mean edge similarity the graph (or
the community pair) would have after the modification.  For additions that
rank is ``(mean * |E| + sim) / (|E| + 1)``, for deletions
``(mean * |E| - sim) / (|E| - 1)``; both are monotone in ``sim`` for a fixed
edge set, so candidates are ordered by ``sim`` directly (descending for
additions, ascending for deletions).  Similarities are rounded to
``SIM_DECIMALS`` places before ordering so that numerically equal values
tie exactly; ties go to the lexicographically smallest ``(u, v)``.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import NonConvergenceError, ValidationError
from .graph import EdgeDelta, Graph, Partition, apply_delta, as_features, combine_deltas
from .metrics import _unit_rows
from .spectral import RESOLVE_EVERY, REFRESH_ITERS, refine, spectral_gap

METHODS = ("HigherComMa", "LowerComMa", "FeaSt", "ComFy", "ProxyMin", "ProxyMax")
OPS = ("Add", "Del", "AddDel")

#: FeaSt switches to node sampling above this many nodes unless told otherwise
SAMPLING_THRESHOLD = 20_000
AUTO_SAMPLE_RATIO = 0.2
SIM_DECIMALS = 12
TIE_REL_TOL = 1e-12
#: ComMa enumerates candidate pairs below this many pairs, else rejection-samples
ENUMERATION_LIMIT = 2_000_000
_BLOCK_ENTRIES = 1 << 22

_ALIASES = {m.lower(): m for m in METHODS}
_ALIASES.update({"higher": "HigherComMa", "lower": "LowerComMa",
                 "proxy-min": "ProxyMin", "proxy-max": "ProxyMax",
                 "proxy_min": "ProxyMin", "proxy_max": "ProxyMax"})
_OP_ALIASES = {"add": "Add", "del": "Del", "delete": "Del", "adddel": "AddDel", "add-del": "AddDel"}


def normalize_method(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}") from None


def normalize_op(name: str) -> str:
    try:
        return _OP_ALIASES[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown op {name!r}; expected Add, Del or AddDel") from None


@dataclass(frozen=True)
class RewireRequest:
    """What to run.  ``k`` counts modifications per phase (AddDel runs both).

    ``sample_ratio=None`` lets FeaSt pick (full candidate set up to
    ``SAMPLING_THRESHOLD`` nodes, 20% node sample above).
    ``allow_isolation=None`` keeps each method's default: only proxy
    deletions guard against isolating nodes.
    """

    method: str
    op: str
    k: int
    seed: int = 0
    sample_ratio: float | None = None
    allow_isolation: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", normalize_method(self.method))
        object.__setattr__(self, "op", normalize_op(self.op))
        if int(self.k) != self.k or self.k < 0:
            raise ValidationError(f"k must be a non-negative integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if self.sample_ratio is not None and not (0 < self.sample_ratio <= 1):
            raise ValidationError(f"sample_ratio must lie in (0, 1], got {self.sample_ratio}")

    def params(self) -> dict:
        return {"method": self.method, "op": self.op, "k": self.k, "seed": self.seed,
                "sample_ratio": self.sample_ratio, "allow_isolation": self.allow_isolation}


def cosine_similarity(X, u: int, v: int) -> float:
    """Cosine of the feature vectors of ``u`` and ``v``; 0 if either is the zero vector."""
    xu = np.asarray(X[u], dtype=np.float64).ravel()
    xv = np.asarray(X[v], dtype=np.float64).ravel()
    nu, nv = math.sqrt(float(xu @ xu)), math.sqrt(float(xv @ xv))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(xu @ xv) / (nu * nv)


# --------------------------------------------------------------------- helpers

def _sorted_pairs(sims, us, vs, descending: bool) -> np.ndarray:
    key = -sims if descending else sims
    return np.lexsort((vs, us, key))


def _keep_best(sims, us, vs, k):
    """Indices of the ``k`` best (highest sim, then smallest (u, v))."""
    if sims.size <= k:
        return np.arange(sims.size)
    t = -np.partition(-sims, k - 1)[k - 1]
    above = np.flatnonzero(sims > t)
    ties = np.flatnonzero(sims == t)
    need = k - above.size
    if ties.size > need:
        ties = ties[np.lexsort((vs[ties], us[ties]))[:need]]
    return np.concatenate([above, ties])


def _top_nonedges(adj, U, rows, cols, k, triangular):
    """Top-``k`` most similar non-adjacent pairs ``(r, c)`` with ``r`` in
    ``rows`` and ``c`` in ``cols``.  ``triangular`` (requires rows == cols)
    restricts to pairs above the diagonal.  Returns ``(sims, u, v)`` sorted
    by rank, with ``u < v``.
    """
    empty = (np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64))
    if k <= 0 or rows.size == 0 or cols.size == 0:
        return empty
    pool = empty
    Ucols = U[cols]
    block = max(1, _BLOCK_ENTRIES // max(1, cols.size))
    for a in range(0, rows.size, block):
        r = rows[a : a + block]
        S = np.round(U[r] @ Ucols.T, SIM_DECIMALS)
        valid = np.ones(S.shape, dtype=bool)
        if triangular:
            valid &= np.arange(cols.size)[None, :] > (a + np.arange(r.size))[:, None]
        else:
            valid &= r[:, None] != cols[None, :]
        sub = adj[r][:, cols].tocoo()
        valid[sub.row, sub.col] = False
        ri, ci = np.nonzero(valid)
        if ri.size == 0:
            continue
        s = S[ri, ci]
        u, v = r[ri], cols[ci]
        u, v = np.minimum(u, v), np.maximum(u, v)
        s = np.concatenate([pool[0], s])
        u = np.concatenate([pool[1], u])
        v = np.concatenate([pool[2], v])
        keep = _keep_best(s, u, v, k)
        pool = (s[keep], u[keep], v[keep])
    order = _sorted_pairs(*pool, descending=True)[:k]
    return pool[0][order], pool[1][order], pool[2][order]


def _guarded(order_u, order_v, degrees, k, allow_isolation):
    """Walk candidates in order, skipping deletions that would isolate a node."""
    deg = np.array(degrees, dtype=np.int64)
    picked = []
    skipped = 0
    for u, v in zip(order_u.tolist(), order_v.tolist()):
        if len(picked) == k:
            break
        if not allow_isolation and (deg[u] <= 1 or deg[v] <= 1):
            skipped += 1
            continue
        deg[u] -= 1
        deg[v] -= 1
        picked.append((u, v))
    return picked, skipped


def _warn_short(what, k, got):
    if got < k:
        warnings.warn(f"{what}: only {got} of {k} requested modifications available", stacklevel=3)


def _check_partition(g, part):
    if part is None:
        raise ValidationError("partition is required for this method")
    if part.num_nodes != g.num_nodes:
        raise ValidationError(f"partition covers {part.num_nodes} nodes, graph has {g.num_nodes}")


# ------------------------------------------------------------------------ ComMa

def _edge_keys(g: Graph) -> np.ndarray:
    return g.edges[:, 0] * np.int64(g.num_nodes) + g.edges[:, 1]


def _enumerate_pairs(g, comm, same):
    n = g.num_nodes
    if same:
        us, vs = [], []
        for c in range(int(comm.max()) + 1):
            m = np.flatnonzero(comm == c)
            if m.size < 2:
                continue
            a, b = np.triu_indices(m.size, 1)
            us.append(m[a])
            vs.append(m[b])
        if not us:
            return np.empty((0, 2), dtype=np.int64)
        u, v = np.concatenate(us), np.concatenate(vs)
    else:
        u, v = np.triu_indices(n, 1)
        keep = comm[u] != comm[v]
        u, v = u[keep], v[keep]
    pairs = np.stack([u, v], axis=1).astype(np.int64)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    keys = pairs[:, 0] * np.int64(n) + pairs[:, 1]
    return pairs[~np.isin(keys, _edge_keys(g))]


def _reject_sample(g, comm, same, k, rng):
    n = g.num_nodes
    sizes = np.bincount(comm)
    weights = sizes * (sizes - 1) / 2.0
    members = [np.flatnonzero(comm == c) for c in range(sizes.size)]
    chosen: list = []
    seen = set()
    while len(chosen) < k:
        if same:
            c = int(rng.choice(sizes.size, p=weights / weights.sum()))
            a, b = rng.choice(members[c], 2, replace=False)
        else:
            a, b = rng.choice(n, 2, replace=False)
            if comm[a] == comm[b]:
                continue
        u, v = (int(a), int(b)) if a < b else (int(b), int(a))
        if (u, v) in seen or g.has_edge(u, v):
            continue
        seen.add((u, v))
        chosen.append((u, v))
    return chosen


def comma(g: Graph, part: Partition, direction: str, op: str, k: int, seed: int = 0,
          allow_isolation: bool = True) -> EdgeDelta:
    """Uniform random community-guided modification.

    Higher+Add adds intra-community non-edges, Higher+Del removes
    inter-community edges; Lower swaps the two predicates.  Draws are
    without replacement; when fewer than ``k`` candidates exist all of them
    are taken and the shortfall is recorded.
    """
    _check_partition(g, part)
    direction = direction.capitalize()
    if direction not in ("Higher", "Lower"):
        raise ValidationError(f"direction must be Higher or Lower, got {direction!r}")
    op = normalize_op(op)
    if op == "AddDel":
        raise ValidationError("comma handles a single phase; use rewire() for AddDel")
    rng = np.random.default_rng(seed)
    comm = part.assignment
    same = (direction == "Higher") == (op == "Add")
    prov = {"method": f"{direction}ComMa", "op": op, "k": k, "seed": seed}
    if k == 0:
        return EdgeDelta(provenance={**prov, "shortfall": 0})

    if op == "Del":
        e = g.edges
        cand = e[(comm[e[:, 0]] == comm[e[:, 1]]) == same]
        perm = rng.permutation(cand.shape[0])
        picked, _ = _guarded(cand[perm, 0], cand[perm, 1], g.degrees, k, allow_isolation)
        _warn_short(prov["method"] + "Del", k, len(picked))
        return EdgeDelta(deleted=tuple(picked), provenance={**prov, "shortfall": k - len(picked)})

    n = g.num_nodes
    sizes = np.bincount(comm)
    intra_pairs = int((sizes * (sizes - 1) // 2).sum())
    total = intra_pairs if same else n * (n - 1) // 2 - intra_pairs
    e = g.edges
    existing = int(((comm[e[:, 0]] == comm[e[:, 1]]) == same).sum())
    available = total - existing
    if available <= 0:
        warnings.warn(f"{prov['method']}Add: no candidate edges", stacklevel=2)
        return EdgeDelta(provenance={**prov, "shortfall": k})
    if total <= ENUMERATION_LIMIT or available < 0.05 * total or available <= k:
        pairs = _enumerate_pairs(g, comm, same)
        take = min(k, pairs.shape[0])
        idx = rng.choice(pairs.shape[0], size=take, replace=False)
        picked = [tuple(map(int, p)) for p in pairs[idx]]
    else:
        picked = _reject_sample(g, comm, same, k, rng)
    _warn_short(prov["method"] + "Add", k, len(picked))
    return EdgeDelta(added=tuple(picked), provenance={**prov, "shortfall": k - len(picked)})


# ------------------------------------------------------------------------ FeaSt

def _sample_nodes(n, ratio, seed):
    if ratio >= 1.0:
        return np.arange(n, dtype=np.int64)
    m = max(2, int(round(ratio * n)))
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=min(m, n), replace=False)).astype(np.int64)


def feast(g: Graph, X, op: str, k: int, sample_ratio: float | None = None, seed: int = 0,
          allow_isolation: bool = True) -> EdgeDelta:
    """Feature-similarity rewiring.

    Add takes the ``k`` most similar non-edges, Del removes the ``k`` least
    similar edges.  With ``sample_ratio < 1`` candidates are restricted to
    pairs inside a seeded uniform node sample.
    """
    X = as_features(X, g)
    op = normalize_op(op)
    if op == "AddDel":
        raise ValidationError("feast handles a single phase; use rewire() for AddDel")
    n = g.num_nodes
    ratio = sample_ratio
    if ratio is None:
        ratio = 1.0 if n <= SAMPLING_THRESHOLD else AUTO_SAMPLE_RATIO
    nodes = _sample_nodes(n, ratio, seed)
    prov = {"method": "FeaSt", "op": op, "k": k, "sample_ratio": ratio, "seed": seed}
    U = _unit_rows(X)

    if op == "Add":
        sims, us, vs = _top_nonedges(g.adjacency(), U, nodes, nodes, k, triangular=True)
        picked = list(zip(us.tolist(), vs.tolist()))
        _warn_short("FeaStAdd", k, len(picked))
        return EdgeDelta(added=tuple(picked), provenance={**prov, "shortfall": k - len(picked)})

    e = g.edges
    if ratio < 1.0:
        inside = np.zeros(n, dtype=bool)
        inside[nodes] = True
        e = e[inside[e[:, 0]] & inside[e[:, 1]]]
    sims = np.round(np.einsum("ij,ij->i", U[e[:, 0]], U[e[:, 1]]), SIM_DECIMALS)
    order = _sorted_pairs(sims, e[:, 0], e[:, 1], descending=False)
    picked, skipped = _guarded(e[order, 0], e[order, 1], g.degrees, k, allow_isolation)
    _warn_short("FeaStDel", k, len(picked))
    return EdgeDelta(deleted=tuple(picked),
                     provenance={**prov, "shortfall": k - len(picked), "isolation_skips": skipped})


# ------------------------------------------------------------------------ ComFy

def comfy_budgets(part: Partition, k: int) -> dict[tuple[int, int], int]:
    """Per community-pair budgets ``round(k * |C_i||C_j| / sum of areas)``, ``i <= j``."""
    sizes = part.sizes().astype(np.float64)
    kc = sizes.size
    areas = {(i, j): sizes[i] * sizes[j] for i in range(kc) for j in range(i, kc)}
    total = sum(areas.values())
    return {pair: int(round(k * a / total)) for pair, a in areas.items()}


def comfy(g: Graph, X, part: Partition, op: str, k: int, allow_isolation: bool = True) -> EdgeDelta:
    """Feature-similarity rewiring spread over community pairs.

    Each pair ``(i, j)``, ``i <= j``, gets a budget proportional to
    ``|C_i| * |C_j|`` and contributes its own top candidates: most similar
    bridging non-edges for Add, least similar bridging edges for Del.  Pairs
    short of candidates forfeit the rest of their budget.
    """
    X = as_features(X, g)
    _check_partition(g, part)
    op = normalize_op(op)
    if op == "AddDel":
        raise ValidationError("comfy handles a single phase; use rewire() for AddDel")
    budgets = comfy_budgets(part, k) if k > 0 else {}
    U = _unit_rows(X)
    comm = part.assignment
    members = [part.members(c) for c in range(part.num_communities)]
    picked: list = []
    realized = {}

    if op == "Add":
        adj = g.adjacency()
        for (i, j), b in budgets.items():
            if b <= 0:
                continue
            _, us, vs = _top_nonedges(adj, U, members[i], members[j], b, triangular=(i == j))
            realized[(i, j)] = int(us.size)
            picked.extend(zip(us.tolist(), vs.tolist()))
        kind = "added"
    else:
        e = g.edges
        ci, cj = comm[e[:, 0]], comm[e[:, 1]]
        lo, hi = np.minimum(ci, cj), np.maximum(ci, cj)
        sims = np.round(np.einsum("ij,ij->i", U[e[:, 0]], U[e[:, 1]]), SIM_DECIMALS)
        deg = np.array(g.degrees, dtype=np.int64)
        for (i, j), b in budgets.items():
            if b <= 0:
                continue
            sel = np.flatnonzero((lo == i) & (hi == j))
            order = sel[_sorted_pairs(sims[sel], e[sel, 0], e[sel, 1], descending=False)]
            got, _ = _guarded(e[order, 0], e[order, 1], deg, b, allow_isolation)
            for u, v in got:
                deg[u] -= 1
                deg[v] -= 1
            realized[(i, j)] = len(got)
            picked.extend(got)
        kind = "deleted"

    budget_total = int(sum(budgets.values()))
    prov = {"method": "ComFy", "op": op, "k": k, "budget_total": budget_total,
            "realized": len(picked),
            "pairs": [[i, j, b, realized.get((i, j), 0)] for (i, j), b in budgets.items() if b > 0]}
    if len(picked) < budget_total:
        warnings.warn(f"ComFy{op}: realized {len(picked)} of {budget_total} budgeted modifications",
                      stacklevel=2)
    return EdgeDelta(**{kind: tuple(picked)}, provenance=prov)


# ------------------------------------------------------------------- proxy gap

def _solve(g, x0=None, tol=1e-8):
    try:
        return spectral_gap(g, tol=tol, x0=x0)
    except NonConvergenceError:
        return spectral_gap(g, tol=tol, x0=x0, method="lanczos")


def _best_edge_for_deletion(g, state, objective, allow_isolation, tie=TIE_REL_TOL):
    e = g.edges
    f, lam = state.fiedler, state.gap
    fu, fv = f[e[:, 0]], f[e[:, 1]]
    d = fu - fv
    score = d * d - lam * (fu * fu + fv * fv)
    # proxy after deletion is lam - score: Min wants the largest score
    key = -score if objective == "Min" else score
    if not allow_isolation:
        ok = (g.degrees[e[:, 0]] > 1) & (g.degrees[e[:, 1]] > 1)
        key = np.where(ok, key, np.inf)
    best = key.min(initial=np.inf)
    if not np.isfinite(best):
        return None
    thr = best + tie * max(1.0, abs(best))
    i = int(np.flatnonzero(key <= thr)[0])
    return int(e[i, 0]), int(e[i, 1])


def proxy_rewire(g: Graph, objective: str, op: str, k: int, allow_isolation: bool = False,
                 tol: float = 1e-8) -> EdgeDelta:
    """Greedy first-order spectral-gap rewiring.

    Each step scores every candidate with the proxy
    ``gap +/- ((f_u - f_v)^2 - gap (f_u^2 + f_v^2))`` and applies the
    arg-min (``objective="Min"``) or arg-max (``"Max"``).  After each
    step the eigenpair gets ``REFRESH_ITERS`` warm-started power steps and
    is fully re-solved every ``RESOLVE_EVERY`` modifications.

    Scores closer than the eigensolver tolerance count as tied (the
    eigenvector is only that accurate) and go to the smallest ``(u, v)``.
    """
    objective = objective.capitalize()
    if objective not in ("Min", "Max"):
        raise ValidationError(f"objective must be Min or Max, got {objective!r}")
    op = normalize_op(op)
    if op == "AddDel":
        raise ValidationError("proxy_rewire handles a single phase; use rewire() for AddDel")
    prov = {"method": f"Proxy{objective}", "op": op, "k": k}
    if k == 0:
        return EdgeDelta(provenance={**prov, "shortfall": 0})
    state = _solve(g, tol=tol)
    prov["initial_gap"] = state.gap
    prov["initially_connected"] = state.connected
    cur = g
    picked = []
    sign = 1.0 if objective == "Min" else -1.0
    tie = max(TIE_REL_TOL, tol)
    for step in range(k):
        if op == "Add":
            u, v, _ = kernels.proxy_best_nonedge(
                np.ascontiguousarray(state.fiedler), float(state.gap), cur.indptr, cur.indices, sign, tie,
            )
            if u < 0:
                break
            d = EdgeDelta(added=((u, v),))
        else:
            best = _best_edge_for_deletion(cur, state, objective, allow_isolation, tie)
            if best is None:
                break
            d = EdgeDelta(deleted=(best,))
        picked.append(d.added[0] if d.added else d.deleted[0])
        cur = apply_delta(cur, d)
        if (step + 1) % RESOLVE_EVERY == 0:
            state = _solve(cur, x0=state.fiedler, tol=tol)
        else:
            state = refine(cur, state, REFRESH_ITERS)
    _warn_short(f"Proxy{objective}{op}", k, len(picked))
    prov.update(shortfall=k - len(picked), final_gap_estimate=state.gap,
                disconnected_during_run=not state.connected)
    key = "added" if op == "Add" else "deleted"
    return EdgeDelta(**{key: tuple(picked)}, provenance=prov)


# --------------------------------------------------------------------- dispatch

_NEEDS_FEATURES = {"FeaSt", "ComFy"}
_NEEDS_PARTITION = {"HigherComMa", "LowerComMa", "ComFy"}


def _run_phase(g, req: RewireRequest, phase, X, part) -> EdgeDelta:
    m = req.method
    if m in ("HigherComMa", "LowerComMa"):
        allow = True if req.allow_isolation is None else req.allow_isolation
        return comma(g, part, m[:-5], phase, req.k, req.seed, allow_isolation=allow)
    if m == "FeaSt":
        allow = True if req.allow_isolation is None else req.allow_isolation
        return feast(g, X, phase, req.k, req.sample_ratio, req.seed, allow_isolation=allow)
    if m == "ComFy":
        allow = True if req.allow_isolation is None else req.allow_isolation
        return comfy(g, X, part, phase, req.k, allow_isolation=allow)
    allow = False if req.allow_isolation is None else req.allow_isolation
    return proxy_rewire(g, m[5:], phase, req.k, allow_isolation=allow)


def rewire(g: Graph, req: RewireRequest, X=None, part: Partition | None = None) -> EdgeDelta:
    """Run ``req`` on ``g``.  AddDel is an Add phase of ``k`` followed by a
    Del phase of ``k`` on the intermediate graph; the returned delta is the
    net change against ``g`` and per-phase wall-clock goes to ``timings_ms``.
    """
    if req.method in _NEEDS_FEATURES and X is None:
        raise ValidationError(f"{req.method} needs node features")
    if req.method in _NEEDS_PARTITION and part is None:
        raise ValidationError(f"{req.method} needs a community partition")
    if X is not None:
        X = as_features(X, g)
    if part is not None:
        _check_partition(g, part)
    phases = ["Add", "Del"] if req.op == "AddDel" else [req.op]
    total = EdgeDelta()
    cur = g
    timings = {}
    phase_prov = []
    for ph in phases:
        t0 = time.perf_counter()
        d = _run_phase(cur, req, ph, X, part)
        timings[ph.lower()] = (time.perf_counter() - t0) * 1e3
        phase_prov.append(d.provenance)
        total = combine_deltas(g, total, d)
        cur = apply_delta(cur, d)
    prov = {**req.params(), "phases": phase_prov}
    return EdgeDelta(total.added, total.deleted, provenance=prov, timings_ms=timings)
