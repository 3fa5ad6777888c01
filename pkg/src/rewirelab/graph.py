"""Core graph containers.

A :class:`Graph` is simple and undirected: every edge is stored once as
``(u, v)`` with ``u < v`` and the edge array is kept in lexicographic
order.  The CSR adjacency is derived from the edge array on construction,
so both views always describe the same relation.  Instances are treated as
immutable; every modification goes through :func:`apply_delta` and
produces a new graph.

Features and labels are plain numpy arrays, validated with
:func:`as_features` / :func:`as_labels`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

Edge = tuple[int, int]


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def canonical_edges(edges, num_nodes: int | None = None) -> np.ndarray:
    """Return a sorted, de-duplicated ``(m, 2)`` int64 array with ``u < v``.

    Raises ValidationError on self-loops, negative ids or ids outside
    ``range(num_nodes)``.
    """
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        u = int(arr[loops][0, 0])
        raise ValidationError(f"self-loop ({u}, {u}) not allowed")
    if (arr < 0).any():
        raise ValidationError("node ids must be non-negative")
    if num_nodes is not None and arr.max() >= num_nodes:
        raise ValidationError(
            f"edge endpoint {int(arr.max())} out of range for {num_nodes} nodes"
        )
    arr = np.sort(arr, axis=1)
    width = np.int64(arr.max()) + 1
    keys = np.unique(arr[:, 0] * width + arr[:, 1])
    return np.stack([keys // width, keys % width], axis=1)


class Graph:
    """Simple undirected graph on nodes ``0 .. num_nodes-1``."""

    __slots__ = ("num_nodes", "edges", "indptr", "indices", "degrees", "_adj")

    def __init__(self, num_nodes: int, edges=()):
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise ValidationError("num_nodes must be non-negative")
        e = canonical_edges(edges, num_nodes)
        self.num_nodes = num_nodes
        self.edges = _readonly(e)
        # symmetric CSR with sorted neighbour lists
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.argsort(src * np.int64(max(num_nodes, 1)) + dst, kind="stable")
        src, dst = src[order], dst[order]
        deg = np.bincount(src, minlength=num_nodes).astype(np.int64)
        indptr = np.zeros(num_nodes + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        self.indptr = _readonly(indptr)
        self.indices = _readonly(dst.astype(np.int64))
        self.degrees = _readonly(deg)
        self._adj = None

    @classmethod
    def from_edge_set(cls, num_nodes: int, edges: Iterable[Edge]) -> "Graph":
        return cls(num_nodes, list(edges))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def num_edges_directed(self) -> int:
        """Edge count with both directions counted (the convention of many benchmark tables)."""
        return 2 * self.num_edges

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edge_set(self) -> set[Edge]:
        return {(int(u), int(v)) for u, v in self.edges}

    def adjacency(self) -> sp.csr_matrix:
        """Float CSR adjacency (cached)."""
        if self._adj is None:
            data = np.ones(self.indices.size, dtype=np.float64)
            self._adj = sp.csr_matrix(
                (data, self.indices, self.indptr), shape=(self.num_nodes, self.num_nodes)
            )
        return self._adj

    def check_invariants(self) -> None:
        """Full rescan of the documented invariants; raises AssertionError."""
        e = self.edges
        assert (e[:, 0] < e[:, 1]).all(), "edge not stored as u < v"
        assert np.unique(e, axis=0).shape[0] == e.shape[0], "duplicate edge"
        assert int(self.degrees.sum()) == 2 * self.num_edges
        rebuilt = set()
        for u in range(self.num_nodes):
            nb = self.neighbors(u)
            assert (np.diff(nb) > 0).all(), "neighbour list not sorted"
            for v in nb:
                assert v != u
                rebuilt.add((min(u, int(v)), max(u, int(v))))
        assert rebuilt == self.edge_set(), "adjacency and edge set disagree"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.num_nodes == other.num_nodes and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.num_nodes, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


@dataclass(frozen=True)
class Partition:
    """Community assignment with contiguous 0-based ids."""

    assignment: np.ndarray
    num_communities: int = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        if a.ndim != 1:
            raise ValidationError("partition assignment must be one-dimensional")
        if a.size and a.min() < 0:
            raise ValidationError("community ids must be non-negative")
        k = int(a.max()) + 1 if a.size else 0
        if a.size and np.unique(a).size != k:
            raise ValidationError("community ids must be contiguous from 0")
        object.__setattr__(self, "assignment", _readonly(a))
        object.__setattr__(self, "num_communities", k)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Relabel arbitrary ids to contiguous ids in order of first appearance."""
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        return cls(rank[inverse.ravel()])

    @property
    def num_nodes(self) -> int:
        return int(self.assignment.size)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.num_communities)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash(self.assignment.tobytes())


def as_features(X, g: Graph | None = None) -> np.ndarray:
    """Validate a node feature matrix (rows = nodes) and return it as float64 2-D."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValidationError("features must be a 2-D matrix")
    if not np.isfinite(X).all():
        raise ValidationError("features contain non-finite entries")
    if g is not None and X.shape[0] != g.num_nodes:
        raise ValidationError(
            f"feature rows ({X.shape[0]}) do not match graph nodes ({g.num_nodes})"
        )
    return X


def as_labels(y, g: Graph | None = None) -> np.ndarray:
    """Validate an integer label vector with contiguous 0-based class ids."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError("labels must be one-dimensional")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValidationError("labels must be integers")
    y = y.astype(np.int64)
    if y.size:
        if y.min() < 0:
            raise ValidationError("labels must be non-negative")
        if np.unique(y).size != int(y.max()) + 1:
            raise ValidationError("class ids must be contiguous from 0")
    if g is not None and y.size != g.num_nodes:
        raise ValidationError(f"label count ({y.size}) does not match graph nodes ({g.num_nodes})")
    return y


@dataclass(frozen=True)
class EdgeDelta:
    """Ordered edge additions and deletions produced by one rewiring run."""

    added: tuple[Edge, ...] = ()
    deleted: tuple[Edge, ...] = ()
    provenance: dict = field(default_factory=dict, compare=False)
    timings_ms: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "added", tuple(_norm(e) for e in self.added))
        object.__setattr__(self, "deleted", tuple(_norm(e) for e in self.deleted))

    def inverse(self) -> "EdgeDelta":
        return EdgeDelta(added=self.deleted, deleted=self.added, provenance=dict(self.provenance))

    def validate(self, g: Graph) -> None:
        """Raise ValidationError naming the first offending edge."""
        seen_add = set()
        for u, v in self.added:
            if u == v:
                raise ValidationError(f"added edge ({u}, {v}) is a self-loop")
            if not (0 <= u < g.num_nodes and 0 <= v < g.num_nodes):
                raise ValidationError(f"added edge ({u}, {v}) out of range")
            if g.has_edge(u, v):
                raise ValidationError(f"added edge ({u}, {v}) already present")
            if (u, v) in seen_add:
                raise ValidationError(f"added edge ({u}, {v}) listed twice")
            seen_add.add((u, v))
        seen_del = set()
        for u, v in self.deleted:
            if (u, v) in seen_add:
                raise ValidationError(f"edge ({u}, {v}) both added and deleted")
            if not (0 <= u < g.num_nodes and 0 <= v < g.num_nodes) or not g.has_edge(u, v):
                raise ValidationError(f"deleted edge ({u}, {v}) not present")
            if (u, v) in seen_del:
                raise ValidationError(f"deleted edge ({u}, {v}) listed twice")
            seen_del.add((u, v))

    def __len__(self) -> int:
        return len(self.added) + len(self.deleted)


def _norm(e) -> Edge:
    u, v = int(e[0]), int(e[1])
    return (u, v) if u < v else (v, u)


def apply_delta(g: Graph, d: EdgeDelta) -> Graph:
    """Return a new graph with ``d`` applied; ``g`` is left untouched."""
    d.validate(g)
    if not d.added and not d.deleted:
        return g
    edges = g.edges
    if d.deleted:
        dele = np.asarray(d.deleted, dtype=np.int64)
        n = np.int64(g.num_nodes)
        keys = edges[:, 0] * n + edges[:, 1]
        keep = ~np.isin(keys, dele[:, 0] * n + dele[:, 1])
        edges = edges[keep]
    if d.added:
        edges = np.vstack([edges, np.asarray(d.added, dtype=np.int64)])
    return Graph(g.num_nodes, edges)


def combine_deltas(g: Graph, first: EdgeDelta, second: EdgeDelta) -> EdgeDelta:
    """Net delta equivalent to applying ``first`` then ``second`` to ``g``.

    Edges added by ``first`` and removed again by ``second`` (or the reverse)
    cancel out, so the result validates against ``g``.
    """
    added = list(first.added)
    deleted = list(first.deleted)
    added_set, deleted_set = set(added), set(deleted)
    for e in second.deleted:
        if e in added_set:
            added_set.discard(e)
            added.remove(e)
        else:
            deleted.append(e)
            deleted_set.add(e)
    for e in second.added:
        if e in deleted_set:
            deleted_set.discard(e)
            deleted.remove(e)
        else:
            added.append(e)
            added_set.add(e)
    return EdgeDelta(tuple(added), tuple(deleted))
