"""Graph-task alignment diagnostics: NMI, homophily, alignment matrices,
mean edge similarity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import EdgeDelta, Graph, Partition, as_features, as_labels


def _ids(a) -> np.ndarray:
    if isinstance(a, Partition):
        return a.assignment
    return np.asarray(a, dtype=np.int64)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Normalized mutual information ``I(a;b) / sqrt(H(a) H(b))`` (natural log).

    Accepts partitions or label vectors.  Two identical single-cluster
    labelings score 1; otherwise a zero entropy gives 0.
    """
    a, b = _ids(a), _ids(b)
    if a.shape != b.shape:
        raise ValidationError(f"labelings differ in length ({a.size} vs {b.size})")
    n = a.size
    if n == 0:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ai, bi = ai.ravel(), bi.ravel()
    ka, kb = int(ai.max()) + 1, int(bi.max()) + 1
    cont = np.zeros((ka, kb))
    np.add.at(cont, (ai, bi), 1.0)
    ha = _entropy(cont.sum(axis=1), n)
    hb = _entropy(cont.sum(axis=0), n)
    if ha == 0.0 or hb == 0.0:
        return 1.0 if (ka == 1 and kb == 1) else 0.0
    pa = cont.sum(axis=1) / n
    pb = cont.sum(axis=0) / n
    nz = cont > 0
    pij = cont[nz] / n
    mi = float((pij * np.log(pij / np.outer(pa, pb)[nz])).sum())
    return min(max(mi / math.sqrt(ha * hb), 0.0), 1.0)


def edge_homophily(g: Graph, y) -> float:
    """Fraction of edges joining same-label endpoints (0 for an edgeless graph)."""
    y = as_labels(y, g)
    if g.num_edges == 0:
        return 0.0
    e = g.edges
    return float(np.mean(y[e[:, 0]] == y[e[:, 1]]))


def adjusted_homophily(g: Graph, y) -> float:
    """Edge homophily corrected for the degree-weighted class distribution.

    Returns NaN when undefined (one class only, or no edges).
    """
    y = as_labels(y, g)
    m = g.num_edges
    if m == 0:
        return math.nan
    d_c = np.bincount(y, weights=g.degrees)
    baseline = float(np.sum((d_c / (2.0 * m)) ** 2))
    if 1.0 - baseline <= 1e-15:
        return math.nan
    return (edge_homophily(g, y) - baseline) / (1.0 - baseline)


def _unit_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1)
    out = np.zeros_like(X)
    nz = norms > 0
    out[nz] = X[nz] / norms[nz, None]
    return out


def edge_similarities(X, edges) -> np.ndarray:
    """Cosine similarity for each row of an ``(m, 2)`` edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    U = _unit_rows(as_features(X))
    return np.einsum("ij,ij->i", U[edges[:, 0]], U[edges[:, 1]])


def mean_edge_similarity(g: Graph, X) -> float:
    X = as_features(X, g)
    if g.num_edges == 0:
        return 0.0
    return float(edge_similarities(X, g.edges).mean())


@dataclass(frozen=True)
class AlignmentMatrix:
    """Counts of modified edges by (same/diff label) x (same/diff community).

    Row 0 = same label, row 1 = different label; column 0 = same
    community, column 1 = different community.
    """

    added: np.ndarray
    deleted: np.ndarray

    def to_dict(self) -> dict:
        names = ("same_label", "diff_label")
        cols = ("same_community", "diff_community")

        def grid(m):
            return {r: {c: int(m[i, j]) for j, c in enumerate(cols)} for i, r in enumerate(names)}

        return {"added": grid(self.added), "deleted": grid(self.deleted)}


def _grid(edges, y, comm) -> np.ndarray:
    out = np.zeros((2, 2), dtype=np.int64)
    for u, v in edges:
        out[int(y[u] != y[v]), int(comm[u] != comm[v])] += 1
    return out


def alignment_matrix(delta: EdgeDelta, y, part: Partition) -> AlignmentMatrix:
    y = as_labels(y)
    comm = part.assignment
    if y.size != comm.size:
        raise ValidationError("labels and partition cover different node counts")
    return AlignmentMatrix(_grid(delta.added, y, comm), _grid(delta.deleted, y, comm))
