"""Louvain modularity maximisation and modularity scoring."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ._backend import kernels
from .errors import ValidationError
from .graph import Graph, Partition


def modularity(g: Graph, part: Partition, resolution: float = 1.0) -> float:
    """Newman modularity ``sum_c e_c/|E| - (d_c / 2|E|)^2``; 0 for an edgeless graph."""
    if part.num_nodes != g.num_nodes:
        raise ValidationError(
            f"partition covers {part.num_nodes} nodes, graph has {g.num_nodes}"
        )
    m = g.num_edges
    if m == 0:
        return 0.0
    a = part.assignment
    k = part.num_communities
    e = g.edges
    intra = a[e[:, 0]] == a[e[:, 1]]
    e_c = np.bincount(a[e[intra, 0]], minlength=k)
    d_c = np.bincount(a, weights=g.degrees, minlength=k)
    return float(e_c.sum() / m - resolution * np.sum((d_c / (2.0 * m)) ** 2))


def _relabel(comm: np.ndarray) -> np.ndarray:
    return Partition.from_labels(comm).assignment.copy()


def louvain_levels(g: Graph, seed: int = 0, resolution: float = 1.0,
                   max_levels: int = 100) -> list[Partition]:
    """Run Louvain and return the flattened partition after every level.

    The node visiting order of each level is a permutation drawn from
    ``seed``; among equal gains the lowest community id wins.  Isolated
    nodes never move and stay singletons.
    """
    n = g.num_nodes
    if n == 0:
        raise ValidationError("louvain needs a non-empty graph")
    rng = np.random.default_rng(seed)
    adj = g.adjacency().astype(np.float64)
    membership = np.arange(n, dtype=np.int64)
    levels: list[Partition] = []
    if g.num_edges == 0:
        return [Partition(membership)]

    for _ in range(max_levels):
        adj.sort_indices()
        size = adj.shape[0]
        strengths = np.asarray(adj.sum(axis=1)).ravel()
        two_m = float(strengths.sum())
        comm = np.arange(size, dtype=np.int64)
        order = rng.permutation(size).astype(np.int64)
        moves = kernels.louvain_move_nodes(
            adj.indptr.astype(np.int64), adj.indices.astype(np.int64),
            adj.data.astype(np.float64), strengths, comm, order, two_m, float(resolution),
        )
        if moves == 0:
            break
        comm = _relabel(comm)
        membership = comm[membership]
        levels.append(Partition(_relabel(membership)))
        k = int(comm.max()) + 1
        if k == size:
            break
        S = sp.csr_matrix((np.ones(size), (np.arange(size), comm)), shape=(size, k))
        adj = (S.T @ adj @ S).tocsr()

    if not levels:
        levels.append(Partition(membership))
    return levels


def louvain(g: Graph, seed: int = 0, resolution: float = 1.0) -> Partition:
    """Louvain partition of ``g``; deterministic for a fixed ``seed``."""
    return louvain_levels(g, seed=seed, resolution=resolution)[-1]
