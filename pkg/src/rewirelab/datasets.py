"""Dataset helpers: a seeded Cora-sized synthetic benchmark graph and a loader
for user-supplied real datasets."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import Graph, as_labels
from .io import load_edge_list, load_features, load_labels
from .sbm import _sample_edges

CORA_NODES = 2708
CORA_CLASSES = 7
CORA_FEATURES = 1433


@dataclass(frozen=True)
class Dataset:
    name: str
    graph: Graph
    labels: np.ndarray
    features: np.ndarray | None = None


def cora_like(seed: int = 0, num_nodes: int = CORA_NODES, classes: int = CORA_CLASSES,
              dim: int = CORA_FEATURES, mean_degree: float = 3.9, homophily: float = 0.81) -> Dataset:
    """Planted-partition graph with Cora's size, class count and feature width.

    Edges: intra-class with probability chosen so that roughly ``homophily``
    of the ``num_nodes * mean_degree / 2`` expected edges are intra-class.
    Features: sparse binary bag-of-words where each class favours its own
    slice of the vocabulary.
    """
    rng = np.random.default_rng(seed)
    labels = np.sort(rng.integers(0, classes, size=num_nodes))
    sizes = np.bincount(labels, minlength=classes)
    intra_pairs = float((sizes * (sizes - 1) / 2).sum())
    inter_pairs = num_nodes * (num_nodes - 1) / 2 - intra_pairs
    m = num_nodes * mean_degree / 2
    p = min(1.0, homophily * m / intra_pairs)
    q = min(1.0, (1 - homophily) * m / inter_pairs)
    edges = _sample_edges(num_nodes, labels, p, q, rng)
    topic = np.arange(dim) % classes
    prob = np.where(topic[None, :] == labels[:, None], 0.03, 0.008)
    X = (rng.random((num_nodes, dim)) < prob).astype(np.float64)
    return Dataset("cora-like", Graph(num_nodes, edges), labels.astype(np.int64), X)


def load_dataset(directory, name: str | None = None) -> Dataset:
    """Load ``edges.txt``, ``labels.txt`` and optional ``features.csv`` from ``directory``."""
    d = Path(directory)
    if not (d / "edges.txt").exists() or not (d / "labels.txt").exists():
        raise ValidationError(f"{d} needs edges.txt and labels.txt")
    y = load_labels(d / "labels.txt")
    g = load_edge_list(d / "edges.txt", num_nodes=y.size)
    X = load_features(d / "features.csv", g) if (d / "features.csv").exists() else None
    return Dataset(name or d.name, g, as_labels(y, g), X)


def find_cora() -> Path | None:
    """Location of user-supplied Cora files, if any (``REWIRELAB_CORA_DIR``)."""
    env = os.environ.get("REWIRELAB_CORA_DIR")
    if env and Path(env).is_dir():
        return Path(env)
    return None
