"""Plain-text readers and writers for graphs, features, labels and reports.

Formats:

* edge list -- ``u v`` per line, 0-based ids, ``#`` starts a comment line
* features -- CSV without header, row ``i`` holds node ``i``
* labels / partitions -- one integer per line
* report -- JSON object ``{method, params, seed, metrics, delta, timings_ms}``
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .graph import EdgeDelta, Graph, as_features, as_labels

REPORT_KEYS = ("method", "params", "seed", "metrics", "delta", "timings_ms")


def load_edge_list(path, num_nodes: int | None = None) -> Graph:
    """Read an undirected edge list.

    Duplicate lines and reversed pairs collapse into a single edge.  The
    node count is ``max id + 1`` unless ``num_nodes`` is given (useful when
    trailing nodes are isolated).
    """
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(f"expected 2 fields, got {len(parts)}", path, lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {s!r}", path, lineno) from None
            if u < 0 or v < 0:
                raise ParseError("negative node id", path, lineno)
            if u == v:
                raise ValidationError(f"{path}:{lineno}: self-loop ({u}, {u}) not allowed")
            pairs.append((u, v))
    inferred = max((max(p) for p in pairs), default=-1) + 1
    if num_nodes is None:
        num_nodes = inferred
    elif num_nodes < inferred:
        raise ValidationError(f"edge list references node {inferred - 1} but num_nodes={num_nodes}")
    return Graph(num_nodes, pairs)


def save_edge_list(g: Graph, path, header: bool = True) -> None:
    with open(path, "w") as fh:
        if header:
            fh.write(f"# nodes {g.num_nodes} edges {g.num_edges}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def read_node_count_hint(path) -> int | None:
    """Node count from a ``# nodes N ...`` header written by :func:`save_edge_list`."""
    with open(path) as fh:
        first = fh.readline().split()
    if len(first) >= 3 and first[0] == "#" and first[1] == "nodes":
        try:
            return int(first[2])
        except ValueError:
            return None
    return None


def load_graph(path) -> Graph:
    """:func:`load_edge_list` honouring the node-count header when present."""
    return load_edge_list(path, read_node_count_hint(path))


def load_features(path, g: Graph | None = None) -> np.ndarray:
    try:
        X = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ParseError(str(exc), path) from None
    return as_features(X, g)


def save_features(X, path) -> None:
    X = as_features(X)
    np.savetxt(path, X, delimiter=",", fmt="%.17g")


def load_labels(path, g: Graph | None = None) -> np.ndarray:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(int(s))
            except ValueError:
                raise ParseError(f"non-integer label {s!r}", path, lineno) from None
    return as_labels(np.asarray(values, dtype=np.int64), g)


def save_labels(y, path) -> None:
    with open(path, "w") as fh:
        for v in np.asarray(y, dtype=np.int64):
            fh.write(f"{v}\n")


def delta_to_json(d: EdgeDelta) -> dict:
    return {"added": [list(e) for e in d.added], "deleted": [list(e) for e in d.deleted]}


def delta_from_json(obj: dict) -> EdgeDelta:
    return EdgeDelta(
        added=tuple(tuple(e) for e in obj.get("added", [])),
        deleted=tuple(tuple(e) for e in obj.get("deleted", [])),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def save_report(report: dict, path) -> None:
    """Write a report as canonical JSON (sorted keys, NaN -> null)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(dumps_report(report))
    os.replace(tmp, path)


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def make_report(method, params, seed, metrics=None, delta: EdgeDelta | None = None, timings_ms=None, **extra) -> dict:
    report = {
        "method": method,
        "params": params,
        "seed": seed,
        "metrics": metrics or {},
        "delta": delta_to_json(delta) if delta is not None else {"added": [], "deleted": []},
        "timings_ms": timings_ms or {},
    }
    report.update(extra)
    return report
