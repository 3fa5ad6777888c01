"""Compiled vs pure-Python kernels: Louvain local moves and the proxy non-edge scan.

    python3 benchmarks/bench_kernels.py [--n 2000] [--repeats 5]

Both backends are called on identical inputs; the script also checks that
they return the same answer before reporting timings.
"""

import argparse
import statistics
import time

import numpy as np

from rewirelab import _kernels_py
from rewirelab.sbm import SbmParams, generate
from rewirelab.spectral import spectral_gap

try:
    from rewirelab import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def bench_louvain(backend, g, repeats, seed=0):
    adj = g.adjacency().astype(np.float64).tocsr()
    adj.sort_indices()
    indptr, indices = adj.indptr.astype(np.int64), adj.indices.astype(np.int64)
    strengths = np.asarray(adj.sum(axis=1)).ravel()
    order = np.random.default_rng(seed).permutation(g.num_nodes).astype(np.int64)

    def run():
        comm = np.arange(g.num_nodes, dtype=np.int64)
        backend.louvain_move_nodes(indptr, indices, adj.data, strengths, comm, order,
                                   float(strengths.sum()), 1.0)
        return comm

    return _median_time(run, repeats)


def bench_proxy(backend, g, state, repeats):
    f = np.ascontiguousarray(state.fiedler)
    indptr, indices = g.indptr.astype(np.int64), g.indices.astype(np.int64)
    return _median_time(lambda: backend.proxy_best_nonedge(f, state.gap, indptr, indices, -1.0, 1e-8)[:2],
                        repeats)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--q", type=float, default=0.002)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _kernels_c is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    g = generate(SbmParams(args.n, args.p, args.q), args.seed).graph
    state = spectral_gap(g, method="lanczos")
    print(f"graph: {g.num_nodes} nodes, {g.num_edges} edges; median of {args.repeats} runs")
    print(f"{'kernel':<22}{'cython (s)':>12}{'python (s)':>12}{'speedup':>10}")
    for name, bench in (("louvain_move_nodes", lambda b: bench_louvain(b, g, args.repeats, args.seed)),
                        ("proxy_best_nonedge", lambda b: bench_proxy(b, g, state, args.repeats))):
        tc, out_c = bench(_kernels_c)
        tp, out_p = bench(_kernels_py)
        same = np.array_equal(np.asarray(out_c), np.asarray(out_p))
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x" + ("" if same else "  (results differ!)"))


if __name__ == "__main__":
    main()
