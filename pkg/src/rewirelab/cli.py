"""Command-line entry point: ``rewirelab <subcommand> [flags]``.

Exit status: 0 on success, 1 on invalid input (bad flags, malformed files,
failed ``verify``), 2 when an eigensolver does not converge.  Every run
writes a JSON (or CSV) report carrying a provenance block into ``--out-dir``.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import math
import statistics
import sys
import time
import warnings
from pathlib import Path


from . import __version__
from ._backend import BACKEND
from .community import louvain, modularity
from .datasets import cora_like
from .errors import NonConvergenceError, ValidationError
from .graph import Partition, apply_delta
from .io import (
    delta_from_json, dumps_report, load_features, load_graph, load_labels, load_report, make_report,
    save_edge_list, save_features, save_labels, save_report,
)
from .metrics import adjusted_homophily, alignment_matrix, edge_homophily, mean_edge_similarity, nmi
from .rewiring import OPS, RewireRequest, normalize_method, rewire
from .sbm import (
    SWEEP_COLUMNS, SbmParams, generate, monte_carlo_error, recoverability_threshold, sweep,
    theory_error, theory_error_aligned,
)
from .spectral import expected_gap_two_block, spectral_gap

VERIFY_SLACK = 0.01
BENCH_METHODS = {"comma": "HigherComMa", "feast": "FeaSt", "comfy": "ComFy", "proxy": "ProxyMax"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(s):
    return [float(x) for x in s.split(",") if x.strip()]


def _ints(s):
    return [int(x) for x in s.split(",") if x.strip()]


def _words(s):
    return [x.strip() for x in s.split(",") if x.strip()]


# ------------------------------------------------------------------- outputs

def _provenance(args) -> dict:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    return {"version": __version__, "command": args.command, "flags": flags, "seed": args.seed,
            "backend": BACKEND}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        yield prefix[:-1], json.dumps(obj)
    else:
        yield prefix[:-1], obj


def _table_csv(rows, columns) -> str:
    buf = _stdio.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()})
    return buf.getvalue()


def _emit(args, report: dict, name: str, rows=None, columns=None) -> None:
    """Write ``report`` (plus a CSV table when given) and echo it on stdout."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {**report, "provenance": _provenance(args)}
    path = Path(args.out_report) if getattr(args, "out_report", None) else out / f"{name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    save_report(report, path)
    if args.format == "csv":
        if rows is not None:
            text = _table_csv(rows, columns)
        else:
            text = _table_csv([dict(key=k, value=v) for k, v in _flatten(report)], ("key", "value"))
        (out / f"{name}.csv").write_text(text)
        sys.stdout.write(text)
    else:
        sys.stdout.write(dumps_report(report))


# ----------------------------------------------------------------- commands

def _cmd_gen_sbm(args):
    params = SbmParams(args.n, args.p, args.q, args.psi, args.blocks, args.mu0, args.sigma0)
    s = generate(params, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_edge_list(s.graph, out / "edges.txt")
    save_features(s.features, out / "features.csv")
    save_labels(s.labels, out / "labels.txt")
    save_labels(s.planted.assignment, out / "planted.txt")
    metrics = {"num_nodes": s.graph.num_nodes, "num_edges": s.graph.num_edges,
               "edge_homophily": edge_homophily(s.graph, s.labels)}
    _emit(args, make_report("gen-sbm", params.to_dict(), args.seed, metrics,
                            files=["edges.txt", "features.csv", "labels.txt", "planted.txt"]), "gen-sbm")


def _graph_metrics(g, y=None, X=None, part=None) -> dict:
    m = {"num_nodes": g.num_nodes, "num_edges": g.num_edges, "num_edges_directed": g.num_edges_directed()}
    if y is not None:
        m["edge_homophily"] = edge_homophily(g, y)
        m["adjusted_homophily"] = adjusted_homophily(g, y)
    if X is not None:
        m["mean_edge_similarity"] = mean_edge_similarity(g, X)
    if part is not None:
        m["modularity"] = modularity(g, part)
    return m


def _load_partition(args, g):
    if getattr(args, "partition", None):
        return Partition.from_labels(load_labels(args.partition, g))
    return louvain(g, seed=args.seed)


def _cmd_rewire(args):
    g = load_graph(args.edges)
    X = load_features(args.features, g) if args.features else None
    y = load_labels(args.labels, g) if args.labels else None
    method = normalize_method(args.method)
    req = RewireRequest(method, args.op, args.k, seed=args.seed, sample_ratio=args.sample_ratio,
                        allow_isolation=True if args.allow_isolation else None)
    needs_part = method in ("HigherComMa", "LowerComMa", "ComFy") or y is not None
    part = _load_partition(args, g) if needs_part else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        d = rewire(g, req, X=X, part=part)
    g2 = apply_delta(g, d)
    before, after = _graph_metrics(g, y, X, part), _graph_metrics(g2, y, X, part)
    metrics = {"before": before, "after": after}
    if X is not None:
        metrics["mean_similarity_delta"] = after["mean_edge_similarity"] - before["mean_edge_similarity"]
    if y is not None:
        metrics["alignment_matrix"] = alignment_matrix(d, y, part).to_dict()
    if args.out_edges:
        Path(args.out_edges).parent.mkdir(parents=True, exist_ok=True)
        save_edge_list(g2, args.out_edges)
    report = make_report(method, req.params(), args.seed, metrics, d, d.timings_ms,
                         rewiring=d.provenance, warnings=[str(w.message) for w in caught])
    _emit(args, report, "rewire")


def _cmd_metrics(args):
    g = load_graph(args.edges)
    y = load_labels(args.labels, g) if args.labels else None
    X = load_features(args.features, g) if args.features else None
    part = _load_partition(args, g)
    m = _graph_metrics(g, y, X, part)
    m["num_communities"] = part.num_communities
    if y is not None:
        m["nmi"] = nmi(y, part)
    if args.delta:
        if y is None:
            raise ValidationError("--delta needs --labels for the alignment matrix")
        d = delta_from_json(load_report(args.delta)["delta"])
        m["alignment_matrix"] = alignment_matrix(d, y, part).to_dict()
    _emit(args, make_report("metrics", {"edges": args.edges}, args.seed, m), "metrics")


def _cmd_communities(args):
    g = load_graph(args.edges)
    part = louvain(g, seed=args.seed, resolution=args.resolution)
    m = {"num_communities": part.num_communities,
         "modularity": modularity(g, part, args.resolution),
         "assignment": part.assignment.tolist()}
    rows = [{"node": i, "community": c} for i, c in enumerate(part.assignment.tolist())]
    _emit(args, make_report("communities", {"resolution": args.resolution}, args.seed, m, **m),
          "communities", rows, ("node", "community"))


def _cmd_spectrum(args):
    g = load_graph(args.edges)
    s = spectral_gap(g, tol=args.tol, max_iter=args.max_iter, method=args.solver, seed=args.seed)
    m = s.to_dict()
    top = {k: m[k] for k in ("gap", "residual", "connected", "iters")}
    params = {"tol": args.tol, "max_iter": args.max_iter, "solver": args.solver}
    _emit(args, make_report("spectrum", params, args.seed, m, **top), "spectrum")


def _maybe(fn, *a):
    try:
        return fn(*a)
    except ValidationError as exc:
        return str(exc)


def _cmd_theory(args):
    m = {
        "expected_gap_two_block": _maybe(expected_gap_two_block, args.n, args.p, args.q),
        "theory_error": theory_error(args.n, args.p, args.q, args.psi),
        "theory_error_aligned": theory_error_aligned(args.n, args.p, args.q, args.mu0, args.sigma0),
        "recoverability_threshold": recoverability_threshold(args.n, args.q),
    }
    params = {"n": args.n, "p": args.p, "q": args.q, "psi": args.psi, "mu0": args.mu0, "sigma0": args.sigma0}
    _emit(args, make_report("theory", params, args.seed, m), "theory")


def _cmd_verify(args):
    params = SbmParams(args.n, args.p, args.q, args.psi, mu0=args.mu0, sigma0=args.sigma0)
    t0 = time.perf_counter()
    est, se = monte_carlo_error(params, args.mode, args.trials, args.seed)
    elapsed = (time.perf_counter() - t0) * 1e3
    th = theory_error(args.n, args.p, args.q, args.psi)
    tol = 3 * se + args.slack
    ok = abs(est - th) <= tol
    m = {"monte_carlo": est, "stderr": se, "theory": th, "abs_diff": abs(est - th),
         "tolerance": tol, "status": "PASS" if ok else "FAIL"}
    _emit(args, make_report("verify", {**params.to_dict(), "mode": args.mode, "trials": args.trials},
                            args.seed, m, timings_ms={"monte_carlo": elapsed}), "verify")
    print(f"{m['status']}: |{est:.4f} - {th:.4f}| = {abs(est - th):.4f} (tolerance {tol:.4f})",
          file=sys.stderr)
    return 0 if ok else 1


def _cmd_sweep(args):
    methods = [normalize_method(m) for m in _words(args.methods)] if args.methods else [None]
    rows = sweep(args.n, _floats(args.p), _floats(args.q), _floats(args.psi), methods=methods,
                 ops=_words(args.ops), ks=_ints(args.k), mode=args.mode, trials=args.trials,
                 seed=args.seed, planted=args.planted, with_nmi=not args.no_nmi)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text(_table_csv(rows, SWEEP_COLUMNS))
    params = {"n": args.n, "p": args.p, "q": args.q, "psi": args.psi, "methods": args.methods,
              "ops": args.ops, "k": args.k, "mode": args.mode, "trials": args.trials,
              "planted": args.planted}
    _emit(args, make_report("sweep", params, args.seed, {"rows": rows}), "sweep", rows, SWEEP_COLUMNS)


def bench_methods(g, X, part, names, k, op="Add", repeats=5, seed=0) -> list[dict]:
    """Median wall-clock of each rewiring method (partition computed beforehand)."""
    rows = []
    for name in names:
        method = BENCH_METHODS.get(name.lower(), None) or normalize_method(name)
        req = RewireRequest(method, op, k, seed=seed)
        times = []
        for _ in range(repeats):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                t0 = time.perf_counter()
                rewire(g, req, X=X, part=part)
                times.append(time.perf_counter() - t0)
        rows.append({"method": method, "op": op, "k": k, "repeats": repeats,
                     "median_s": statistics.median(times), "min_s": min(times), "max_s": max(times)})
    return rows


def _cmd_bench(args):
    if args.edges:
        g = load_graph(args.edges)
        X = load_features(args.features, g) if args.features else None
    else:
        data = cora_like(args.seed)
        g, X = data.graph, data.features
    names = _words(args.methods)
    if X is None and any(BENCH_METHODS.get(n.lower(), n) in ("FeaSt", "ComFy") for n in names):
        raise ValidationError("FeaSt/ComFy benchmarks need --features")
    part = louvain(g, seed=args.seed)
    rows = bench_methods(g, X, part, names, args.k, args.op, args.repeats, args.seed)
    med = {r["method"]: r["median_s"] for r in rows}
    m = {"rows": rows, "fastest": min(med, key=med.get)}
    params = {"edges": args.edges or "cora-like synthetic", "methods": args.methods, "k": args.k,
              "op": args.op, "repeats": args.repeats}
    _emit(args, make_report("bench", params, args.seed, m), "bench", rows,
          ("method", "op", "k", "repeats", "median_s", "min_s", "max_s"))


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=".")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    ap = _Parser(prog="rewirelab", description="Graph rewiring and SBM laboratory.")
    ap.add_argument("--version", action="version", version=f"rewirelab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def sbm_flags(p, n=1000):
        p.add_argument("--n", type=int, default=n)
        p.add_argument("--p", type=float, required=True)
        p.add_argument("--q", type=float, required=True)
        p.add_argument("--psi", type=float, default=1.0)
        p.add_argument("--mu0", type=float, default=1.0)
        p.add_argument("--sigma0", type=float, default=1.0)

    p = add("gen-sbm", _cmd_gen_sbm, "sample an SBM graph with features and labels")
    sbm_flags(p)
    p.add_argument("--blocks", type=int, default=2)

    p = add("rewire", _cmd_rewire, "run a rewiring method on an edge list")
    p.add_argument("--edges", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--op", required=True, type=str.lower, choices=[o.lower() for o in OPS])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sample-ratio", type=float)
    p.add_argument("--features")
    p.add_argument("--labels")
    p.add_argument("--partition", help="community id per line; Louvain when omitted")
    p.add_argument("--allow-isolation", action="store_true")
    p.add_argument("--out-edges")
    p.add_argument("--out-report")

    p = add("metrics", _cmd_metrics, "graph-task alignment metrics")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels")
    p.add_argument("--features")
    p.add_argument("--partition")
    p.add_argument("--delta", help="rewire report whose delta feeds the alignment matrix")

    p = add("communities", _cmd_communities, "Louvain communities")
    p.add_argument("--edges", required=True)
    p.add_argument("--resolution", type=float, default=1.0)

    p = add("spectrum", _cmd_spectrum, "normalized-Laplacian spectral gap")
    p.add_argument("--edges", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--solver", choices=("power", "lanczos"), default="power")

    p = add("theory", _cmd_theory, "evaluate the closed forms")
    sbm_flags(p)

    p = add("verify", _cmd_verify, "Monte Carlo check of the misclassification formula")
    sbm_flags(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--mode", choices=("Sum", "Mean"), default="Sum")
    p.add_argument("--slack", type=float, default=VERIFY_SLACK)

    p = add("sweep", _cmd_sweep, "grid experiment over (p, q, psi) and rewiring settings")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--p", required=True, help="comma-separated list")
    p.add_argument("--q", required=True, help="comma-separated list")
    p.add_argument("--psi", default="1.0", help="comma-separated list")
    p.add_argument("--methods", default="", help="comma-separated rewiring methods")
    p.add_argument("--ops", default="Add")
    p.add_argument("--k", default="0", help="comma-separated budgets; 0 = no rewiring")
    p.add_argument("--mode", choices=("Sum", "Mean"), default="Sum")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--planted", action="store_true", help="rewire with the planted blocks")
    p.add_argument("--no-nmi", action="store_true")

    p = add("bench", _cmd_bench, "time rewiring methods")
    p.add_argument("--edges", help="edge list; a Cora-sized synthetic graph when omitted")
    p.add_argument("--features")
    p.add_argument("--methods", default="comma,feast,comfy,proxy")
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--op", default="Add")
    p.add_argument("--repeats", type=int, default=5)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        rc = args.func(args)
    except NonConvergenceError as exc:
        print(f"rewirelab: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"rewirelab: {exc}", file=sys.stderr)
        return 1
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
