"""Stochastic block model laboratory.

Two-block SBMs whose node labels agree with the planted block with
probability ``psi``, one-dimensional Gaussian features whose sign encodes
the label, a one-round aggregation classifier, closed-form error
predictions and Monte Carlo estimates of the same quantities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .graph import Graph, Partition, apply_delta, as_features
from .metrics import adjusted_homophily, edge_homophily, nmi

_BLOCK_ENTRIES = 1 << 22


def normal_cdf(x: float) -> float:
    """Standard normal CDF through ``erfc`` (accurate far into both tails)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class SbmParams:
    n: int
    p: float
    q: float
    psi: float = 1.0
    blocks: int = 2
    mu0: float = 1.0
    sigma0: float = 1.0

    def __post_init__(self):
        if self.n < 2 or int(self.n) != self.n:
            raise ValidationError(f"n must be an integer >= 2, got {self.n}")
        if self.blocks < 2 or self.n % self.blocks:
            raise ValidationError(f"blocks={self.blocks} must be >= 2 and divide n={self.n}")
        for name in ("p", "q", "psi"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name}={v} outside [0, 1]")
        if self.sigma0 < 0:
            raise ValidationError("sigma0 must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SbmSample:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    planted: Partition
    seed: object


def _sample_edges(n, block, p, q, rng):
    out = []
    rows = max(1, _BLOCK_ENTRIES // n)
    cols = np.arange(n)
    for a in range(0, n, rows):
        r = np.arange(a, min(a + rows, n))
        draw = rng.random((r.size, n))
        prob = np.where(block[r][:, None] == block[None, :], p, q)
        hit = (draw < prob) & (cols[None, :] > r[:, None])
        i, j = np.nonzero(hit)
        out.append(np.stack([r[i], j], axis=1))
    return np.concatenate(out) if out else np.empty((0, 2), dtype=np.int64)


def generate(params: SbmParams, seed=0) -> SbmSample:
    """Draw one sample.  ``seed`` may be an int or a sequence of ints (RNG stream key).

    Blocks are contiguous index ranges.  Each label equals its block id with
    probability ``psi``; otherwise it moves to another class (the opposite
    one for two blocks, a uniformly chosen other one for more).  Features
    are ``N(-mu0, sigma0^2)`` for class 0 and ``N(+mu0, sigma0^2)`` for the rest.
    """
    rng = np.random.default_rng(seed)
    n, k = params.n, params.blocks
    block = np.repeat(np.arange(k), n // k)
    edges = _sample_edges(n, block, params.p, params.q, rng)
    flip = rng.random(n) >= params.psi
    labels = block.copy()
    if k == 2:
        labels[flip] = 1 - block[flip]
    else:
        shift = rng.integers(1, k, size=n)
        labels[flip] = (block[flip] + shift[flip]) % k
    sign = np.where(labels == 0, -1.0, 1.0)
    x = sign * params.mu0 + params.sigma0 * rng.standard_normal(n)
    return SbmSample(Graph(n, edges), x[:, None], labels.astype(np.int64), Partition(block), seed)


def expected_edge_count(params: SbmParams) -> tuple[float, float]:
    """Mean and standard deviation of the edge count."""
    s = params.n // params.blocks
    intra = params.blocks * s * (s - 1) // 2
    inter = params.n * (params.n - 1) // 2 - intra
    mean = intra * params.p + inter * params.q
    var = intra * params.p * (1 - params.p) + inter * params.q * (1 - params.q)
    return mean, math.sqrt(var)


def theory_error_aligned(n: int, p: float, q: float, mu0: float = 1.0, sigma0: float = 1.0) -> float:
    """Misclassification probability of one sum-aggregation round at full alignment.

    ``mu1 = mu0 (1 + E_p - E_q)``, ``sigma1^2 = sigma0^2 (1 + E_p + E_q)`` with
    ``E_p = p (n/2 - 1)`` and ``E_q = q n/2``; the error is ``Phi(-mu1 / sigma1)``.
    """
    if n % 2:
        raise ValidationError("n must be even")
    ep = p * (n / 2 - 1)
    eq = q * n / 2
    mu1 = mu0 * (1 + ep - eq)
    sigma1 = sigma0 * math.sqrt(1 + ep + eq)
    if sigma1 == 0:
        return 0.0 if mu1 > 0 else 1.0
    return normal_cdf(-mu1 / sigma1)


def theory_error(n: int, p: float, q: float, psi: float) -> float:
    """Approximate misclassified fraction under alignment ``psi``:
    ``1 - psi + (2 psi - 1) Phi(-z)`` with
    ``z = (n/2)(2 psi - 1)(p - q) / sqrt((n/2)(p + q + p(1-p) + q(1-q) + 2 (p-q)^2 psi (1-psi)))``.
    """
    if n % 2:
        raise ValidationError("n must be even")
    if not (0.0 <= psi <= 1.0):
        raise ValidationError(f"psi={psi} outside [0, 1]")
    h = n / 2
    var = h * (p + q + p * (1 - p) + q * (1 - q) + 2 * (p - q) ** 2 * psi * (1 - psi))
    if var <= 0:
        z = 0.0
    else:
        z = h * (2 * psi - 1) * (p - q) / math.sqrt(var)
    return 1 - psi + (2 * psi - 1) * normal_cdf(-z)


def recoverability_threshold(n: int, q: float) -> float:
    """Smallest ``p`` above which the planted blocks are exactly recoverable:
    ``(sqrt(q n / ln n) + sqrt(2))^2 ln(n) / n``."""
    if n < 3:
        raise ValidationError("n must be at least 3")
    if not (0.0 <= q <= 1.0):
        raise ValidationError(f"q={q} outside [0, 1]")
    ln = math.log(n)
    return (math.sqrt(q * n / ln) + math.sqrt(2.0)) ** 2 * ln / n


def aggregate_classify(g: Graph, X, mode: str = "Sum") -> np.ndarray:
    """One aggregation round including the node's own feature, then sign threshold.

    Class 1 iff the aggregate is strictly positive.  Mean divides by
    ``degree + 1``, which never changes the sign, so both modes predict alike.
    """
    X = as_features(X, g)
    if X.shape[1] != 1:
        raise ValidationError(f"aggregate_classify needs 1-D features, got {X.shape[1]} columns")
    mode = mode.capitalize()
    if mode not in ("Sum", "Mean"):
        raise ValidationError(f"mode must be Sum or Mean, got {mode!r}")
    x = X[:, 0]
    agg = x + g.adjacency() @ x
    if mode == "Mean":
        agg = agg / (g.degrees + 1.0)
    return (agg > 0).astype(np.int64)


def misclassification(g: Graph, X, labels, mode: str = "Sum") -> float:
    pred = aggregate_classify(g, X, mode)
    return float(np.mean(pred != np.asarray(labels)))


def _summarize(errors) -> tuple[float, float]:
    errors = np.asarray(errors, dtype=np.float64)
    est = float(errors.mean())
    if errors.size < 2:
        return est, 0.0
    return est, float(errors.std(ddof=1) / math.sqrt(errors.size))


def monte_carlo_error(params: SbmParams, mode: str = "Sum", trials: int = 100, seed: int = 0,
                      stream: int = 0) -> tuple[float, float]:
    """Mean misclassified fraction over ``trials`` independent samples and its standard error.

    Trial ``t`` draws from the RNG stream ``(seed, stream, t)``.  With one
    trial the standard error is reported as 0.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    errs = []
    for t in range(trials):
        s = generate(params, [seed, stream, t])
        errs.append(misclassification(s.graph, s.features, s.labels, mode))
    return _summarize(errs)


# ------------------------------------------------------------------------ sweep

SWEEP_COLUMNS = ("n", "p", "q", "psi", "method", "op", "k", "partition", "trials", "error", "stderr",
                 "accuracy", "gap", "contrast", "edge_homophily", "adjusted_homophily", "nmi",
                 "num_edges", "modifications")


def sweep(n: int, ps, qs, psis, methods=(None,), ops=("Add",), ks=(0,), mode: str = "Sum",
          trials: int = 5, seed: int = 0, planted: bool = False, with_nmi: bool = True,
          with_gap: bool = True, mu0: float = 1.0, sigma0: float = 1.0) -> list[dict]:
    """Grid runner over ``(p, q, psi)`` cells crossed with rewiring settings.

    Cell ``c`` (index over the ``(p, q, psi)`` product) draws trial ``t``
    from the stream ``(seed, c, t)``, so every rewiring setting of a cell
    sees the same samples and the ``k = 0`` row equals
    ``monte_carlo_error(..., seed=seed, stream=c)``.  Rewiring uses the
    Louvain partition of each sample unless ``planted`` is set.
    """
    from .community import louvain
    from .rewiring import RewireRequest, rewire
    from .spectral import spectral_gap

    ps, qs, psis = list(ps), list(qs), list(psis)
    if not (ps and qs and psis):
        raise ValidationError("sweep grid is empty")
    settings = []
    for k in ks:
        if k == 0:
            settings.append((None, None, 0))
        else:
            for m in methods:
                if m is None:
                    continue
                for op in ops:
                    settings.append((m, op, int(k)))
    if not settings:
        raise ValidationError("sweep has no rewiring settings")

    rows = []
    for c, (p, q, psi) in enumerate(itertools.product(ps, qs, psis)):
        params = SbmParams(n=n, p=p, q=q, psi=psi, mu0=mu0, sigma0=sigma0)
        samples = [generate(params, [seed, c, t]) for t in range(trials)]
        for method, op, k in settings:
            errs, gaps, homs, ahoms, nmis, medges, mods = [], [], [], [], [], [], []
            for t, s in enumerate(samples):
                g = s.graph
                if k > 0:
                    part = s.planted if planted else louvain(g, seed=seed)
                    req = RewireRequest(method, op, k, seed=seed)
                    d = rewire(g, req, X=s.features, part=part)
                    g = apply_delta(g, d)
                    mods.append(len(d))
                else:
                    mods.append(0)
                errs.append(misclassification(g, s.features, s.labels, mode))
                if with_gap:
                    gaps.append(spectral_gap(g, method="lanczos").gap)
                homs.append(edge_homophily(g, s.labels))
                ahoms.append(adjusted_homophily(g, s.labels))
                if with_nmi:
                    nmis.append(nmi(s.labels, louvain(g, seed=seed)))
                medges.append(g.num_edges)
            est, se = _summarize(errs)
            rows.append({
                "n": n, "p": p, "q": q, "psi": psi,
                "method": method or "none", "op": op or "none", "k": k,
                "partition": "planted" if planted else "louvain",
                "trials": trials, "error": est, "stderr": se, "accuracy": 1.0 - est,
                "gap": float(np.mean(gaps)) if gaps else math.nan,
                "contrast": -(p - q) / (p + q) if p + q > 0 else math.nan,
                "edge_homophily": float(np.mean(homs)),
                "adjusted_homophily": float(np.nanmean(ahoms)) if not np.all(np.isnan(ahoms)) else math.nan,
                "nmi": float(np.mean(nmis)) if nmis else math.nan,
                "num_edges": float(np.mean(medges)),
                "modifications": float(np.mean(mods)),
            })
    return rows
