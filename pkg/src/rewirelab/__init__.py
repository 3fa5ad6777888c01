"""rewirelab: community- and feature-guided graph rewiring with an SBM theory lab."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .community import louvain, modularity
from .errors import NonConvergenceError, ParseError, ValidationError
from .graph import EdgeDelta, Graph, Partition, apply_delta, combine_deltas
from .io import load_edge_list, load_features, load_labels, save_edge_list, save_report
from .metrics import (
    AlignmentMatrix, adjusted_homophily, alignment_matrix, edge_homophily, mean_edge_similarity, nmi,
)
from .rewiring import RewireRequest, comfy, comma, cosine_similarity, feast, proxy_rewire, rewire
from .sbm import (
    SbmParams, SbmSample, aggregate_classify, generate, monte_carlo_error, recoverability_threshold,
    sweep, theory_error, theory_error_aligned,
)
from .spectral import (
    SpectralState, expected_gap_k_block, expected_gap_two_block, expected_gap_unequal,
    proxy_gap_after_add, proxy_gap_after_del, spectral_gap,
)

__all__ = [
    "BACKEND", "AlignmentMatrix", "EdgeDelta", "Graph", "NonConvergenceError", "ParseError",
    "Partition", "RewireRequest", "SbmParams", "SbmSample", "SpectralState", "ValidationError",
    "adjusted_homophily", "aggregate_classify", "alignment_matrix", "apply_delta", "combine_deltas",
    "comfy", "comma", "cosine_similarity", "edge_homophily", "expected_gap_k_block",
    "expected_gap_two_block", "expected_gap_unequal", "feast", "generate", "load_edge_list",
    "load_features", "load_labels", "louvain", "mean_edge_similarity", "modularity",
    "monte_carlo_error", "nmi", "proxy_gap_after_add", "proxy_gap_after_del", "proxy_rewire",
    "recoverability_threshold", "rewire", "save_edge_list", "save_report", "spectral_gap", "sweep",
    "theory_error", "theory_error_aligned",
]
