"""Graphlet counting for small graphs.

Exact induced-subgraph counts, sampling-based estimators with operation
accounting, and a small CNN that learns to predict counts from zero-padded
adjacency matrices, wrapped in a scikit-learn style estimator API.
"""

import logging

__version__ = "0.1.0"

from .estimator import AdjacencyPadder, GraphletCountRegressor
from .exact import (
    CountVector,
    count_all,
    count_exact,
    enumerate_connected_induced,
    four_pattern_counts,
    open_triangle_count_fast,
    per_edge_count,
    triangle_count_fast,
)
from .graphs import (
    ErConfig,
    Graph,
    PaddedMatrix,
    RggConfig,
    gen_er,
    gen_rgg,
    pad_to,
    swap_augment,
)
from .patterns import ALL_PATTERNS, PATTERNS_BY_K, GraphletPattern, classify, pattern_by_name
from .sampling import (
    EstimateResult,
    OpCounter,
    counts_from_gfd,
    estimate_edge_sampling,
    estimate_guise_gfd,
    estimate_mcmc_count,
    tune_budget_to_error,
)

logging.getLogger("graphletkit").addHandler(logging.NullHandler())

__all__ = [
    "ALL_PATTERNS",
    "AdjacencyPadder",
    "CountVector",
    "ErConfig",
    "EstimateResult",
    "Graph",
    "GraphletCountRegressor",
    "GraphletPattern",
    "OpCounter",
    "PATTERNS_BY_K",
    "PaddedMatrix",
    "RggConfig",
    "classify",
    "count_all",
    "count_exact",
    "counts_from_gfd",
    "enumerate_connected_induced",
    "estimate_edge_sampling",
    "estimate_guise_gfd",
    "estimate_mcmc_count",
    "four_pattern_counts",
    "gen_er",
    "gen_rgg",
    "open_triangle_count_fast",
    "pad_to",
    "pattern_by_name",
    "per_edge_count",
    "swap_augment",
    "triangle_count_fast",
    "tune_budget_to_error",
]
