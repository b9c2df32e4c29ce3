"""Input validation helpers shared by the core types and the estimator API."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .exceptions import NonFiniteTensorError, ShapeMismatchError


def as_bool_adjacency(matrix) -> np.ndarray:
    """Validate and convert a square 0/1 matrix to a boolean adjacency array.

    Requires symmetry and a zero diagonal; returns a C-contiguous bool copy.
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        vals = np.unique(arr)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        arr = arr.astype(bool)
    if arr.shape[0] and arr.diagonal().any():
        raise ValueError("adjacency must have a zero diagonal (no self-loops)")
    if not np.array_equal(arr, arr.T):
        raise ValueError("adjacency must be symmetric")
    return np.ascontiguousarray(arr)


def check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {p}")
    return p


def check_nonnegative_int(n, name: str) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {n!r}")
    return int(n)


def check_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.isfinite(arr).all():
        raise NonFiniteTensorError(f"{name} contains NaN or Inf")
    return arr


def check_same_length(a: Sequence, b: Sequence, what: str = "sequences") -> int:
    if len(a) != len(b):
        raise ShapeMismatchError(f"{what} differ in length: {len(a)} vs {len(b)}")
    return len(a)


def as_graph_list(X) -> list:
    """Coerce estimator input into a list of :class:`~graphletkit.graphs.Graph`.

    Accepts an iterable of Graph objects, adjacency matrices, or a single
    3-D array of stacked adjacency matrices.
    """
    from .graphs import Graph

    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [Graph.from_adjacency(X[i]) for i in range(X.shape[0])]
    if isinstance(X, Graph):
        raise ValueError("expected a collection of graphs, got a single Graph")
    if not isinstance(X, Iterable):
        raise ValueError(f"cannot interpret {type(X).__name__} as a graph collection")
    out = []
    for item in X:
        out.append(item if isinstance(item, Graph) else Graph.from_adjacency(item))
    return out
