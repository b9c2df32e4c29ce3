"""Undirected simple graphs, random generators, and matrix preprocessing.

Graphs are immutable after construction: the adjacency array is marked
read-only and derived views are cached. Generation and preprocessing of
distinct samples only depend on that sample's seed, so they can run
data-parallel with no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import DimensionTooSmallError
from .rng import generator
from .validation import as_bool_adjacency, check_nonnegative_int, check_probability


@dataclass(frozen=True)
class ErConfig:
    """Parameters of an Erdos-Renyi graph: each pair is an edge with probability p."""

    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        check_nonnegative_int(self.n, "n")
        check_probability(self.p)


@dataclass(frozen=True)
class RggConfig:
    """Parameters of a random geometric graph on the unit square/cube.

    Nodes are dropped uniformly at random in [0, 1]^dim and joined when
    their Euclidean distance is at most ``r``. ``dim`` defaults to 3 (unit
    cube); 2 gives the planar variant.
    """

    n: int
    r: float
    dim: int = 3
    seed: int = 0

    def __post_init__(self):
        check_nonnegative_int(self.n, "n")
        if self.r < 0:
            raise ValueError(f"radius must be >= 0, got {self.r}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")


@dataclass(eq=False)
class Graph:
    """Undirected simple graph backed by a symmetric boolean adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        arr = as_bool_adjacency(self.adjacency)
        arr.setflags(write=False)
        object.__setattr__(self, "adjacency", arr)

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        return cls(np.asarray(matrix))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        check_nonnegative_int(n, "n")
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop ({u},{u}) not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        iu, ju = np.nonzero(np.triu(self.adjacency, 1))
        return tuple((int(u), int(v)) for u, v in zip(iu, ju))

    @cached_property
    def degrees(self) -> np.ndarray:
        d = self.adjacency.sum(axis=1).astype(np.int64)
        d.setflags(write=False)
        return d

    @cached_property
    def neighbor_bits(self) -> tuple[int, ...]:
        """Per-node neighbor sets packed into Python ints (bit i = node i)."""
        out = []
        for row in self.adjacency:
            bits = 0
            for v in np.nonzero(row)[0]:
                bits |= 1 << int(v)
            out.append(bits)
        return tuple(out)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


def gen_er(cfg: ErConfig) -> Graph:
    """Sample an Erdos-Renyi graph; deterministic for a fixed seed."""
    rng = generator(cfg.seed)
    u = rng.random((cfg.n, cfg.n))
    upper = np.triu(u < cfg.p, 1)
    return Graph(upper | upper.T)


def gen_rgg(cfg: RggConfig) -> Graph:
    """Sample a random geometric graph; deterministic for a fixed seed."""
    rng = generator(cfg.seed)
    pts = rng.random((cfg.n, cfg.dim))
    diff = pts[:, None, :] - pts[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    adj = dist2 <= cfg.r * cfg.r
    np.fill_diagonal(adj, False)
    return Graph(adj)


@dataclass(eq=False)
class PaddedMatrix:
    """An N x N {0,1} matrix holding a graph's adjacency in its top-left block.

    ``original_node_count`` records how many rows were real nodes when the
    matrix was created; rows beyond it are all zero immediately after
    padding, before any augmentation swaps move them around.
    """

    values: np.ndarray
    original_node_count: int = field(default=-1)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.original_node_count < 0:
            object.__setattr__(self, "original_node_count", arr.shape[0])
        if self.original_node_count > arr.shape[0]:
            raise ValueError("original_node_count exceeds matrix dimension")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def to_graph(self) -> Graph:
        """View the full padded matrix as a graph (padding rows = isolated nodes)."""
        return Graph(self.values.astype(bool))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PaddedMatrix)
            and self.original_node_count == other.original_node_count
            and np.array_equal(self.values, other.values)
        )


def pad_to(g: Graph, pad_dim: int) -> PaddedMatrix:
    """Embed ``g``'s adjacency in the top-left of a ``pad_dim`` x ``pad_dim`` zero matrix."""
    n = g.node_count
    if pad_dim < n:
        raise DimensionTooSmallError(f"pad dimension {pad_dim} < node count {n}")
    out = np.zeros((pad_dim, pad_dim), dtype=np.float32)
    out[:n, :n] = g.adjacency
    return PaddedMatrix(out, original_node_count=n)


def swap_rows_cols(values: np.ndarray, i: int, j: int) -> np.ndarray:
    """Return a copy of ``values`` with rows i,j and columns i,j exchanged."""
    out = np.array(values)
    out[[i, j], :] = out[[j, i], :]
    out[:, [i, j]] = out[:, [j, i]]
    return out


def swap_augment(mx: PaddedMatrix, m: int, seed: int = 0) -> list[PaddedMatrix]:
    """Produce ``m`` matrices of graphs isomorphic to ``mx``'s by random swaps.

    Each output applies one more random transposition (row and column i,j
    exchanged simultaneously) on top of the previous output. Indices are
    drawn from the full padded range, so zero padding rows participate.
    """
    check_nonnegative_int(m, "m")
    dim = mx.dim
    if dim < 2:
        return [PaddedMatrix(mx.values, mx.original_node_count) for _ in range(m)]
    rng = generator(seed)
    out: list[PaddedMatrix] = []
    current = mx.values
    for _ in range(m):
        i = int(rng.integers(dim))
        j = int(rng.integers(dim - 1))
        if j >= i:
            j += 1
        current = swap_rows_cols(current, i, j)
        out.append(PaddedMatrix(current, original_node_count=mx.original_node_count))
    return out
