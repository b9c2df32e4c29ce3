"""The catalog of small connected induced subgraph patterns.

Covers both 3-node classes, all six 4-node classes, the 5-node path, and an
aggregate bucket for every other connected 5-node class. Identity is decided
by a canonical code: the minimum, over all node permutations, of the
upper-triangle adjacency bits packed into an integer. For k <= 4 a cheap
path via (edge count, sorted degree multiset) separates the same classes and
is checked against the canonical route in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .exceptions import DisconnectedSubgraphError, UnknownPatternError

_PAIR_INDEX: dict[int, tuple[tuple[int, int], ...]] = {
    k: tuple(combinations(range(k), 2)) for k in (2, 3, 4, 5)
}


def pack_bits(adj: np.ndarray) -> int:
    """Pack the upper triangle of a small adjacency matrix into an int."""
    k = adj.shape[0]
    code = 0
    for bit, (i, j) in enumerate(_PAIR_INDEX[k]):
        if adj[i, j]:
            code |= 1 << bit
    return code


@lru_cache(maxsize=None)
def _canonical_table(k: int) -> tuple[int, ...]:
    """Map every packed k-node adjacency code to its permutation-minimal code."""
    pairs = _PAIR_INDEX[k]
    nbits = len(pairs)
    pos = {pair: b for b, pair in enumerate(pairs)}
    # For each permutation, bit b moves to perm_maps[perm][b].
    perm_maps = []
    for perm in permutations(range(k)):
        perm_maps.append(
            tuple(pos[tuple(sorted((perm[i], perm[j])))] for (i, j) in pairs)
        )
    table = []
    for code in range(1 << nbits):
        best = code
        for pmap in perm_maps:
            moved = 0
            rest = code
            while rest:
                b = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                moved |= 1 << pmap[b]
            if moved < best:
                best = moved
        table.append(best)
    return tuple(table)


def canonical_code(adj: np.ndarray) -> int:
    """Permutation-invariant code of a small (k <= 5) adjacency matrix."""
    k = adj.shape[0]
    if k not in (3, 4, 5):
        raise ValueError(f"canonical codes are defined for 3 <= k <= 5, got k={k}")
    return _canonical_table(k)[pack_bits(adj)]


def canonical_of_packed(k: int, code: int) -> int:
    return _canonical_table(k)[code]


@dataclass(frozen=True)
class GraphletPattern:
    """A named connected induced k-node pattern (or the k=5 aggregate bucket)."""

    name: str
    k: int
    q: int | None  # edge count; None for the aggregate bucket
    canonical_code: int | None

    def __repr__(self) -> str:
        return f"GraphletPattern({self.name!r})"


def _pattern(name: str, k: int, edges: list[tuple[int, int]]) -> GraphletPattern:
    adj = np.zeros((k, k), dtype=bool)
    for u, v in edges:
        adj[u, v] = adj[v, u] = True
    return GraphletPattern(name, k, len(edges), canonical_code(adj))


TRIANGLE = _pattern("triangle", 3, [(0, 1), (0, 2), (1, 2)])
OPEN_TRIANGLE = _pattern("open_triangle", 3, [(0, 1), (1, 2)])
FOUR_PATH = _pattern("four_path", 4, [(0, 1), (1, 2), (2, 3)])
THREE_STAR = _pattern("three_star", 4, [(0, 1), (0, 2), (0, 3)])
FOUR_CYCLE = _pattern("four_cycle", 4, [(0, 1), (1, 2), (2, 3), (0, 3)])
TAILED_TRIANGLE = _pattern("tailed_triangle", 4, [(0, 1), (1, 2), (0, 2), (0, 3)])
DIAMOND = _pattern("diamond", 4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
FOUR_CLIQUE = _pattern("four_clique", 4, list(combinations(range(4), 2)))
FIVE_PATH = _pattern("five_path", 5, [(0, 1), (1, 2), (2, 3), (3, 4)])
OTHER_FIVE = GraphletPattern("other_five", 5, None, None)

ALL_PATTERNS: tuple[GraphletPattern, ...] = (
    TRIANGLE,
    OPEN_TRIANGLE,
    FOUR_PATH,
    THREE_STAR,
    FOUR_CYCLE,
    TAILED_TRIANGLE,
    DIAMOND,
    FOUR_CLIQUE,
    FIVE_PATH,
    OTHER_FIVE,
)

PATTERNS_BY_K: dict[int, tuple[GraphletPattern, ...]] = {
    3: (TRIANGLE, OPEN_TRIANGLE),
    4: (FOUR_PATH, THREE_STAR, FOUR_CYCLE, TAILED_TRIANGLE, DIAMOND, FOUR_CLIQUE),
    5: (FIVE_PATH, OTHER_FIVE),
}

_BY_NAME = {p.name: p for p in ALL_PATTERNS}
_BY_CODE = {(p.k, p.canonical_code): p for p in ALL_PATTERNS if p.canonical_code is not None}

# (edge count, sorted degree multiset) -> pattern, for the k=4 cheap route.
_FAST_K4 = {
    (3, (1, 1, 2, 2)): FOUR_PATH,
    (3, (1, 1, 1, 3)): THREE_STAR,
    (4, (2, 2, 2, 2)): FOUR_CYCLE,
    (4, (1, 2, 2, 3)): TAILED_TRIANGLE,
    (5, (2, 2, 3, 3)): DIAMOND,
    (6, (3, 3, 3, 3)): FOUR_CLIQUE,
}


def pattern_by_name(name: str) -> GraphletPattern:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(
            f"unknown pattern {name!r}; choose from {sorted(_BY_NAME)}"
        ) from None


def _is_connected_small(adj: np.ndarray) -> bool:
    k = adj.shape[0]
    if k == 0:
        return False
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in np.nonzero(adj[u])[0]:
            v = int(v)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == k


def classify(adj_small: np.ndarray, via: str = "fast") -> GraphletPattern:
    """Classify a small symmetric zero-diagonal adjacency matrix.

    ``via="fast"`` uses edge count plus degree multiset for k <= 4 and the
    canonical code for k = 5; ``via="canonical"`` uses the canonical code for
    every k. Five-node graphs other than the path fall into the aggregate
    ``other_five`` bucket.
    """
    adj = np.asarray(adj_small, dtype=bool)
    k = adj.shape[0]
    if k not in (3, 4, 5):
        raise ValueError(f"classification covers 3 <= k <= 5, got k={k}")
    if not _is_connected_small(adj):
        raise DisconnectedSubgraphError("subgraph is not connected")
    if via == "canonical" or k == 5:
        code = canonical_code(adj)
        found = _BY_CODE.get((k, code))
        if found is not None:
            return found
        if k == 5:
            return OTHER_FIVE
        raise UnknownPatternError(f"no k={k} pattern with canonical code {code}")
    if via != "fast":
        raise ValueError(f"via must be 'fast' or 'canonical', got {via!r}")
    degrees = tuple(sorted(int(d) for d in adj.sum(axis=1)))
    q = sum(degrees) // 2
    if k == 3:
        return TRIANGLE if q == 3 else OPEN_TRIANGLE
    found = _FAST_K4.get((q, degrees))
    if found is None:
        raise UnknownPatternError(f"no k=4 pattern with q={q}, degrees={degrees}")
    return found
