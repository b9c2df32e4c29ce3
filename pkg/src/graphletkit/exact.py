"""Exact induced-graphlet counting.

This is the source of every training label and the verification oracle for
the estimators. Two independent routes are provided:

* enumeration: ESU-style growth yields each connected induced k-node subset
  exactly once; each subset is classified and tallied (`count_all`).
* closed forms: triangle/open-triangle counts from degree sums, and all six
  4-node pattern counts from subgraph-count formulas followed by an
  inclusion-exclusion step down to induced counts (`four_pattern_counts`).

`count_exact` prefers the closed forms (they keep 50-node label generation
in the milliseconds) and falls back to enumeration at k=5; the test suite
pins the two routes against each other and against a brute-force subset
filter.

All operations are pure functions of immutable graphs and safe to run
data-parallel across graphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np

from .exceptions import NotAnEdgeError
from .graphs import Graph
from .patterns import (
    DIAMOND,
    FIVE_PATH,
    FOUR_CLIQUE,
    FOUR_CYCLE,
    FOUR_PATH,
    GraphletPattern,
    OPEN_TRIANGLE,
    OTHER_FIVE,
    PATTERNS_BY_K,
    TAILED_TRIANGLE,
    THREE_STAR,
    TRIANGLE,
    canonical_of_packed,
    classify,
    pattern_by_name,
)


@dataclass(frozen=True)
class CountVector:
    """Counts of every k-node pattern class of one graph."""

    k: int
    counts: dict[GraphletPattern, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, pattern: GraphletPattern) -> int:
        return self.counts[pattern]


def enumerate_connected_induced(g: Graph, k: int) -> Iterator[tuple[int, ...]]:
    """Yield each connected induced k-node subset of ``g`` exactly once.

    ESU growth: starting from each root, extend with exclusive neighbors
    (nodes adjacent to the newly added node but not to the current subset)
    restricted to indices above the root.
    """
    if k not in (3, 4, 5):
        raise ValueError(f"subset size must be in 3..5, got {k}")
    n = g.node_count
    if n < k:
        return
    adj = g.neighbor_bits

    def extend(sub: tuple[int, ...], ext: int, closed: int, above: int):
        if len(sub) + 1 == k:
            while ext:
                u_bit = ext & -ext
                ext &= ext - 1
                yield sub + (u_bit.bit_length() - 1,)
            return
        while ext:
            u_bit = ext & -ext
            ext &= ext - 1
            u = u_bit.bit_length() - 1
            new_closed = closed | adj[u] | u_bit
            yield from extend(sub + (u,), ext | (adj[u] & ~closed & above), new_closed, above)

    full = (1 << n) - 1
    for v in range(n):
        above = full & ~((1 << (v + 1)) - 1)
        ext0 = adj[v] & above
        if ext0:
            yield from extend((v,), ext0, adj[v] | (1 << v), above)


def _classify_subset(adj_bits, sub: tuple[int, ...]) -> GraphletPattern:
    """Classify an already-connected subset via bit operations."""
    mask = 0
    for v in sub:
        mask |= 1 << v
    degs = sorted((adj_bits[v] & mask).bit_count() for v in sub)
    q = sum(degs) // 2
    k = len(sub)
    if k == 3:
        return TRIANGLE if q == 3 else OPEN_TRIANGLE
    if k == 4:
        return _FAST4[(q, tuple(degs))]
    # k == 5: the path is the only named class.
    if q == 4 and degs == [1, 1, 2, 2, 2]:
        return FIVE_PATH
    return OTHER_FIVE


_FAST4 = {
    (3, (1, 1, 2, 2)): FOUR_PATH,
    (3, (1, 1, 1, 3)): THREE_STAR,
    (4, (2, 2, 2, 2)): FOUR_CYCLE,
    (4, (1, 2, 2, 3)): TAILED_TRIANGLE,
    (5, (2, 2, 3, 3)): DIAMOND,
    (6, (3, 3, 3, 3)): FOUR_CLIQUE,
}


def count_all(g: Graph, k: int) -> CountVector:
    """Count every k-node pattern in one enumeration pass."""
    counts = {p: 0 for p in PATTERNS_BY_K[k]}
    adj_bits = g.neighbor_bits
    for sub in enumerate_connected_induced(g, k):
        counts[_classify_subset(adj_bits, sub)] += 1
    return CountVector(k, counts)


def triangle_count_fast(g: Graph) -> int:
    """Triangles via the adjacency-triple scan trace(A^3)/6."""
    a = g.adjacency.astype(np.int64)
    return int(((a @ a) * a).sum()) // 6


def open_triangle_count_fast(g: Graph) -> int:
    """Induced 2-paths: sum of C(deg, 2) minus three per triangle."""
    paths = int(sum(d * (d - 1) // 2 for d in g.degrees))
    return paths - 3 * triangle_count_fast(g)


def four_pattern_counts(g: Graph) -> dict[GraphletPattern, int]:
    """Induced counts of all six 4-node patterns from closed-form subgraph counts.

    Subgraph (not-necessarily-induced) counts of the path, star, cycle, paw,
    diamond, and clique have classical degree/codegree formulas; the induced
    counts follow by subtracting each denser class's embeddings.
    """
    n = g.node_count
    a = g.adjacency.astype(np.int64)
    d = g.degrees
    if n < 4:
        return {p: 0 for p in PATTERNS_BY_K[4]}
    a2 = a @ a
    codeg_on_edges = a2 * a
    triangles = int(codeg_on_edges.sum()) // 6
    tri_at_node = codeg_on_edges.sum(axis=1) // 2

    # Clique: for each edge, adjacent pairs inside the common neighborhood.
    k4_six = 0
    adj_bool = g.adjacency
    rows, cols = np.nonzero(np.triu(adj_bool, 1))
    for u, v in zip(rows, cols):
        common = np.nonzero(adj_bool[u] & adj_bool[v])[0]
        if len(common) >= 2:
            k4_six += int(adj_bool[np.ix_(common, common)].sum()) // 2
    i_clique = k4_six // 6

    choose2 = a2 * (a2 - 1) // 2
    np.fill_diagonal(choose2, 0)
    n_cycle = int(choose2.sum()) // 4
    n_diamond = int((choose2 * a).sum()) // 2
    n_paw = int((tri_at_node * (d - 2)).sum())
    n_star = int(sum(comb(int(x), 3) for x in d))
    dm1 = d - 1
    n_path = int((np.outer(dm1, dm1) * a).sum()) // 2 - 3 * triangles

    i_diamond = n_diamond - 6 * i_clique
    i_cycle = n_cycle - i_diamond - 3 * i_clique
    i_paw = n_paw - 4 * i_diamond - 12 * i_clique
    i_star = n_star - i_paw - 2 * i_diamond - 4 * i_clique
    i_path = n_path - 4 * i_cycle - 2 * i_paw - 6 * i_diamond - 12 * i_clique
    return {
        FOUR_PATH: i_path,
        THREE_STAR: i_star,
        FOUR_CYCLE: i_cycle,
        TAILED_TRIANGLE: i_paw,
        DIAMOND: i_diamond,
        FOUR_CLIQUE: i_clique,
    }


def count_exact(g: Graph, pattern: GraphletPattern | str) -> int:
    """Number of connected induced k-subsets classifying to ``pattern``."""
    if isinstance(pattern, str):
        pattern = pattern_by_name(pattern)
    if pattern.k == 3:
        if pattern is TRIANGLE:
            return triangle_count_fast(g)
        return open_triangle_count_fast(g)
    if pattern.k == 4:
        return four_pattern_counts(g)[pattern]
    return count_all(g, 5).counts[pattern]


def per_edge_count(g: Graph, edge: tuple[int, int], pattern: GraphletPattern | str) -> int:
    """Induced occurrences of ``pattern`` whose node set contains both endpoints.

    The occurrence's induced subgraph then necessarily uses the edge, so the
    counts satisfy sum over edges = q * count_exact.
    """
    if isinstance(pattern, str):
        pattern = pattern_by_name(pattern)
    u, v = edge
    if not g.has_edge(u, v):
        raise NotAnEdgeError(f"({u},{v}) is not an edge")
    adj = g.adjacency
    n = g.node_count
    others = np.ones(n, dtype=bool)
    others[[u, v]] = False
    to_u = adj[u] & others
    to_v = adj[v] & others
    if pattern.k == 3:
        both = int((to_u & to_v).sum())
        if pattern is TRIANGLE:
            return both
        return int(to_u.sum()) + int(to_v.sum()) - 2 * both
    if pattern.k == 4:
        return _per_edge_four(adj, others, to_u, to_v, pattern)
    return _per_edge_enumerated(g, u, v, pattern)


def _pairs_within(adj: np.ndarray, idx: np.ndarray) -> int:
    if len(idx) < 2:
        return 0
    return int(adj[np.ix_(idx, idx)].sum()) // 2


def _pairs_between(adj: np.ndarray, idx_a: np.ndarray, idx_b: np.ndarray) -> int:
    if len(idx_a) == 0 or len(idx_b) == 0:
        return 0
    return int(adj[np.ix_(idx_a, idx_b)].sum())


def _per_edge_four(adj, others, to_u, to_v, pattern: GraphletPattern) -> int:
    """Count 4-node occurrences around one edge by candidate-pair category.

    Candidates split by adjacency to the endpoints into U (u only), V (v
    only), B (both), O (neither); the pattern of {u, v, x, y} is determined
    by the categories of x, y and whether x~y.
    """
    only_u = np.nonzero(to_u & ~to_v)[0]
    only_v = np.nonzero(to_v & ~to_u)[0]
    both = np.nonzero(to_u & to_v)[0]
    neither = np.nonzero(others & ~to_u & ~to_v)[0]
    nu, nv, nb = len(only_u), len(only_v), len(both)
    if pattern is FOUR_PATH:
        return (
            _pairs_between(adj, neither, only_u)
            + _pairs_between(adj, neither, only_v)
            + (nu * nv - _pairs_between(adj, only_u, only_v))
        )
    if pattern is THREE_STAR:
        return (
            comb(nu, 2)
            - _pairs_within(adj, only_u)
            + comb(nv, 2)
            - _pairs_within(adj, only_v)
        )
    if pattern is FOUR_CYCLE:
        return _pairs_between(adj, only_u, only_v)
    if pattern is TAILED_TRIANGLE:
        return (
            _pairs_between(adj, neither, both)
            + _pairs_within(adj, only_u)
            + _pairs_within(adj, only_v)
            + (nu * nb - _pairs_between(adj, only_u, both))
            + (nv * nb - _pairs_between(adj, only_v, both))
        )
    if pattern is DIAMOND:
        return (
            _pairs_between(adj, only_u, both)
            + _pairs_between(adj, only_v, both)
            + (comb(nb, 2) - _pairs_within(adj, both))
        )
    if pattern is FOUR_CLIQUE:
        return _pairs_within(adj, both)
    raise ValueError(f"not a 4-node pattern: {pattern!r}")


def _per_edge_enumerated(g: Graph, u: int, v: int, pattern: GraphletPattern) -> int:
    """Brute-force route for k=5: try every extra triple around the edge."""
    from itertools import combinations as _comb

    adj_bits = g.neighbor_bits
    count = 0
    rest = [w for w in range(g.node_count) if w not in (u, v)]
    for triple in _comb(rest, 3):
        sub = (u, v) + triple
        mask = 0
        for w in sub:
            mask |= 1 << w
        if not _connected_bits(adj_bits, sub, mask):
            continue
        if _classify_subset(adj_bits, sub) is pattern:
            count += 1
    return count


def _connected_bits(adj_bits, sub: tuple[int, ...], mask: int) -> bool:
    start = 1 << sub[0]
    seen = start
    frontier = start
    while frontier:
        nxt = 0
        while frontier:
            bit = frontier & -frontier
            frontier &= frontier - 1
            nxt |= adj_bits[bit.bit_length() - 1] & mask
        frontier = nxt & ~seen
        seen |= nxt
    return seen & mask == mask


def count_vector_union(g: Graph) -> dict[GraphletPattern, int]:
    """Counts over all pattern classes of sizes 3, 4, and 5 in one mapping."""
    out: dict[GraphletPattern, int] = {}
    for k in (3, 4, 5):
        out.update(count_all(g, k).counts)
    return out
