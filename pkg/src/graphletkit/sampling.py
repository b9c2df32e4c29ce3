"""Sampling-based graphlet count estimators with comparison-op accounting.

Two estimators are provided:

* edge sampling: draw edges uniformly with replacement, average the exact
  per-edge occurrence counts, and rescale; unbiased for the true count.
* subgraph random walk: a Metropolis-Hastings walk over the embeddings of
  connected 3-5 node induced subgraphs whose stationary distribution is
  uniform, yielding a graphlet frequency distribution (GFD); counts follow
  by anchoring on an exactly-counted 3-node class.

Comparison-operation accounting counts adjacency-matrix membership tests
and branch comparisons in the estimator inner loops under a fixed,
documented convention (bookkeeping arithmetic like loop indices is free):

* per sampled edge, categorizing the other n-2 nodes against both endpoints
  costs ``2(n-2)``; examining candidate pairs costs ``C(n-2, 2)`` at k=4 and
  ``3*C(n-2, 3)`` at k=5.
* per walk step, evaluating the proposed state's neighborhood costs
  ``n*(k+1)`` candidate-mask tests plus ``k*C(k-1, 2)`` connectivity checks,
  and classifying the visited state costs ``C(k, 2)``.

The exact 3-node anchor count used by the GFD-to-count bridge is computed
outside the sampling loop and is not tallied. Runs are deterministic per
(graph, budget, seed) and independent across seeds, so many runs can
execute in parallel; a counter is per-run state, never shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from .exceptions import (
    NoEdgesError,
    NoSeedGraphletError,
    ZeroAnchorFrequencyError,
)
from .exact import _classify_subset, count_exact, per_edge_count
from .graphs import Graph
from .patterns import GraphletPattern, OPEN_TRIANGLE, pattern_by_name
from .rng import generator, substream_seed

Gfd = dict[str, float]


@dataclass
class OpCounter:
    """Monotone tally of comparison operations consumed by one estimator run."""

    comparisons: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("cannot decrease a comparison tally")
        self.comparisons += k


@dataclass(frozen=True)
class EstimateResult:
    """One estimator run: the estimate and the arithmetic budget it consumed."""

    estimate: float
    ops: int
    budget: int
    seed: int


def _edge_cost(k: int, n: int) -> int:
    cost = 2 * (n - 2)
    if k == 4:
        cost += comb(n - 2, 2)
    elif k == 5:
        cost += 3 * comb(n - 2, 3)
    return cost


def estimate_edge_sampling(
    g: Graph,
    pattern: GraphletPattern | str,
    s: int,
    seed: int = 0,
    counter: OpCounter | None = None,
    full_pass: bool = False,
) -> EstimateResult:
    """Unbiased estimate from ``s`` edges drawn uniformly with replacement.

    The estimate is ``(m/s) * sum(per-edge counts) / q``; every occurrence
    contains q edges, so averaging per-edge counts over a uniform edge and
    rescaling by m/q is unbiased. With ``full_pass=True`` every edge is
    visited exactly once (a deterministic debug mode) and the identity
    collapses to the exact count.
    """
    if isinstance(pattern, str):
        pattern = pattern_by_name(pattern)
    m = g.edge_count
    if m == 0:
        raise NoEdgesError("edge sampling needs at least one edge")
    counter = counter if counter is not None else OpCounter()
    start_ops = counter.comparisons
    n = g.node_count
    cost = _edge_cost(pattern.k, n)
    if full_pass:
        chosen = list(g.edges)
        s = m
    else:
        if s < 1:
            raise ValueError(f"sample count must be >= 1, got {s}")
        rng = generator(seed)
        edges = g.edges
        # One draw per step keeps ops(s) a prefix of ops(s+1) for one seed.
        chosen = [edges[int(rng.integers(m))] for _ in range(s)]
    total = 0
    for e in chosen:
        total += per_edge_count(g, e, pattern)
        counter.add(cost)
    estimate = (m / s) * total / pattern.q
    return EstimateResult(estimate, counter.comparisons - start_ops, s, seed)


class _EmbeddingWalk:
    """Uniform-stationary MH walk over connected 3-5 node subsets."""

    MIN_K = 3
    MAX_K = 5

    def __init__(self, g: Graph):
        self.n = g.node_count
        self.adj = g.neighbor_bits

    def seed_state(self) -> tuple[int, ...]:
        for u in range(self.n):
            au = self.adj[u]
            rest = au
            while rest:
                v_bit = rest & -rest
                rest &= rest - 1
                v = v_bit.bit_length() - 1
                if v < u:
                    continue
                third = (au | self.adj[v]) & ~(1 << u) & ~v_bit
                if third:
                    w = (third & -third).bit_length() - 1
                    return tuple(sorted((u, v, w)))
        raise NoSeedGraphletError("graph has no connected 3-node subgraph")

    def _components(self, mask: int) -> list[int]:
        comps = []
        rest = mask
        while rest:
            start = rest & -rest
            seen = start
            frontier = start
            while frontier:
                nxt = 0
                while frontier:
                    bit = frontier & -frontier
                    frontier &= frontier - 1
                    nxt |= self.adj[bit.bit_length() - 1] & mask
                frontier = nxt & ~seen
                seen |= nxt
            comps.append(seen)
            rest &= ~seen
        return comps

    def neighborhood(self, nodes: tuple[int, ...]):
        """All valid moves from a state: (total, swaps, grow_mask, shrinks)."""
        mask = 0
        for v in nodes:
            mask |= 1 << v
        k = len(nodes)
        swaps = []  # (removed node, mask of valid replacements, count)
        shrinks = []
        union_all = 0
        for v in nodes:
            union_all |= self.adj[v]
        for x in nodes:
            rem = mask & ~(1 << x)
            comps = self._components(rem)
            glue = ~mask
            for comp in comps:
                acc = 0
                rest = comp
                while rest:
                    bit = rest & -rest
                    rest &= rest - 1
                    acc |= self.adj[bit.bit_length() - 1]
                glue &= acc
            cnt = glue.bit_count()
            if cnt:
                swaps.append((x, glue, cnt))
            if k > self.MIN_K and len(comps) == 1:
                shrinks.append(x)
        grow_mask = 0
        if k < self.MAX_K:
            grow_mask = union_all & ~mask
        total = sum(c for _, _, c in swaps) + grow_mask.bit_count() + len(shrinks)
        return total, swaps, grow_mask, shrinks

    @staticmethod
    def _nth_bit(mask: int, idx: int) -> int:
        for _ in range(idx):
            mask &= mask - 1
        return (mask & -mask).bit_length() - 1

    def pick(self, nodes, swaps, grow_mask, shrinks, idx: int) -> tuple[int, ...]:
        for x, glue, cnt in swaps:
            if idx < cnt:
                y = self._nth_bit(glue, idx)
                return tuple(sorted([v for v in nodes if v != x] + [y]))
            idx -= cnt
        ngrow = grow_mask.bit_count()
        if idx < ngrow:
            y = self._nth_bit(grow_mask, idx)
            return tuple(sorted(nodes + (y,)))
        idx -= ngrow
        x = shrinks[idx]
        return tuple(v for v in nodes if v != x)


def _step_cost(k: int, n: int) -> int:
    return n * (k + 1) + k * comb(k - 1, 2)


def estimate_guise_gfd(
    g: Graph,
    steps: int,
    burn_in: int = 0,
    seed: int = 0,
    counter: OpCounter | None = None,
) -> Gfd:
    """Graphlet frequency distribution from a uniform-stationary walk.

    Proposals are uniform over the neighbor states reachable by swapping one
    member, growing to k+1, or shrinking to k-1 (connectedness preserved);
    acceptance ``min(1, |N(current)|/|N(proposed)|)`` makes the stationary
    distribution uniform over embeddings. Frequencies tally the visited
    pattern classes after each post-burn-in step.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not 0 <= burn_in < steps:
        raise ValueError(f"burn_in must be in [0, steps), got {burn_in}")
    counter = counter if counter is not None else OpCounter()
    walk = _EmbeddingWalk(g)
    state = walk.seed_state()
    rng = generator(seed)
    n = g.node_count
    adj_bits = g.neighbor_bits

    cur_total, cur_swaps, cur_grow, cur_shrinks = walk.neighborhood(state)
    counter.add(_step_cost(len(state), n))
    visits: dict[str, int] = {}
    tallied = 0
    for step in range(steps):
        if cur_total > 0:
            idx = int(rng.integers(cur_total))
            proposal = walk.pick(state, cur_swaps, cur_grow, cur_shrinks, idx)
            prop_total, prop_swaps, prop_grow, prop_shrinks = walk.neighborhood(proposal)
            counter.add(_step_cost(len(proposal), n))
            if cur_total >= prop_total or rng.random() < cur_total / prop_total:
                state = proposal
                cur_total, cur_swaps, cur_grow, cur_shrinks = (
                    prop_total,
                    prop_swaps,
                    prop_grow,
                    prop_shrinks,
                )
        counter.add(comb(len(state), 2))
        if step >= burn_in:
            name = _classify_subset(adj_bits, state).name
            visits[name] = visits.get(name, 0) + 1
            tallied += 1
    return {name: count / tallied for name, count in visits.items()}


def counts_from_gfd(
    gfd: Gfd, anchor: GraphletPattern | str, anchor_count: float
) -> dict[str, float]:
    """Convert visit frequencies to count estimates via an exactly-known anchor."""
    anchor_name = anchor if isinstance(anchor, str) else anchor.name
    anchor_freq = gfd.get(anchor_name, 0.0)
    if anchor_freq <= 0:
        raise ZeroAnchorFrequencyError(
            f"anchor {anchor_name!r} was never visited; cannot scale frequencies"
        )
    return {name: freq / anchor_freq * anchor_count for name, freq in gfd.items()}


def estimate_mcmc_count(
    g: Graph,
    pattern: GraphletPattern | str,
    steps: int,
    seed: int = 0,
    counter: OpCounter | None = None,
    burn_in: int | None = None,
    anchor: GraphletPattern | str = OPEN_TRIANGLE,
) -> EstimateResult:
    """Count estimate from the walk's GFD anchored on a 3-node closed form.

    A walk too short to visit the anchor class cannot be scaled and yields
    an estimate of 0.
    """
    if isinstance(pattern, str):
        pattern = pattern_by_name(pattern)
    counter = counter if counter is not None else OpCounter()
    start_ops = counter.comparisons
    if burn_in is None:
        burn_in = steps // 10
    gfd = estimate_guise_gfd(g, steps, burn_in=burn_in, seed=seed, counter=counter)
    anchor_count = count_exact(g, anchor if isinstance(anchor, str) else anchor.name)
    try:
        estimates = counts_from_gfd(gfd, anchor, anchor_count)
        estimate = estimates.get(pattern.name, 0.0)
    except ZeroAnchorFrequencyError:
        estimate = 0.0
    return EstimateResult(estimate, counter.comparisons - start_ops, steps, seed)


@dataclass(frozen=True)
class TuneResult:
    """Outcome of matching an estimator's budget to a target relative error."""

    budget: int
    achieved_error: float
    cap_reached: bool
    mean_ops: float


def tune_budget_to_error(
    graphs: list[Graph],
    pattern: GraphletPattern | str,
    target_rel_error: float,
    estimator,
    cap: int,
    seed: int = 0,
    truths: list[float] | None = None,
) -> TuneResult:
    """Double the budget until the measured relative error comes within 20%
    above ``target_rel_error``, or the cap is reached (flagged, not fatal).

    ``estimator`` is called as ``estimator(graph, budget, seed, counter)``
    and must return a count estimate; each graph gets its own derived seed.
    """
    if target_rel_error <= 0:
        raise ValueError("target_rel_error must be positive")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if isinstance(pattern, str):
        pattern = pattern_by_name(pattern)
    if truths is None:
        truths = [float(count_exact(g, pattern)) for g in graphs]
    mean_truth = sum(truths) / len(truths)
    if mean_truth <= 0:
        raise ZeroAnchorFrequencyError("tuning needs a positive mean ground truth")

    def measure(budget: int) -> tuple[float, float]:
        abs_err = 0.0
        ops = 0
        for i, (g, truth) in enumerate(zip(graphs, truths)):
            counter = OpCounter()
            run_seed = substream_seed(seed, f"budget{budget}:graph{i}")
            est = estimator(g, budget, run_seed, counter)
            abs_err += abs(est - truth)
            ops += counter.comparisons
        return (abs_err / len(graphs)) / mean_truth, ops / len(graphs)

    budget = 1
    while True:
        err, mean_ops = measure(budget)
        if err <= 1.2 * target_rel_error:
            return TuneResult(budget, err, False, mean_ops)
        if budget >= cap:
            return TuneResult(budget, err, True, mean_ops)
        budget = min(budget * 2, cap)
