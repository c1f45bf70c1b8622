"""Plan-ensemble Markov chains: uniform flip, weighted flip, and ReCom.

Flip proposals draw a (node, other-district) pair uniformly at random, which
makes the proposal symmetric; combined with Metropolis acceptance the uniform
flip targets the uniform distribution over valid plans and the weighted flip
targets the Gibbs distribution exp(-beta * cut_edges). ReCom merges the two
districts spanning a uniformly chosen cut edge, draws a uniform spanning tree
of the merged region (Wilson's loop-erased random walk), and cuts an edge
that splits the region into two population-balanced halves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import DualGraph
from .partition import (
    Plan,
    canonical_hash,
    cut_edge_indices,
    cut_edges,
    district_populations,
    is_contiguous,
    population_deviation,
    tally,
)
from . import metrics as metrics_mod


class ChainError(ValueError):
    """Invalid chain configuration or start plan."""


PROPOSALS = ("uniform-flip", "weighted-flip", "recom")

# Fresh spanning trees drawn per ReCom proposal before giving up.
RECOM_TREE_RETRIES = 50


@dataclass
class ChainConfig:
    """Everything a chain run needs besides the graph."""

    proposal: str
    steps: int
    seed: int
    start: Plan
    pop_tolerance: float = 0.01
    cut_edge_bound: int | None = None
    gibbs_beta: float = 0.0
    elections: tuple[str, ...] | None = None  # None -> all elections on the graph
    chain_index: int = 0

    def __post_init__(self):
        if self.proposal not in PROPOSALS:
            raise ChainError(f"unknown proposal {self.proposal!r}")
        if self.steps < 1:
            raise ChainError("steps must be >= 1")
        if not (0.0 < self.pop_tolerance < 1.0):
            raise ChainError("pop_tolerance must lie in (0, 1)")
        if self.gibbs_beta < 0:
            raise ChainError("gibbs_beta must be nonnegative")
        if self.cut_edge_bound is not None and self.cut_edge_bound < 0:
            raise ChainError("cut_edge_bound must be nonnegative")

    def rng(self) -> np.random.Generator:
        """Seeded generator for this chain.

        Stream-splitting rule: chain i of a multi-chain run uses
        SeedSequence(seed, spawn_key=(i,)), so runs are reproducible chain
        by chain.
        """
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.chain_index,))
        )


# ---------------------------------------------------------------------------
# flip proposals


def _draw_flip(graph: DualGraph, plan: Plan, rng: np.random.Generator):
    """Uniform draw of (node, target district != current)."""
    w = int(rng.integers(graph.node_count))
    a = int(plan.assignment[w])
    if plan.k == 2:
        b = 1 - a
    else:
        b = int(rng.integers(plan.k - 1))
        if b >= a:
            b += 1
    return w, a, b


def _flip_is_valid(
    graph: DualGraph,
    plan: Plan,
    w: int,
    a: int,
    b: int,
    pop_tolerance: float,
    cut_edge_bound: int | None,
) -> bool:
    labels = plan.assignment
    # target must stay connected: w needs a neighbor already in b
    if not any(labels[x] == b for x in graph.neighbors[w]):
        return False
    # source must not empty
    source = np.nonzero(labels == a)[0]
    if source.size == 1:
        return False
    # population bounds for the two affected districts
    pops = district_populations(graph, plan)
    ideal = graph.total_population / plan.k
    p = graph.populations[w]
    if abs(pops[a] - p - ideal) > pop_tolerance * ideal:
        return False
    if abs(pops[b] + p - ideal) > pop_tolerance * ideal:
        return False
    # source minus w must stay connected
    remaining = set(int(x) for x in source)
    remaining.discard(w)
    start = next(iter(remaining))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for x in graph.neighbors[v]:
            if x in remaining and x not in seen:
                seen.add(x)
                stack.append(x)
    if len(seen) != len(remaining):
        return False
    if cut_edge_bound is not None:
        if cut_edges(graph, plan) + _flip_cut_delta(graph, plan, w, a, b) > cut_edge_bound:
            return False
    return True


def _flip_cut_delta(graph: DualGraph, plan: Plan, w: int, a: int, b: int) -> int:
    """Change in cut-edge count if node w moves from district a to b."""
    labels = plan.assignment
    to_a = sum(1 for x in graph.neighbors[w] if labels[x] == a)
    to_b = sum(1 for x in graph.neighbors[w] if labels[x] == b)
    return to_a - to_b


def propose_uniform_flip(
    graph: DualGraph,
    plan: Plan,
    rng: np.random.Generator,
    pop_tolerance: float = 0.01,
    cut_edge_bound: int | None = None,
) -> Plan | None:
    """One flip proposal; None means the chain stays put this step."""
    w, a, b = _draw_flip(graph, plan, rng)
    if not _flip_is_valid(graph, plan, w, a, b, pop_tolerance, cut_edge_bound):
        return None
    return plan.with_label(w, b)


def propose_weighted_flip(
    graph: DualGraph,
    plan: Plan,
    rng: np.random.Generator,
    gibbs_beta: float,
    pop_tolerance: float = 0.01,
    cut_edge_bound: int | None = None,
) -> Plan | None:
    """Flip proposal with Metropolis acceptance on the cut-edge energy.

    Acceptance probability is min(1, exp(-beta * (J_new - J_old))) with J the
    cut-edge count. The acceptance uniform is only drawn when the energy
    actually increases and beta > 0, so at beta = 0 this consumes exactly the
    same random stream as propose_uniform_flip and makes identical decisions.
    """
    w, a, b = _draw_flip(graph, plan, rng)
    if not _flip_is_valid(graph, plan, w, a, b, pop_tolerance, cut_edge_bound):
        return None
    if gibbs_beta > 0:
        delta = _flip_cut_delta(graph, plan, w, a, b)
        if delta > 0 and rng.random() >= math.exp(-gibbs_beta * delta):
            return None
    return plan.with_label(w, b)


# ---------------------------------------------------------------------------
# spanning trees and ReCom


@dataclass
class SpanningTree:
    """Rooted spanning tree of a merged two-district region.

    ``nodes`` hold graph indices; ``parent`` holds local indices (-1 at the
    root); ``subtree_pop`` holds the population of each node's subtree.
    """

    nodes: np.ndarray
    parent: np.ndarray
    subtree_pop: np.ndarray

    @property
    def root(self) -> int:
        return int(np.nonzero(self.parent < 0)[0][0])

    @property
    def total_population(self) -> float:
        return float(self.subtree_pop[self.root])

    def edge_list(self) -> list[tuple[int, int]]:
        """Tree edges as (graph node, graph parent) pairs."""
        return [
            (int(self.nodes[v]), int(self.nodes[self.parent[v]]))
            for v in range(len(self.nodes))
            if self.parent[v] >= 0
        ]

    def subtree_nodes(self, v: int) -> np.ndarray:
        """Graph indices of the subtree rooted at local node v."""
        children = [[] for _ in range(len(self.nodes))]
        for u, p in enumerate(self.parent):
            if p >= 0:
                children[p].append(u)
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(children[u])
        return self.nodes[np.array(sorted(out), dtype=np.int64)]

    def subtree_mask(self, v: int) -> np.ndarray:
        """Local boolean mask of the subtree rooted at local node v."""
        m = len(self.nodes)
        children = [[] for _ in range(m)]
        parent = self.parent
        for u in range(m):
            if parent[u] >= 0:
                children[parent[u]].append(u)
        mask = np.zeros(m, dtype=bool)
        stack = [v]
        while stack:
            u = stack.pop()
            mask[u] = True
            stack.extend(children[u])
        return mask


class _BufferedUniform:
    """Amortizes generator calls for tight scalar-draw loops."""

    __slots__ = ("rng", "buf", "pos")

    def __init__(self, rng, size=256):
        self.rng = rng
        self.buf = rng.random(size)
        self.pos = 0

    def pick(self, k: int) -> int:
        """Uniform integer in [0, k)."""
        if self.pos >= len(self.buf):
            self.buf = self.rng.random(len(self.buf))
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return int(u * k)


def random_spanning_tree(
    graph: DualGraph, region, rng: np.random.Generator
) -> SpanningTree:
    """Uniform spanning tree of the induced subgraph via Wilson's algorithm.

    A loop-erased random walk is run from each unvisited node to the growing
    tree; overwriting the successor pointer on revisits performs the loop
    erasure implicitly.
    """
    region = np.asarray(sorted(int(v) for v in region), dtype=np.int64)
    m = len(region)
    lookup = np.full(graph.node_count, -1, dtype=np.int64)
    lookup[region] = np.arange(m)
    local_nbrs = []
    for v in region:
        ns = [int(lookup[w]) for w in graph.neighbors[int(v)] if lookup[w] >= 0]
        local_nbrs.append(ns)
    if m > 1 and any(not ns for ns in local_nbrs):
        raise ChainError("region is disconnected: isolated node in region")

    parent = [-2] * m  # -2 not in tree, -1 root
    parent[0] = -1
    in_tree = [False] * m
    in_tree[0] = True
    successor = [-1] * m
    draws = _BufferedUniform(rng)

    limit = 200 * m * m + 1000  # cover-time safety net for broken regions
    for start in range(1, m):
        if in_tree[start]:
            continue
        v = start
        walk_guard = 0
        while not in_tree[v]:
            ns = local_nbrs[v]
            nxt = ns[draws.pick(len(ns))]
            successor[v] = nxt
            v = nxt
            walk_guard += 1
            if walk_guard > limit:
                raise ChainError("region is disconnected: random walk never reached tree")
        v = start
        while not in_tree[v]:
            in_tree[v] = True
            parent[v] = successor[v]
            v = successor[v]

    parent = np.array(parent, dtype=np.int64)
    # leaf-to-root accumulation along a root-first traversal order
    children = [[] for _ in range(m)]
    for u in range(m):
        if parent[u] >= 0:
            children[parent[u]].append(u)
    order = [0]
    for u in order:
        order.extend(children[u])
    subtree = graph.populations[region].astype(float)
    for u in reversed(order):
        p = parent[u]
        if p >= 0:
            subtree[p] += subtree[u]
    return SpanningTree(nodes=region, parent=parent, subtree_pop=subtree)


def balanced_tree_cut(
    tree: SpanningTree, pop_tolerance: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray] | None:
    """Split the tree's region into two population-balanced node sets.

    Qualifying edges leave both sides within pop_tolerance of half the merged
    population; one is chosen uniformly at random. Returns None when no edge
    qualifies.
    """
    half = tree.total_population / 2.0
    bound = pop_tolerance * half
    deltas = np.abs(tree.subtree_pop - half)
    candidates = np.nonzero((deltas <= bound) & (tree.parent >= 0))[0]
    if candidates.size == 0:
        return None
    v = int(candidates[int(rng.integers(candidates.size))])
    mask = tree.subtree_mask(v)
    return tree.nodes[mask], tree.nodes[~mask]


def propose_recom(
    graph: DualGraph,
    plan: Plan,
    rng: np.random.Generator,
    pop_tolerance: float = 0.01,
    cut_edge_bound: int | None = None,
    tree_retries: int = RECOM_TREE_RETRIES,
) -> Plan | None:
    """One ReCom proposal; None when the tree-cut retry budget is exhausted.

    The merged pair is the pair of districts spanning a uniformly chosen cut
    edge, so pairs are weighted by shared boundary length. Split halves are
    re-checked against the global ideal population because balance relative
    to the merged region alone can compound to exceed the plan-wide bound.
    """
    cut_idx = cut_edge_indices(graph, plan)
    if cut_idx.size == 0:
        return None
    e = graph.edges[cut_idx[int(rng.integers(cut_idx.size))]]
    a = int(plan.assignment[e[0]])
    b = int(plan.assignment[e[1]])
    lo, hi = min(a, b), max(a, b)
    region = np.nonzero((plan.assignment == a) | (plan.assignment == b))[0]
    ideal = graph.total_population / plan.k
    bound = pop_tolerance * ideal

    for _ in range(tree_retries):
        tree = random_spanning_tree(graph, region, rng)
        split = balanced_tree_cut(tree, pop_tolerance, rng)
        if split is None:
            continue
        side, other = split
        # deterministic label handoff: the half holding the smallest node
        # index takes the smaller district label
        if other[0] < side[0]:
            side, other = other, side
        pop_side = graph.populations[side].sum()
        pop_other = graph.populations[other].sum()
        if abs(pop_side - ideal) > bound or abs(pop_other - ideal) > bound:
            continue
        assignment = plan.assignment.copy()
        assignment[side] = lo
        assignment[other] = hi
        candidate = Plan(assignment, plan.k)
        if cut_edge_bound is not None and cut_edges(graph, candidate) > cut_edge_bound:
            continue
        return candidate
    return None


# ---------------------------------------------------------------------------
# chain driver


@dataclass
class EnsembleRecord:
    """One chain step: plan digest plus the full metric vector per election."""

    step: int
    plan_hash: str
    cut_edges: int
    shares: dict[str, tuple[float, ...]]
    metrics: dict[str, metrics_mod.MetricVector]


@dataclass
class ChainStats:
    steps: int = 0
    accepted: int = 0
    rejected: int = 0
    records: list = field(default_factory=list)


def check_start_plan(graph: DualGraph, config: ChainConfig):
    plan = config.start
    if len(plan) != graph.node_count:
        raise ChainError("start plan does not cover the graph")
    if not is_contiguous(graph, plan):
        raise ChainError("start plan has a discontiguous district")
    dev = population_deviation(graph, plan)
    if dev > config.pop_tolerance:
        raise ChainError(
            f"start plan population deviation {dev:.4f} exceeds "
            f"tolerance {config.pop_tolerance}"
        )
    if config.cut_edge_bound is not None:
        ce = cut_edges(graph, plan)
        if ce > config.cut_edge_bound:
            raise ChainError(
                f"start plan has {ce} cut edges, above bound {config.cut_edge_bound}"
            )


def chain_states(graph: DualGraph, config: ChainConfig):
    """Yield (step, plan, accepted) for each step; step counts from 1.

    Rejected and failed proposals advance the step counter and re-yield the
    current plan, so the stream length always equals config.steps.
    """
    check_start_plan(graph, config)
    rng = config.rng()
    plan = config.start
    for step in range(1, config.steps + 1):
        if config.proposal == "uniform-flip":
            new = propose_uniform_flip(
                graph, plan, rng, config.pop_tolerance, config.cut_edge_bound
            )
        elif config.proposal == "weighted-flip":
            new = propose_weighted_flip(
                graph,
                plan,
                rng,
                config.gibbs_beta,
                config.pop_tolerance,
                config.cut_edge_bound,
            )
        else:
            new = propose_recom(
                graph, plan, rng, config.pop_tolerance, config.cut_edge_bound
            )
        accepted = new is not None
        if accepted:
            plan = new
        yield step, plan, accepted


def evaluate_plan(
    graph: DualGraph,
    plan: Plan,
    elections: tuple[str, ...],
    aapd_caches: dict[str, "metrics_mod.AapdNeighborhoods"],
    step: int = 0,
) -> EnsembleRecord:
    """Compute the full EnsembleRecord for one plan."""
    tallies = tally(graph, plan)
    shares = {}
    vectors = {}
    for e in elections:
        sv = metrics_mod.share_vector(tallies, e)
        vectors[e] = metrics_mod.metric_vector(
            graph, plan, tallies, sv, aapd_caches[e]
        )
        shares[e] = tuple(float(s) for s in sv.shares)
    return EnsembleRecord(
        step=step,
        plan_hash=canonical_hash(plan),
        cut_edges=cut_edges(graph, plan),
        shares=shares,
        metrics=vectors,
    )


def run_chain(graph: DualGraph, config: ChainConfig, recorder=None) -> ChainStats:
    """Run the configured chain, emitting one EnsembleRecord per step.

    The recorder is any callable taking an EnsembleRecord; when omitted the
    records are collected on the returned ChainStats. Identical config and
    seed produce a bit-identical record stream.
    """
    elections = config.elections or graph.elections
    for e in elections:
        if e not in graph.elections:
            raise ChainError(f"unknown election {e!r}")
    aapd_caches = {
        e: metrics_mod.AapdNeighborhoods(graph, e, config.start.k) for e in elections
    }
    stats = ChainStats()
    collect = recorder is None
    last: EnsembleRecord | None = None
    for step, plan, accepted in chain_states(graph, config):
        stats.steps += 1
        if accepted or last is None:
            record = evaluate_plan(graph, plan, tuple(elections), aapd_caches, step)
        else:
            record = EnsembleRecord(
                step=step,
                plan_hash=last.plan_hash,
                cut_edges=last.cut_edges,
                shares=last.shares,
                metrics=last.metrics,
            )
        last = record
        if accepted:
            stats.accepted += 1
        else:
            stats.rejected += 1
        if collect:
            stats.records.append(record)
        else:
            recorder(record)
    return stats
