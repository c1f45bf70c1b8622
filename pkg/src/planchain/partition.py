"""Districting plans and their structural properties.

A plan assigns every precinct to one of k districts. All operations here are
pure functions of (graph, plan), so plans can move freely between workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .graph import DualGraph


class PlanError(ValueError):
    """The assignment array is not a valid plan."""


class Plan:
    """Assignment of every node to a district label in [0, k)."""

    __slots__ = ("assignment", "k")

    def __init__(self, assignment, k: int):
        arr = np.asarray(assignment, dtype=np.int64).copy()
        if arr.ndim != 1:
            raise PlanError("assignment must be one-dimensional")
        if k < 1:
            raise PlanError("district count must be positive")
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise PlanError(f"district labels must lie in [0, {k})")
        sizes = np.bincount(arr, minlength=k)
        if (sizes == 0).any():
            empty = np.nonzero(sizes == 0)[0].tolist()
            raise PlanError(f"empty district(s): {empty}")
        arr.setflags(write=False)
        self.assignment = arr
        self.k = k

    def __len__(self) -> int:
        return self.assignment.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Plan):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash((self.k, self.assignment.tobytes()))

    def __repr__(self) -> str:
        return f"Plan(n={len(self)}, k={self.k})"

    def with_label(self, node: int, label: int) -> "Plan":
        """Copy of this plan with one node reassigned."""
        arr = self.assignment.copy()
        arr[node] = label
        return Plan(arr, self.k)


@dataclass(frozen=True)
class DistrictTally:
    """Per-district aggregates for one plan."""

    district: int
    population: int
    votes: dict[str, tuple[int, int]]  # election -> (rep_votes, dem_votes)


def _check_plan(graph: DualGraph, plan: Plan):
    if len(plan) != graph.node_count:
        raise PlanError(
            f"plan covers {len(plan)} nodes but graph has {graph.node_count}"
        )


def tally(graph: DualGraph, plan: Plan) -> list[DistrictTally]:
    """Aggregate population and votes per district; additive over precincts."""
    _check_plan(graph, plan)
    labels = plan.assignment
    pops = np.bincount(labels, weights=graph.populations, minlength=plan.k)
    per_election = {
        e: (
            np.bincount(labels, weights=v[:, 0], minlength=plan.k),
            np.bincount(labels, weights=v[:, 1], minlength=plan.k),
        )
        for e, v in graph.votes.items()
    }
    return [
        DistrictTally(
            district=d,
            population=int(round(pops[d])),
            votes={
                e: (int(round(rep[d])), int(round(dem[d])))
                for e, (rep, dem) in per_election.items()
            },
        )
        for d in range(plan.k)
    ]


def district_populations(graph: DualGraph, plan: Plan) -> np.ndarray:
    _check_plan(graph, plan)
    return np.bincount(plan.assignment, weights=graph.populations, minlength=plan.k)


def population_deviation(graph: DualGraph, plan: Plan) -> float:
    """Largest relative deviation of any district from the ideal total/k."""
    pops = district_populations(graph, plan)
    ideal = graph.total_population / plan.k
    return float(np.abs(pops - ideal).max() / ideal)


def is_contiguous(graph: DualGraph, plan: Plan) -> bool:
    """True iff every district induces a connected subgraph."""
    _check_plan(graph, plan)
    labels = plan.assignment
    seen = np.zeros(graph.node_count, dtype=bool)
    for d in range(plan.k):
        members = np.nonzero(labels == d)[0]
        stack = [int(members[0])]
        seen[members[0]] = True
        reached = 1
        while stack:
            v = stack.pop()
            for w in graph.neighbors[v]:
                if labels[w] == d and not seen[w]:
                    seen[w] = True
                    reached += 1
                    stack.append(w)
        if reached != members.size:
            return False
    return True


def cut_edges(graph: DualGraph, plan: Plan) -> int:
    """Number of edges whose endpoints lie in different districts."""
    _check_plan(graph, plan)
    if graph.edge_count == 0:
        return 0
    labels = plan.assignment
    return int((labels[graph.edges[:, 0]] != labels[graph.edges[:, 1]]).sum())


def cut_edge_indices(graph: DualGraph, plan: Plan) -> np.ndarray:
    """Row indices into graph.edges of the cut edges."""
    labels = plan.assignment
    mask = labels[graph.edges[:, 0]] != labels[graph.edges[:, 1]]
    return np.nonzero(mask)[0]


def canonical_labels(plan: Plan) -> np.ndarray:
    """Relabel districts by first appearance along the node ordering."""
    labels = plan.assignment
    mapping = np.full(plan.k, -1, dtype=np.int64)
    nxt = 0
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if mapping[lab] < 0:
            mapping[lab] = nxt
            nxt += 1
        out[i] = mapping[lab]
    return out


def canonical_hash(plan: Plan) -> str:
    """64-bit hex digest invariant under permutation of district labels."""
    canon = canonical_labels(plan)
    h = hashlib.blake2b(digest_size=8)
    h.update(canon.astype("<u2").tobytes())
    return h.hexdigest()
