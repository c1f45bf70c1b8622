"""Precinct dual graph: loading, validation, and defective-precinct merging.

The dual graph is the substrate every chain and metric operates on. Nodes are
precincts carrying population, per-election two-party vote counts, a planar
centroid, and an area; edges record geographic adjacency. Geometry beyond
centroid + area is assumed to be resolved upstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class GraphError(Exception):
    """Base class for dual-graph construction and repair failures."""


class GraphParseError(GraphError):
    """The input document is not parseable at all."""


class GraphSchemaError(GraphError):
    """The document parses but violates the graph schema."""


class GraphInvariantError(GraphError):
    """A structural invariant (unique ids, no self-loops, ...) is broken."""


@dataclass(frozen=True)
class PrecinctAttributes:
    """Attributes of a single precinct (one graph node)."""

    id: str
    population: int
    votes: dict[str, tuple[int, int]]  # election -> (rep_votes, dem_votes)
    centroid: tuple[float, float]
    area: float

    def __post_init__(self):
        if self.population < 0:
            raise GraphInvariantError(f"precinct {self.id!r}: negative population")
        if self.area < 0:
            raise GraphInvariantError(f"precinct {self.id!r}: negative area")
        for election, (rep, dem) in self.votes.items():
            if rep < 0 or dem < 0:
                raise GraphInvariantError(
                    f"precinct {self.id!r}: negative vote count for {election!r}"
                )


class DualGraph:
    """Immutable adjacency graph over precincts.

    Nodes are ordered deterministically by precinct id. Vote counts are held
    as one (n, 2) integer array per election with columns (rep, dem). The
    instance is safe to share across concurrent chain workers.
    """

    def __init__(self, nodes: list[PrecinctAttributes], edges):
        ids = [node.id for node in nodes]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise GraphInvariantError(f"duplicate precinct id(s): {dupes}")

        order = sorted(range(len(nodes)), key=lambda i: nodes[i].id)
        nodes = [nodes[i] for i in order]

        self.ids: tuple[str, ...] = tuple(node.id for node in nodes)
        self.index: dict[str, int] = {pid: i for i, pid in enumerate(self.ids)}
        n = len(nodes)

        elections = sorted(nodes[0].votes.keys()) if nodes else []
        for node in nodes:
            if sorted(node.votes.keys()) != elections:
                raise GraphSchemaError(
                    f"precinct {node.id!r}: elections {sorted(node.votes)} "
                    f"do not match {elections}"
                )
        self.elections: tuple[str, ...] = tuple(elections)

        self.populations = np.array([node.population for node in nodes], dtype=np.int64)
        self.centroids = np.array(
            [node.centroid for node in nodes], dtype=float
        ).reshape(n, 2)
        self.areas = np.array([node.area for node in nodes], dtype=float)
        self.votes: dict[str, np.ndarray] = {
            e: np.array([node.votes[e] for node in nodes], dtype=np.int64).reshape(n, 2)
            for e in elections
        }

        seen = set()
        index_edges = []
        for a, b in edges:
            i, j = (self.index.get(a), self.index.get(b)) if isinstance(a, str) else (a, b)
            if i is None or j is None:
                bad = a if i is None else b
                raise GraphSchemaError(f"edge references unknown precinct id {bad!r}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphSchemaError(f"edge index out of range: ({a}, {b})")
            if i == j:
                raise GraphInvariantError(f"self-loop on precinct {self.ids[i]!r}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphInvariantError(
                    f"duplicate edge {self.ids[key[0]]!r} -- {self.ids[key[1]]!r}"
                )
            seen.add(key)
            index_edges.append(key)
        index_edges.sort()
        self.edges = np.array(index_edges, dtype=np.int64).reshape(len(index_edges), 2)

        neighbors: list[list[int]] = [[] for _ in range(n)]
        for i, j in index_edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(ns)) for ns in neighbors
        )

        for arr in (self.populations, self.centroids, self.areas, self.edges):
            arr.setflags(write=False)
        for arr in self.votes.values():
            arr.setflags(write=False)

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_population(self) -> int:
        return int(self.populations.sum())

    def vote_totals(self, election: str) -> tuple[int, int]:
        rep, dem = self.votes[election].sum(axis=0)
        return int(rep), int(dem)

    def node(self, i: int) -> PrecinctAttributes:
        return PrecinctAttributes(
            id=self.ids[i],
            population=int(self.populations[i]),
            votes={e: (int(v[i, 0]), int(v[i, 1])) for e, v in self.votes.items()},
            centroid=(float(self.centroids[i, 0]), float(self.centroids[i, 1])),
            area=float(self.areas[i]),
        )

    def is_connected(self) -> bool:
        n = self.node_count
        if n == 0:
            return True
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in self.neighbors[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DualGraph):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.elections == other.elections
            and np.array_equal(self.populations, other.populations)
            and np.array_equal(self.centroids, other.centroids)
            and np.array_equal(self.areas, other.areas)
            and np.array_equal(self.edges, other.edges)
            and all(np.array_equal(self.votes[e], other.votes[e]) for e in self.elections)
        )

    def __repr__(self) -> str:
        return (
            f"DualGraph(nodes={self.node_count}, edges={self.edge_count}, "
            f"elections={list(self.elections)})"
        )


@dataclass
class MergeReport:
    """What merge_defective_precincts did: (merged id -> surviving id) pairs."""

    merges: list[tuple[str, str]] = field(default_factory=list)
    nodes_before: int = 0
    nodes_after: int = 0

    @property
    def node_delta(self) -> int:
        return self.nodes_before - self.nodes_after


@dataclass
class ValidationReport:
    connected: bool
    component_count: int
    isolated_nodes: list[str]
    population_total: int
    vote_totals: dict[str, tuple[int, int]]


def load_graph(path) -> DualGraph:
    """Load a dual graph from a graph document (see planchain.formats)."""
    graph, _marks = load_graph_document(path)
    return graph


def load_graph_document(path) -> tuple[DualGraph, dict[str, int]]:
    """Load a graph document, returning the graph and any defect marks.

    Defect marks come from optional per-node ``pieces`` fields: presence of
    the field marks the precinct as defective (disconnected when the count
    exceeds 1, wholly enclosed when it equals 1).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"{path}: not valid JSON ({exc})") from exc

    if not isinstance(doc, dict):
        raise GraphSchemaError(f"{path}: top-level value must be an object")
    if doc.get("format") != "planchain-graph":
        raise GraphSchemaError(f"{path}: missing or wrong 'format' field")
    if doc.get("version") != 1:
        raise GraphSchemaError(f"{path}: unsupported version {doc.get('version')!r}")
    for key in ("nodes", "edges"):
        if not isinstance(doc.get(key), list):
            raise GraphSchemaError(f"{path}: missing '{key}' array")

    nodes = []
    marks: dict[str, int] = {}
    for entry in doc["nodes"]:
        try:
            votes = {
                e: (int(v["rep"]), int(v["dem"])) for e, v in entry["votes"].items()
            }
            node = PrecinctAttributes(
                id=str(entry["id"]),
                population=int(entry["population"]),
                votes=votes,
                centroid=(float(entry["centroid"][0]), float(entry["centroid"][1])),
                area=float(entry["area"]),
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise GraphSchemaError(
                f"{path}: node entry {entry.get('id', '?')!r} missing field ({exc})"
            ) from exc
        nodes.append(node)
        if "pieces" in entry:
            marks[node.id] = int(entry["pieces"])

    edges = []
    for pair in doc["edges"]:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise GraphSchemaError(f"{path}: malformed edge entry {pair!r}")
        edges.append((str(pair[0]), str(pair[1])))

    return DualGraph(nodes, edges), marks


def serialize_graph(graph: DualGraph, path, defect_marks: dict[str, int] | None = None):
    """Write a graph document; load_graph(serialize_graph(g)) == g."""
    marks = defect_marks or {}
    doc = {
        "format": "planchain-graph",
        "version": 1,
        "elections": list(graph.elections),
        "nodes": [],
        "edges": [[graph.ids[i], graph.ids[j]] for i, j in graph.edges.tolist()],
    }
    for i, pid in enumerate(graph.ids):
        entry = {
            "id": pid,
            "population": int(graph.populations[i]),
            "centroid": [float(graph.centroids[i, 0]), float(graph.centroids[i, 1])],
            "area": float(graph.areas[i]),
            "votes": {
                e: {"rep": int(v[i, 0]), "dem": int(v[i, 1])}
                for e, v in graph.votes.items()
            },
        }
        if pid in marks:
            entry["pieces"] = int(marks[pid])
        doc["nodes"].append(entry)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def merge_defective_precincts(
    graph: DualGraph, components: dict[str, int]
) -> tuple[DualGraph, MergeReport]:
    """Absorb defective precincts into neighbors so plans stay contiguous.

    Every precinct named in ``components`` (disconnected multi-piece ones and
    precincts wholly enclosed by a neighbor alike) is merged into an adjacent
    precinct: the neighbor sharing the most edges, ties broken by smallest
    id. In a simple graph every neighbor shares one edge, so the tiebreak
    makes the choice. Populations, votes, and areas add; centroids combine
    population-weighted. Ids already absent from the graph are skipped, which
    makes the operation idempotent for a fixed components map.
    """
    report = MergeReport(nodes_before=graph.node_count)

    attrs = {pid: graph.node(i) for i, pid in enumerate(graph.ids)}
    adjacency: dict[str, set[str]] = {
        pid: {graph.ids[j] for j in graph.neighbors[i]}
        for i, pid in enumerate(graph.ids)
    }
    edge_multiplicity: dict[tuple[str, str], int] = {
        (graph.ids[i], graph.ids[j]): 1 for i, j in graph.edges.tolist()
    }

    def shared_edges(a: str, b: str) -> int:
        key = (min(a, b), max(a, b))
        return edge_multiplicity.get(key, 0)

    survivor_of: dict[str, str] = {}
    for merged_id in sorted(components):
        if merged_id not in adjacency:
            continue  # already absorbed in a previous application
        neighbor_ids = adjacency[merged_id]
        if not neighbor_ids:
            raise GraphInvariantError(
                f"defective precinct {merged_id!r} has no neighbor to merge into"
            )
        target = min(
            sorted(neighbor_ids), key=lambda nid: (-shared_edges(merged_id, nid), nid)
        )

        a, b = attrs[target], attrs[merged_id]
        pop = a.population + b.population
        if pop > 0:
            cx = (a.centroid[0] * a.population + b.centroid[0] * b.population) / pop
            cy = (a.centroid[1] * a.population + b.centroid[1] * b.population) / pop
        else:
            cx = (a.centroid[0] + b.centroid[0]) / 2
            cy = (a.centroid[1] + b.centroid[1]) / 2
        attrs[target] = PrecinctAttributes(
            id=target,
            population=pop,
            votes={
                e: (a.votes[e][0] + b.votes[e][0], a.votes[e][1] + b.votes[e][1])
                for e in a.votes
            },
            centroid=(cx, cy),
            area=a.area + b.area,
        )

        for nid in adjacency.pop(merged_id):
            adjacency[nid].discard(merged_id)
            key = (min(merged_id, nid), max(merged_id, nid))
            mult = edge_multiplicity.pop(key, 0)
            if nid != target:
                adjacency[nid].add(target)
                adjacency[target].add(nid)
                tkey = (min(target, nid), max(target, nid))
                edge_multiplicity[tkey] = edge_multiplicity.get(tkey, 0) + mult
        del attrs[merged_id]
        survivor_of[merged_id] = target

    def resolve(pid: str) -> str:
        while pid in survivor_of:
            pid = survivor_of[pid]
        return pid

    report.merges = sorted((mid, resolve(mid)) for mid in survivor_of)

    remaining = sorted(attrs)
    edge_list = [
        (a, b) for (a, b) in edge_multiplicity if a in attrs and b in attrs
    ]
    merged = DualGraph([attrs[pid] for pid in remaining], edge_list)
    report.nodes_after = merged.node_count
    return merged, report


def validate_graph(graph: DualGraph) -> ValidationReport:
    """Report-only health check: connectivity, isolated nodes, totals."""
    n = graph.node_count
    component_count = 0
    seen = np.zeros(n, dtype=bool)
    for start in range(n):
        if seen[start]:
            continue
        component_count += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for w in graph.neighbors[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    isolated = [graph.ids[i] for i in range(n) if not graph.neighbors[i]]
    return ValidationReport(
        connected=(component_count <= 1),
        component_count=component_count,
        isolated_nodes=isolated,
        population_total=graph.total_population,
        vote_totals={e: graph.vote_totals(e) for e in graph.elections},
    )
