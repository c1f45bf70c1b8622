import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from planchain.graph import DualGraph, PrecinctAttributes, load_graph
from planchain.grids import column_plan_labels, grid_graph
from planchain.partition import Plan

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def grid4x4_path() -> Path:
    return DATA_DIR / "grid4x4.json"


@pytest.fixture(scope="session")
def grid4x4(grid4x4_path) -> DualGraph:
    return load_graph(grid4x4_path)


@pytest.fixture(scope="session")
def grid3x3() -> DualGraph:
    return grid_graph(3, 3, population=1)


@pytest.fixture(scope="session")
def grid6x6() -> DualGraph:
    return grid_graph(6, 6, population=1)


@pytest.fixture()
def halves_plan(grid4x4) -> Plan:
    return Plan(column_plan_labels(4, 4, 2), 2)


def make_graph(pops, votes_by_election, edges, coords=None):
    """Tiny hand-built graph; ids are n0, n1, ... in index order."""
    n = len(pops)
    coords = coords or [(float(i), 0.0) for i in range(n)]
    nodes = [
        PrecinctAttributes(
            id=f"n{i}",
            population=pops[i],
            votes={e: tuple(v[i]) for e, v in votes_by_election.items()},
            centroid=coords[i],
            area=1.0,
        )
        for i in range(n)
    ]
    return DualGraph(nodes, [(f"n{i}", f"n{j}") for i, j in edges])


def neighbor_lists(graph: DualGraph):
    return [list(ns) for ns in graph.neighbors]


def edge_tuples(graph: DualGraph):
    return [tuple(e) for e in graph.edges.tolist()]
