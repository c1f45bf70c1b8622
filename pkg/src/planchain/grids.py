"""Small synthetic dual graphs for demos and tests."""

from __future__ import annotations

from .graph import DualGraph, PrecinctAttributes


def grid_graph(
    rows: int,
    cols: int,
    population: int = 100,
    elections: dict | None = None,
) -> DualGraph:
    """Rectangular lattice of unit precincts.

    ``elections`` maps an election id to a votes(row, col) -> (rep, dem)
    callable; the default is a single election with a left-to-right
    Republican gradient over a two-party turnout of 100 per precinct.
    """
    if elections is None:
        elections = {"election": _column_gradient(cols)}
    nodes = []
    for r in range(rows):
        for c in range(cols):
            votes = {e: fn(r, c) for e, fn in elections.items()}
            nodes.append(
                PrecinctAttributes(
                    id=f"p{r:02d}{c:02d}",
                    population=population,
                    votes=votes,
                    centroid=(float(c), float(r)),
                    area=1.0,
                )
            )
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"p{r:02d}{c:02d}", f"p{r:02d}{c+1:02d}"))
            if r + 1 < rows:
                edges.append((f"p{r:02d}{c:02d}", f"p{r+1:02d}{c:02d}"))
    return DualGraph(nodes, edges)


def _column_gradient(cols: int):
    def votes(r, c):
        rep = 30 + (40 * c) // max(cols - 1, 1)
        return rep, 100 - rep

    return votes


def column_plan_labels(rows: int, cols: int, k: int) -> list[int]:
    """Assign columns to k contiguous vertical bands (cols % k == 0)."""
    if cols % k:
        raise ValueError("cols must be divisible by k")
    per = cols // k
    return [c // per for _ in range(rows) for c in range(cols)]
