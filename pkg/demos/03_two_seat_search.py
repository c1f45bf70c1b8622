"""
Hunting a second Democratic seat
================================

On a polarized toy state the naive "stack the most Democratic precincts"
super district falls short of a majority, but greedy turnout-aware swaps
push it over 50%, and the super district then splits into two
majority-Democratic quarter-state districts. Contiguity is never required
in this construction.
"""

import numpy as np

from planchain.graph import DualGraph, PrecinctAttributes
from planchain.partition import Plan, is_contiguous
from planchain.superdistrict import greedy_improve, seed_by_share, split_superdistrict

# a state where the Democratic anchor is small and low-turnout while the
# Republican bulk varies widely in turnout: stacking by share alone is not
# enough, but trading heavy Republican precincts for light ones is
rng = np.random.default_rng(7)
nodes = []
for i in range(60):
    if i < 8:  # urban core: very Democratic, tiny turnout
        dem_share, turnout = 0.82 + 0.10 * rng.random(), int(35 + 20 * rng.random())
    elif i < 14:  # inner suburbs: barely Democratic, heavy turnout
        dem_share, turnout = 0.51 + 0.04 * rng.random(), int(240 + 50 * rng.random())
    elif i < 37:  # heavy-turnout Republican precincts
        dem_share, turnout = 0.30 + 0.15 * rng.random(), int(260 + 80 * rng.random())
    else:  # light-turnout Republican precincts
        dem_share, turnout = 0.30 + 0.15 * rng.random(), int(55 + 35 * rng.random())
    dem = int(round(dem_share * turnout))
    nodes.append(PrecinctAttributes(
        id=f"q{i:02d}",
        population=100,
        votes={"e": (turnout - dem, dem)},
        centroid=(float(i % 10), float(i // 10)),
        area=1.0,
    ))
edges = [(f"q{i:02d}", f"q{i+1:02d}") for i in range(59)]
graph = DualGraph(nodes, edges)

rep, dem = graph.vote_totals("e")
print(f"statewide: {dem} D / {rep} R ({dem / (dem + rep):.1%} Democratic)")

seed_a, seed_b = seed_by_share(graph, "e")
print(f"naive super district: {seed_a.dem_share:.3f} Democratic "
      f"({len(seed_a.members)} precincts)")

final_a, final_b, trace = greedy_improve(seed_a, seed_b, graph, pop_tolerance=0.01)
print(f"after {len(trace.swaps)} greedy swaps: {final_a.dem_share:.3f}")
for out_id, in_id, share in trace.swaps[:5]:
    print(f"  swap {out_id} out, {in_id} in -> {share:.4f}")
if len(trace.swaps) > 5:
    print(f"  ... {len(trace.swaps) - 5} more")

split = split_superdistrict(final_a, graph, pop_tolerance=0.01)
print(f"\nsplit: {split.part_a.dem_share:.3f} and {split.part_b.dem_share:.3f} "
      f"Democratic (feasible: {split.feasible})")

# assemble the full 4-district plan and confirm it is not contiguous
rest = split_superdistrict(final_b, graph, pop_tolerance=0.01, require_majority=False)
assignment = np.empty(graph.node_count, dtype=np.int64)
for label, state in enumerate((split.part_a, split.part_b, rest.part_a, rest.part_b)):
    for pid in state.members:
        assignment[graph.index[pid]] = label
plan = Plan(assignment, 4)
print(f"two-Democratic-seat plan contiguous? {is_contiguous(graph, plan)}")
