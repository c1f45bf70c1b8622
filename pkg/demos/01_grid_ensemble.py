"""
Ensembles on a toy state
========================

Build a 6x6 grid "state", run three ReCom chains from the same quadrant
plan, and look at the basics: acceptance, the LRVS spread, convergence of
the chains, and duplicate accounting.
"""

import numpy as np

from planchain.chains import ChainConfig, run_chain
from planchain.diagnostics import (
    EnsembleTable,
    duplicate_rate,
    multi_start_density_check,
    percentile_of,
    psrf_report,
)
from planchain.grids import grid_graph
from planchain.partition import Plan

# the state: 36 unit-population precincts with a left-to-right Republican
# gradient, cut into four 3x3 quadrant districts
graph = grid_graph(6, 6, population=1)
start = Plan([c // 3 + 2 * (r // 3) for r in range(6) for c in range(6)], 4)
print(graph)

# three chains, split deterministically off one seed
tables = []
for index in range(3):
    config = ChainConfig(
        proposal="recom",
        steps=2000,
        seed=20_22,
        start=start,
        pop_tolerance=0.01,
        chain_index=index,
    )
    stats = run_chain(graph, config)
    tables.append(EnsembleTable.from_records(stats.records, start.k, graph.elections))
    print(f"chain {index}: accepted {stats.accepted}/{stats.steps}")

# where does the starting plan sit in the ensemble?
pooled_lrvs = np.concatenate([t.column("election_lrvs") for t in tables])
start_lrvs = tables[0].column("election_lrvs")[0]
print(f"\nLRVS range over {pooled_lrvs.size} plans: "
      f"{pooled_lrvs.min():.3f} .. {pooled_lrvs.max():.3f}")
print(f"start plan LRVS {start_lrvs:.3f} "
      f"at percentile {percentile_of(start_lrvs, pooled_lrvs):.1f}")

# convergence: PSRF near 1 and overlapping densities mean the chains agree
report = psrf_report(tables, ["election_lrvs", "election_mean_median"])
for name, value in report.values.items():
    print(f"PSRF[{name}] = {value:.4f}")
print(f"max pairwise density distance: "
      f"{multi_start_density_check(tables, 'election_lrvs'):.4f}")

for i, t in enumerate(tables):
    print(f"chain {i} duplicate rate: {duplicate_rate(t):.2f}%")
