"""Ensemble analysis of districting plans over a precinct dual graph.

Chains (uniform flip, weighted flip, ReCom) generate plan ensembles under
contiguity and population constraints; the metrics module scores every plan
with the least-Republican vote share and the standard partisan metrics; the
diagnostics module covers convergence (Gelman-Rubin PSRF), percentiles, and
duplicate accounting; the superdistrict module runs the greedy search for a
two-Democratic-seat non-contiguous plan.
"""

__version__ = "0.1.0"

from .graph import (
    DualGraph,
    GraphError,
    GraphInvariantError,
    GraphParseError,
    GraphSchemaError,
    MergeReport,
    PrecinctAttributes,
    ValidationReport,
    load_graph,
    load_graph_document,
    merge_defective_precincts,
    serialize_graph,
    validate_graph,
)
from .partition import (
    DistrictTally,
    Plan,
    PlanError,
    canonical_hash,
    cut_edges,
    is_contiguous,
    population_deviation,
    tally,
)
from .chains import (
    ChainConfig,
    ChainError,
    EnsembleRecord,
    SpanningTree,
    balanced_tree_cut,
    propose_recom,
    propose_uniform_flip,
    propose_weighted_flip,
    random_spanning_tree,
    run_chain,
)
from .metrics import (
    AapdNeighborhoods,
    MetricVector,
    SeatsVotesCurve,
    ShareVector,
    aapd,
    buffered_declination,
    efficiency_gap,
    lrvs,
    mean_median,
    metric_vector,
    partisan_bias,
    partisan_gini,
    ranked_marginal_deviation,
    seat_count,
    seats_votes_curve,
    share_vector,
    stdev_shares,
)
from .diagnostics import (
    EnsembleTable,
    PsrfReport,
    duplicate_rate,
    multi_start_density_check,
    percentile_of,
    psrf,
    sorted_share_medians,
)
from .superdistrict import (
    SuperDistrictState,
    greedy_improve,
    seed_by_share,
    split_superdistrict,
    swap_gain,
)
