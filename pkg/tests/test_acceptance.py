"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The real-data criteria need prepared Utah inputs and are skipped
unless the PLANCHAIN_UTAH_* environment variables are set (see README).
"""

import functools
import math
import os
import statistics
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as scipy_stats

from planchain.chains import (
    ChainConfig,
    chain_states,
    random_spanning_tree,
    run_chain,
)
from planchain.diagnostics import duplicate_rate, percentile_of, psrf
from planchain.formats import read_ensemble
from planchain.graph import load_graph_document, merge_defective_precincts
from planchain.grids import column_plan_labels
from planchain.metrics import (
    aapd,
    buffered_declination,
    efficiency_gap,
    lrvs,
    mean_median,
    partisan_bias,
    partisan_gini,
    ranked_marginal_deviation,
    seat_count,
    stdev_shares,
)
from planchain.partition import (
    Plan,
    canonical_hash,
    cut_edges,
    is_contiguous,
    population_deviation,
    tally,
)
from planchain.superdistrict import (
    SuperDistrictState,
    greedy_improve,
    seed_by_share,
    swap_gain,
)

import oracles
from conftest import edge_tuples, make_graph, neighbor_lists
from test_metrics import FIXTURES, SYMMETRIC_COUNT, fixture_share_vector, fixture_tallies

REL_TOL = 1e-9


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except pytest.skip.Exception:
                print(f"\n[ACCEPTANCE] {name}: SKIP (dataset not supplied)")
                raise
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS")

        return wrapper

    return decorate


def rel_close(got, expected, rel=REL_TOL, abs_tol=1e-12):
    return abs(got - expected) <= max(abs_tol, rel * abs(expected))


@criterion("metric oracle suite (>=20 fixtures, 1e-9 relative, <1s)")
def test_metric_oracle_suite(grid4x4):
    assert len(FIXTURES) >= 20

    # twenty hand-constructed 4-district plans on the grid fixture for the
    # graph-level dislocation metric
    rng = np.random.default_rng(0)
    plans = [
        column_plan_labels(4, 4, 4),
        [r for r in range(4) for _ in range(4)],
        [c // 2 + 2 * (r // 2) for r in range(4) for c in range(4)],
        [(r + c) % 4 for r in range(4) for c in range(4)],
    ]
    while len(plans) < 20:
        labels = rng.integers(0, 4, size=16)
        if len(set(labels.tolist())) == 4:
            plans.append(labels.tolist())

    coords = [tuple(c) for c in grid4x4.centroids.tolist()]
    votes = [tuple(v) for v in grid4x4.votes["alpha"].tolist()]

    started = time.perf_counter()
    medians = np.median(
        np.stack([fixture_share_vector(spec).shares for spec in FIXTURES]), axis=0
    )
    for spec in FIXTURES:
        vec = fixture_share_vector(spec)
        tallies = fixture_tallies(spec)
        shares = vec.shares.tolist()
        turnout = vec.turnout.tolist()

        assert rel_close(
            partisan_gini(vec), oracles.grid_quadrature_gini(shares, turnout)
        )
        assert rel_close(
            efficiency_gap(tallies, "e"),
            oracles.wasted_votes_gap([(r, t - r) for r, t in spec]),
        )
        assert rel_close(
            buffered_declination(vec), oracles.declination_by_vectors(shares)
        )
        # remaining metrics against plain-python recomputation
        assert rel_close(lrvs(vec), min(shares))
        assert rel_close(
            mean_median(vec),
            statistics.mean(shares) - statistics.median(shares),
        )
        v0 = sum(s * t for s, t in zip(shares, turnout)) / sum(turnout)
        shifted = [s + 0.5 - v0 for s in shares]
        assert rel_close(
            partisan_bias(vec), sum(1 for s in shifted if s > 0.5) / 4 - 0.5
        )
        mu = statistics.mean(shares)
        assert rel_close(
            stdev_shares(vec),
            math.sqrt(sum((s - mu) ** 2 for s in shares) / len(shares)),
        )
        assert seat_count(vec) == sum(1 for s in shares if s > 0.5)
        assert rel_close(
            ranked_marginal_deviation(vec, medians),
            sum((s - m) ** 2 for s, m in zip(shares, medians)),
        )
    for labels in plans:
        got = aapd(grid4x4, Plan(labels, 4), "alpha")
        expected = oracles.brute_force_aapd(coords, votes, labels, 4)
        assert rel_close(got, expected)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"metric oracle suite took {elapsed:.2f}s"


@criterion("partisan Gini dominance over mean-median and partisan bias")
def test_dominance_property():
    dominated = 0
    for spec in FIXTURES:
        vec = fixture_share_vector(spec)
        if partisan_gini(vec) < 1e-12:
            dominated += 1
            assert abs(mean_median(vec)) <= 1e-12
            assert abs(partisan_bias(vec)) <= 1e-12
    assert dominated >= SYMMETRIC_COUNT


@criterion("chain validity: 1e5 ReCom + 1e5 flip steps, zero violations, <60s")
def test_chain_validity(grid6x6):
    start = Plan([c // 3 + 2 * (r // 3) for r in range(6) for c in range(6)], 4)
    bound = cut_edges(grid6x6, start) * 2
    began = time.perf_counter()
    checked = 0
    for proposal, cut_bound in (("recom", bound), ("uniform-flip", None)):
        config = ChainConfig(
            proposal=proposal,
            steps=100000,
            seed=2024,
            start=start,
            pop_tolerance=0.01,
            cut_edge_bound=cut_bound,
        )
        for _, plan, _ in chain_states(grid6x6, config):
            checked += 1
            assert population_deviation(grid6x6, plan) <= 0.01
            assert is_contiguous(grid6x6, plan)
            if cut_bound is not None:
                assert cut_edges(grid6x6, plan) <= cut_bound
    elapsed = time.perf_counter() - began
    assert checked == 200000
    assert elapsed < 60.0, f"chain validity took {elapsed:.1f}s"


@criterion("ReCom support equals exhaustive enumeration (4x4, k=2, 1%)")
def test_sampler_support_equivalence(grid4x4):
    expected = {
        canonical_hash(Plan(list(p), 2))
        for p in oracles.enumerate_two_partitions(
            16, neighbor_lists(grid4x4), grid4x4.populations.tolist(), 0.01
        )
    }
    config = ChainConfig(
        proposal="recom",
        steps=100000,
        seed=7,
        start=Plan(column_plan_labels(4, 4, 2), 2),
        pop_tolerance=0.01,
    )
    visited = {canonical_hash(plan) for _, plan, _ in chain_states(grid4x4, config)}
    assert visited == expected


@criterion("spanning-tree uniformity within 4 sigma at 1e5 draws")
def test_spanning_tree_uniformity():
    cases = [
        ("triangle", [(0, 1), (1, 2), (0, 2)], 3),
        ("cycle", [(0, 1), (0, 2), (1, 3), (2, 3)], 4),
    ]
    draws = 100000
    rng = np.random.default_rng(55)
    for name, edges, expected_count in cases:
        n = max(max(e) for e in edges) + 1
        graph = make_graph(
            pops=[1] * n,
            votes_by_election={"e": [(1, 1)] * n},
            edges=edges,
        )
        assert oracles.kirchhoff_tree_count(n, edges) == expected_count
        freq = {}
        for _ in range(draws):
            tree = random_spanning_tree(graph, range(n), rng)
            key = frozenset((min(u, v), max(u, v)) for u, v in tree.edge_list())
            freq[key] = freq.get(key, 0) + 1
        assert len(freq) == expected_count, name
        p = 1.0 / expected_count
        sigma = math.sqrt(draws * p * (1 - p))
        for count in freq.values():
            assert abs(count - draws * p) <= 4 * sigma, name


@criterion("weighted flip matches Gibbs weights (chi2 p>0.01 at 1e6 steps)")
def test_gibbs_correctness(grid3x3):
    tol = 0.34
    start = Plan([0, 0, 0, 0, 1, 1, 1, 1, 1], 2)
    plans = oracles.enumerate_two_partitions(
        9, neighbor_lists(grid3x3), grid3x3.populations.tolist(), tol
    )
    edges = edge_tuples(grid3x3)

    for beta, seed in ((0.5, 101), (1.0, 202)):
        weights = {}
        for p, w in zip(plans, oracles.gibbs_weights(plans, edges, beta)):
            h = canonical_hash(Plan(list(p), 2))
            weights[h] = weights.get(h, 0.0) + w
        config = ChainConfig(
            proposal="weighted-flip",
            steps=10**6,
            seed=seed,
            start=start,
            pop_tolerance=tol,
            gibbs_beta=beta,
        )
        # thin to roughly independent draws so the chi-squared reference
        # distribution applies; every class keeps expected counts >> 5
        thin = 25
        counts = {}
        for step, plan, _ in chain_states(grid3x3, config):
            if step % thin == 0:
                h = canonical_hash(plan)
                counts[h] = counts.get(h, 0) + 1
        assert set(counts) <= set(weights)
        total = sum(counts.values())
        keys = sorted(weights)
        observed = np.array([counts.get(k, 0) for k in keys], dtype=float)
        expected = np.array([weights[k] * total for k in keys])
        assert expected.min() >= 5.0
        _, p_value = scipy_stats.chisquare(observed, expected)
        assert p_value > 0.01, f"beta={beta}: chi2 p={p_value:.5f}"

    # beta = 0 must replay uniform-flip decisions bit for bit
    base = dict(steps=100000, seed=4096, start=start, pop_tolerance=tol)
    uniform = ChainConfig(proposal="uniform-flip", **base)
    weighted = ChainConfig(proposal="weighted-flip", gibbs_beta=0.0, **base)
    stream_u = [
        (plan.assignment.tobytes(), accepted)
        for _, plan, accepted in chain_states(grid3x3, uniform)
    ]
    stream_w = [
        (plan.assignment.tobytes(), accepted)
        for _, plan, accepted in chain_states(grid3x3, weighted)
    ]
    assert stream_u == stream_w


@criterion("PSRF formula, [1.00, 1.01] convergence band, separation detection")
def test_psrf_criterion():
    hand_cases = [
        [[1.0, 2.0, 3.0, 4.0], [2.0, 3.0, 4.0, 5.0]],
        [[0.0, 0.5, 1.0, 1.5, 2.0], [1.0, 1.0, 1.0, 2.0, 2.0]],
        [[3.0, 1.0, 4.0, 1.0, 5.0, 9.0], [2.0, 6.0, 5.0, 3.0, 5.0, 8.0]],
    ]
    # m=2, n=4 case by hand: B=2, W=5/3, Vhat=7/4 -> sqrt(21/20)
    assert abs(psrf(np.array(hand_cases[0])) - math.sqrt(1.05)) <= 1e-12
    for chains in hand_cases:
        assert abs(psrf(np.array(chains)) - oracles.direct_psrf(chains)) <= 1e-12

    rng = np.random.default_rng(10)
    same = rng.normal(size=(4, 100000))
    value = psrf(same)
    assert 1.00 <= value <= 1.01, f"same-distribution PSRF {value}"

    rng = np.random.default_rng(11)
    apart = rng.normal(size=(2, 100000))
    apart[1] += 1.0
    assert psrf(apart) > 1.1


@criterion("appendix toy swap: 10/30 -> 13/35")
def test_appendix_toy_swap():
    state = SuperDistrictState(
        members=frozenset({"a", "b"}),
        dem_votes=10,
        rep_votes=20,
        population=50,
        election="e",
    )
    gain = swap_gain(state, out_votes=(1, 1), in_votes=(4, 6))
    exact = Fraction(13, 35) - Fraction(10, 30)
    assert abs(gain - float(exact)) <= 1e-15
    new_share = (10 - 1 + 4) / (30 - 1 + 6)
    assert abs(new_share - float(Fraction(13, 35))) <= 1e-15
    assert round(new_share, 3) == 0.371


@criterion("determinism: identical config+seed give byte-identical ensembles")
def test_determinism(tmp_path, grid4x4, halves_plan):
    from planchain.formats import EnsembleWriter

    payloads = []
    for attempt in ("a", "b"):
        config = ChainConfig(
            proposal="recom",
            steps=200,
            seed=99,
            start=halves_plan,
            pop_tolerance=0.01,
        )
        path = tmp_path / f"ens_{attempt}.csv"
        with EnsembleWriter(path, grid4x4, config, config_digest="fixed") as writer:
            run_chain(grid4x4, config, recorder=writer.write)
        payloads.append(path.read_bytes())
    assert payloads[0] == payloads[1]


# ---------------------------------------------------------------------------
# dataset-dependent checks (optional)


def _utah_paths():
    graph = os.environ.get("PLANCHAIN_UTAH_GRAPH")
    plan = os.environ.get("PLANCHAIN_UTAH_PLAN")
    if not graph or not plan:
        pytest.skip("set PLANCHAIN_UTAH_GRAPH and PLANCHAIN_UTAH_PLAN to run")
    return graph, plan


@criterion("Utah 2010 enacted-plan values (optional with dataset)")
def test_utah_enacted_values():
    graph_path, plan_path = _utah_paths()
    senate = os.environ.get("PLANCHAIN_UTAH_SENATE", "senate")
    raw, marks = load_graph_document(graph_path)
    merged, report = merge_defective_precincts(raw, marks)
    assert report.nodes_before == 2974
    assert merged.node_count == 2643
    assert merged.vote_totals(senate) == (390179, 207685)

    from planchain.formats import read_plan
    from planchain.metrics import share_vector

    plan = read_plan(plan_path, merged)
    vec = share_vector(tally(merged, plan), senate)
    assert abs(lrvs(vec) - 0.594) <= 0.001
    assert abs(mean_median(vec) - 0.0021) <= 0.0005
    assert abs(partisan_gini(vec) - 0.0041) <= 0.0005
    assert partisan_bias(vec) == 0.0

    # all-Republican sweeps share a single efficiency gap value
    if seat_count(vec) == 4:
        rep, dem = merged.vote_totals(senate)
        sweep_value = 1.5 - 2 * rep / (rep + dem)
        assert abs(sweep_value - 0.19) <= 0.01
        assert abs(efficiency_gap(tally(merged, plan), senate) - sweep_value) <= 1e-9

    a, b = seed_by_share(merged, senate)
    final_a, _, trace = greedy_improve(a, b, merged, pop_tolerance=0.01)
    assert final_a.dem_share >= 0.502 - 0.002


@criterion("Utah million-step ensemble percentiles (optional, slow)")
def test_utah_million_step_percentiles(tmp_path):
    graph_path, plan_path = _utah_paths()
    if os.environ.get("PLANCHAIN_UTAH_FULL") != "1":
        pytest.skip("set PLANCHAIN_UTAH_FULL=1 to run the million-step chain")
    senate = os.environ.get("PLANCHAIN_UTAH_SENATE", "senate")
    governor = os.environ.get("PLANCHAIN_UTAH_GOVERNOR", "governor")

    from planchain.formats import EnsembleWriter, read_plan
    from planchain.metrics import share_vector

    raw, marks = load_graph_document(graph_path)
    merged, _ = merge_defective_precincts(raw, marks)
    plan = read_plan(plan_path, merged)
    config = ChainConfig(
        proposal="recom",
        steps=10**6,
        seed=2010,
        start=plan,
        pop_tolerance=0.01,
        elections=(senate, governor),
    )
    path = tmp_path / "utah_ensemble.csv"
    with EnsembleWriter(path, merged, config) as writer:
        run_chain(merged, config, recorder=writer.write)
    table = read_ensemble(path)
    assert duplicate_rate(table) <= 0.0006

    tallies = tally(merged, plan)
    senate_lrvs = lrvs(share_vector(tallies, senate))
    governor_lrvs = lrvs(share_vector(tallies, governor))
    senate_pct = percentile_of(senate_lrvs, table.column(f"{senate}_lrvs"))
    governor_pct = percentile_of(governor_lrvs, table.column(f"{governor}_lrvs"))
    assert abs(senate_pct - 98.23) <= 1.0
    assert abs(governor_pct - 46.97) <= 2.0
