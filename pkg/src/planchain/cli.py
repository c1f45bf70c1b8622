"""Command-line entry points: ingest, run, analyze, superdistrict.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime
failure. The PLANCHAIN_OUT environment variable supplies the default output
directory.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chains import ChainConfig, ChainError, evaluate_plan, run_chain
from .diagnostics import (
    DiagnosticsError,
    duplicate_rate,
    multi_start_density_check,
    percentile_of,
    pooled_share_medians,
    psrf,
)
from .formats import (
    EnsembleWriter,
    FormatError,
    parse_chain_config,
    read_ensemble,
    read_plan,
    write_plan,
    write_plot_table,
)
from .graph import (
    GraphError,
    load_graph_document,
    merge_defective_precincts,
    serialize_graph,
    validate_graph,
)
from .metrics import AapdNeighborhoods, MetricError, MetricVector, ranked_marginal_deviation
from .partition import Plan, PlanError, canonical_hash, cut_edges, is_contiguous
from .superdistrict import (
    SearchError,
    greedy_improve,
    seed_by_share,
    split_superdistrict,
)

SCATTER_METRICS = (
    "mean_median",
    "partisan_bias",
    "partisan_gini",
    "efficiency_gap",
    "stdev_shares",
    "aapd",
    "buffered_declination",
    "rmd",
)

REPORT_METRICS = (
    "lrvs",
    "mean_median",
    "partisan_bias",
    "partisan_gini",
    "efficiency_gap",
    "stdev_shares",
    "aapd",
    "buffered_declination",
    "seats_r",
    "rmd",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("PLANCHAIN_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _flatten_record(record) -> dict:
    """Record -> {column: value}, mirroring the ensemble column contract."""
    flat = {"cut_edges": record.cut_edges, "hash": record.plan_hash}
    for e, shares in record.shares.items():
        for r, s in enumerate(shares, start=1):
            flat[f"{e}_share_{r}"] = float(s)
        mv = record.metrics[e]
        for f in MetricVector.FIELDS:
            flat[f"{e}_{f}"] = float(getattr(mv, f))
    return flat


# ---------------------------------------------------------------------------
# ingest


def cmd_ingest(args) -> int:
    out = _out_dir(args)
    graph, marks = load_graph_document(args.graph)
    merged, merge_report = merge_defective_precincts(graph, marks)
    report = validate_graph(merged)

    serialize_graph(merged, out / "graph.json")
    with open(out / "merge_report.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "nodes_before": merge_report.nodes_before,
                "nodes_after": merge_report.nodes_after,
                "node_delta": merge_report.node_delta,
                "merges": [list(pair) for pair in merge_report.merges],
            },
            fh,
            indent=1,
        )
    with open(out / "validation_report.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "connected": report.connected,
                "component_count": report.component_count,
                "isolated_nodes": report.isolated_nodes,
                "population_total": report.population_total,
                "vote_totals": {e: list(v) for e, v in report.vote_totals.items()},
            },
            fh,
            indent=1,
        )
    if args.plan:
        plan = read_plan(args.plan, merged)
        if not is_contiguous(merged, plan):
            print("warning: supplied plan has a discontiguous district", file=sys.stderr)
        write_plan(plan, merged, out / "plan.csv")
    print(
        f"ingested {merged.node_count} precincts "
        f"({merge_report.node_delta} merged away, was {merge_report.nodes_before}), "
        f"{merged.edge_count} edges, connected={report.connected}"
    )
    return 0


# ---------------------------------------------------------------------------
# run


def cmd_run(args) -> int:
    out = _out_dir(args)
    graph, _ = load_graph_document(args.graph)
    file_cfg = parse_chain_config(args.config)

    plan_paths = list(args.plan or [])
    if not plan_paths and file_cfg.start:
        plan_paths = [file_cfg.start]
    if not plan_paths:
        raise UsageError("no start plan: pass --plan or set start= in the config")
    chains = args.chains or len(plan_paths)
    starts = [read_plan(p, graph) for p in plan_paths]
    seed = args.seed if args.seed is not None else file_cfg.seed

    written = []
    for index in range(chains):
        start = starts[index % len(starts)]
        config = ChainConfig(
            proposal=file_cfg.proposal,
            steps=file_cfg.steps,
            seed=seed,
            start=start,
            pop_tolerance=file_cfg.pop_tolerance,
            cut_edge_bound=file_cfg.cut_edge_bound,
            gibbs_beta=file_cfg.gibbs_beta,
            elections=file_cfg.elections,
            chain_index=index,
        )
        elections = tuple(config.elections or graph.elections)
        caches = {e: AapdNeighborhoods(graph, e, start.k) for e in elections}
        start_record = evaluate_plan(graph, start, elections, caches, step=0)
        path = out / f"ensemble_{index:03d}.csv"
        with EnsembleWriter(
            path,
            graph,
            config,
            config_digest=file_cfg.digest(),
            start_values=_flatten_record(start_record),
        ) as writer:
            stats = run_chain(graph, config, recorder=writer.write)
        written.append(str(path))
        print(
            f"chain {index}: {stats.steps} steps, {stats.accepted} accepted, "
            f"{stats.rejected} held -> {path}"
        )

    manifest = {
        "command": "run",
        "config_digest": file_cfg.digest(),
        "seed": seed,
        "chains": chains,
        "start_plans": [canonical_hash(s) for s in starts],
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "ensembles": written,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
    return 0


# ---------------------------------------------------------------------------
# analyze


def _subsample(n: int, limit: int) -> np.ndarray:
    if n <= limit:
        return np.arange(n)
    stride = int(np.ceil(n / limit))
    return np.arange(0, n, stride)


def cmd_analyze(args) -> int:
    out = _out_dir(args)
    graph, _ = load_graph_document(args.graph)
    tables = [read_ensemble(p) for p in args.ensembles]
    first = tables[0]
    for t in tables[1:]:
        if set(t.columns) != set(first.columns) or t.k != first.k:
            raise FormatError("ensemble files do not share a column contract")
    elections = (
        tuple(e.strip() for e in args.election.split(",") if e.strip())
        if args.election
        else first.elections
    )
    for e in elections:
        if e not in first.elections:
            raise FormatError(f"election {e!r} not present in the ensembles")

    enacted_plan = read_plan(args.plan, graph)
    caches = {e: AapdNeighborhoods(graph, e, enacted_plan.k) for e in elections}
    enacted = evaluate_plan(graph, enacted_plan, elections, caches)
    enacted_flat = _flatten_record(enacted)

    pooled = {
        name: np.concatenate([t.column(name) for t in tables])
        for name in first.columns
        if name != "hash"
    }
    pooled_hashes = np.concatenate([t.column("hash") for t in tables])
    records = int(pooled["step"].size)

    # second pass: ranked-marginal deviation against pooled per-rank medians
    medians = {e: pooled_share_medians(tables, e) for e in elections}
    rmd_cols = {}
    for e in elections:
        ranks = np.stack(
            [pooled[f"{e}_share_{r}"] for r in range(1, first.k + 1)], axis=1
        )
        rmd_cols[e] = ((ranks - medians[e][None, :]) ** 2).sum(axis=1)
        enacted_flat[f"{e}_rmd"] = ranked_marginal_deviation(
            np.array(enacted.shares[e]), medians[e]
        )

    def column_for(e, metric):
        return rmd_cols[e] if metric == "rmd" else pooled[f"{e}_{metric}"]

    n_min = min(len(t) for t in tables)
    report: dict = {
        "version": __version__,
        "files": [str(p) for p in args.ensembles],
        "chains": len(tables),
        "records": records,
        "enacted_plan_hash": enacted.plan_hash,
        "duplicate_rate_percent": float(
            100.0 * (1.0 - len(set(pooled_hashes.tolist())) / records)
        ),
        "elections": {},
    }

    for e in elections:
        per_metric = {}
        for metric in REPORT_METRICS:
            col = column_for(e, metric)
            value = enacted_flat[f"{e}_{metric}"]
            entry = {
                "enacted": value,
                "percentile": percentile_of(value, col),
                "quartiles": [float(q) for q in np.percentile(col, [25, 50, 75])],
            }
            if len(tables) >= 2 and metric != "rmd":
                series = np.stack(
                    [t.column(f"{e}_{metric}")[:n_min].astype(float) for t in tables]
                )
                entry["psrf"] = psrf(series)
            per_metric[metric] = entry
        report["elections"][e] = {
            "sorted_share_medians": [float(v) for v in medians[e]],
            "metrics": per_metric,
        }

    ce_col = pooled["cut_edges"]
    report["cut_edges"] = {
        "enacted": enacted.cut_edges,
        "percentile": percentile_of(enacted.cut_edges, ce_col),
        "quartiles": [float(q) for q in np.percentile(ce_col, [25, 50, 75])],
    }
    if len(tables) >= 2:
        report["density_check"] = {
            f"{e}_lrvs": multi_start_density_check(tables, f"{e}_lrvs")
            for e in elections
        }

    # plot-data tables
    for e in elections:
        n_rows = min(len(t) for t in tables)
        write_plot_table(
            out / f"density_lrvs_{e}.csv",
            "density-overlay",
            {
                "election": e,
                "metric": "lrvs",
                "starts": [
                    t.start_values.get(f"{e}_lrvs")
                    for t in tables
                ],
                "enacted": enacted_flat[f"{e}_lrvs"],
            },
            [f"chain_{i}" for i in range(len(tables))],
            zip(*[t.column(f"{e}_lrvs")[:n_rows].tolist() for t in tables]),
        )
        share_cols = [f"{e}_share_{r}" for r in range(1, first.k + 1)]
        write_plot_table(
            out / f"sorted_shares_{e}.csv",
            "violins",
            {
                "election": e,
                "enacted": list(enacted.shares[e]),
                "enacted_percentiles": [
                    percentile_of(enacted.shares[e][r - 1], pooled[f"{e}_share_{r}"])
                    for r in range(1, first.k + 1)
                ],
            },
            [f"share_{r}" for r in range(1, first.k + 1)],
            zip(*[pooled[c].tolist() for c in share_cols]),
        )
        for metric in SCATTER_METRICS:
            col = column_for(e, metric)
            lrvs_col = pooled[f"{e}_lrvs"]
            keep = _subsample(records, args.scatter_points)
            write_plot_table(
                out / f"scatter_{metric}_{e}.csv",
                "scatter-marginals",
                {
                    "election": e,
                    "x": metric,
                    "y": "lrvs",
                    "enacted_x": enacted_flat[f"{e}_{metric}"],
                    "enacted_y": enacted_flat[f"{e}_lrvs"],
                },
                [metric, "lrvs"],
                zip(col[keep].tolist(), lrvs_col[keep].tolist()),
            )
    write_plot_table(
        out / "cut_edges_hist.csv",
        "histogram",
        {"metric": "cut_edges", "enacted": enacted.cut_edges},
        ["value"],
        ([v] for v in ce_col.tolist()),
    )

    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
    for e in elections:
        lv = report["elections"][e]["metrics"]["lrvs"]
        print(
            f"{e}: enacted LRVS {lv['enacted']:.4f} "
            f"at percentile {lv['percentile']:.2f}"
        )
    print(f"report written to {out / 'report.json'}")
    return 0


# ---------------------------------------------------------------------------
# superdistrict


def cmd_superdistrict(args) -> int:
    out = _out_dir(args)
    graph, _ = load_graph_document(args.graph)
    election = args.election
    if election not in graph.elections:
        raise FormatError(f"election {election!r} not present in the graph")

    seed_a, seed_b = seed_by_share(graph, election)
    final_a, final_b, trace = greedy_improve(
        seed_a, seed_b, graph, pop_tolerance=args.pop_tolerance
    )
    split_dem = split_superdistrict(
        final_a, graph, pop_tolerance=args.pop_tolerance, require_majority=True
    )
    split_rest = split_superdistrict(
        final_b, graph, pop_tolerance=args.pop_tolerance, require_majority=False
    )

    assignment = np.empty(graph.node_count, dtype=np.int64)
    for label, state in enumerate(
        (split_dem.part_a, split_dem.part_b, split_rest.part_a, split_rest.part_b)
    ):
        for pid in state.members:
            assignment[graph.index[pid]] = label
    plan = Plan(assignment, k=4)
    write_plan(plan, graph, out / "superdistrict_plan.csv")

    def describe(state):
        return {
            "precincts": len(state.members),
            "population": state.population,
            "dem_votes": state.dem_votes,
            "rep_votes": state.rep_votes,
            "dem_share": state.dem_share,
        }

    report = {
        "election": election,
        "seed_shares": [seed_a.dem_share, seed_b.dem_share],
        "swaps": len(trace.swaps),
        "super_district_dem_share": trace.final_share,
        "districts": [
            describe(s)
            for s in (
                split_dem.part_a,
                split_dem.part_b,
                split_rest.part_a,
                split_rest.part_b,
            )
        ],
        "dem_split_feasible": split_dem.feasible,
        "contiguous": is_contiguous(graph, plan),  # informational only
        "cut_edges": cut_edges(graph, plan),
    }
    with open(out / "superdistrict_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
    print(
        f"super district reached {trace.final_share:.4f} Democratic share "
        f"after {len(trace.swaps)} swaps; "
        f"split shares {split_dem.part_a.dem_share:.4f} / "
        f"{split_dem.part_b.dem_share:.4f}"
    )
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="planchain", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and merge a raw graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--plan")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="run one or more chains")
    p.add_argument("--graph", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--plan", action="append", help="start plan (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--chains", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="score an enacted plan against ensembles")
    p.add_argument("ensembles", nargs="+")
    p.add_argument("--graph", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--election")
    p.add_argument("--scatter-points", type=int, default=5000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("superdistrict", help="greedy two-Democratic-seat search")
    p.add_argument("--graph", required=True)
    p.add_argument("--election", required=True)
    p.add_argument("--pop-tolerance", type=float, default=0.01)
    p.add_argument("--out")
    p.set_defaults(func=cmd_superdistrict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (GraphError, FormatError, PlanError, MetricError, ChainError,
            SearchError, DiagnosticsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
