"""File formats shared by the CLI, the tests, and the plotting layer.

Everything is plain text: the graph document is JSON, plans are one
"precinct-id,district-label" line per precinct in node order, chain configs
are flat key = value files mirroring ChainConfig field names, and ensembles
and plot-data tables are comment-headered CSV so external tools can consume
them directly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .chains import ChainConfig, EnsembleRecord
from .diagnostics import EnsembleTable
from .graph import DualGraph
from .metrics import MetricVector
from .partition import Plan, canonical_hash


class FormatError(ValueError):
    pass


FORMAT_VERSION = "planchain-ensemble v1"


# ---------------------------------------------------------------------------
# plans


def write_plan(plan: Plan, graph: DualGraph, path):
    with open(path, "w", encoding="utf-8") as fh:
        for pid, label in zip(graph.ids, plan.assignment):
            fh.write(f"{pid},{int(label)}\n")


def read_plan(path, graph: DualGraph) -> Plan:
    labels: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                pid, label = line.rsplit(",", 1)
                labels[pid] = int(label)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad plan line {line!r}") from exc
    missing = [pid for pid in graph.ids if pid not in labels]
    if missing:
        raise FormatError(f"{path}: no district for precinct(s) {missing[:5]}")
    extra = sorted(set(labels) - set(graph.ids))
    if extra:
        raise FormatError(f"{path}: unknown precinct(s) {extra[:5]}")
    assignment = np.array([labels[pid] for pid in graph.ids], dtype=np.int64)
    return Plan(assignment, k=int(assignment.max()) + 1)


# ---------------------------------------------------------------------------
# chain config files


CONFIG_KEYS = {
    "proposal",
    "steps",
    "seed",
    "pop_tolerance",
    "cut_edge_bound",
    "gibbs_beta",
    "start",
    "elections",
}


@dataclass
class ChainFileConfig:
    """Parsed chain config file; ``start`` is a plan file path."""

    proposal: str
    steps: int
    seed: int
    start: str | None = None
    pop_tolerance: float = 0.01
    cut_edge_bound: int | None = None
    gibbs_beta: float = 0.0
    elections: tuple[str, ...] | None = None

    def digest(self) -> str:
        text = "\n".join(
            f"{key} = {getattr(self, key)}" for key in sorted(CONFIG_KEYS)
        )
        return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def parse_chain_config(path) -> ChainFileConfig:
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise FormatError(f"{path}:{lineno}: unknown config key {key!r}")
            if key in raw:
                raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value
    for needed in ("proposal", "steps", "seed"):
        if needed not in raw:
            raise FormatError(f"{path}: missing required key {needed!r}")
    try:
        return ChainFileConfig(
            proposal=raw["proposal"],
            steps=int(raw["steps"]),
            seed=int(raw["seed"]),
            start=raw.get("start"),
            pop_tolerance=float(raw.get("pop_tolerance", "0.01")),
            cut_edge_bound=(
                int(raw["cut_edge_bound"]) if "cut_edge_bound" in raw else None
            ),
            gibbs_beta=float(raw.get("gibbs_beta", "0")),
            elections=(
                tuple(e.strip() for e in raw["elections"].split(",") if e.strip())
                if "elections" in raw
                else None
            ),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# ensemble files


def ensemble_columns(k: int, elections) -> list[str]:
    """The fixed column contract: step, hash, cut_edges, then per election
    the sorted shares and the MetricVector fields in declaration order."""
    cols = ["step", "hash", "cut_edges"]
    for e in elections:
        cols.extend(f"{e}_share_{r}" for r in range(1, k + 1))
        cols.extend(f"{e}_{f}" for f in MetricVector.FIELDS)
    return cols


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class EnsembleWriter:
    """Streams records to a CSV ensemble file, one line per step.

    The header embeds the run manifest (minus wall-clock data, so reruns are
    byte-identical) and the start plan's metric row. Lines are flushed as
    they are written; any prefix of the file is itself a valid ensemble.
    """

    def __init__(self, path, graph: DualGraph, config: ChainConfig,
                 config_digest: str = "", start_values: dict | None = None):
        self.path = path
        self.k = config.start.k
        self.elections = tuple(config.elections or graph.elections)
        self.columns = ensemble_columns(self.k, self.elections)
        self._fh = open(path, "w", encoding="utf-8", buffering=1)
        manifest = {
            "config": config_digest,
            "seed": config.seed,
            "chain": config.chain_index,
            "start": canonical_hash(config.start),
            "k": self.k,
            "elections": list(self.elections),
            "version": version(),
        }
        self._fh.write(f"# {FORMAT_VERSION}\n")
        self._fh.write(f"# manifest: {json.dumps(manifest, sort_keys=True)}\n")
        if start_values:
            self._fh.write(
                f"# start_values: {json.dumps(start_values, sort_keys=True)}\n"
            )
        self._fh.write(",".join(self.columns) + "\n")

    def write(self, record: EnsembleRecord):
        row = [str(record.step), record.plan_hash, str(record.cut_edges)]
        for e in self.elections:
            row.extend(_fmt(float(s)) for s in record.shares[e])
            mv = record.metrics[e]
            row.extend(_fmt(getattr(mv, f)) for f in MetricVector.FIELDS)
        self._fh.write(",".join(row) + "\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def read_ensemble(path) -> EnsembleTable:
    """Load an ensemble file; tolerates a truncated final line."""
    meta: dict = {}
    start_values: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# {FORMAT_VERSION}":
            raise FormatError(f"{path}: not an ensemble file (header {first!r})")
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# manifest: "):
                meta = json.loads(line[len("# manifest: "):])
                continue
            if line.startswith("# start_values: "):
                start_values = json.loads(line[len("# start_values: "):])
                continue
            if line.startswith("#") or not line:
                continue
            if header is None:
                header = line.split(",")
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                continue  # truncated tail from an interrupted run
            rows.append(parts)
    if header is None:
        raise FormatError(f"{path}: missing column header")
    k = int(meta.get("k", 0))
    elections = tuple(meta.get("elections", []))
    if not k or not elections:
        share_cols = [c for c in header if "_share_" in c]
        elections = tuple(dict.fromkeys(c.rsplit("_share_", 1)[0] for c in share_cols))
        k = max(int(c.rsplit("_", 1)[1]) for c in share_cols) if share_cols else 0
    columns: dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        vals = [row[i] for row in rows]
        if name == "hash":
            columns[name] = np.array(vals, dtype=object)
        else:
            columns[name] = np.array([float(v) for v in vals], dtype=float)
    return EnsembleTable(
        columns=columns,
        k=k,
        elections=elections,
        provenance=str(meta.get("config", "")),
        start_values=start_values,
    )


# ---------------------------------------------------------------------------
# plot-data tables (the contract consumed by the figure scripts)


PLOT_TABLE_KINDS = ("density-overlay", "histogram", "violins", "scatter-marginals")


def write_plot_table(path, kind: str, meta: dict, header: list[str], rows):
    """Write one delimited plot-data table.

    Layout: '# table=<kind>' first, one '# key=value' line per metadata
    entry (JSON-encoded values), then a CSV header and rows.
    """
    if kind not in PLOT_TABLE_KINDS:
        raise FormatError(f"unknown plot table kind {kind!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# table={kind}\n")
        for key in sorted(meta):
            fh.write(f"# {key}={json.dumps(meta[key])}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_plot_table(path):
    """Read a plot-data table back as (kind, meta, header, column arrays)."""
    meta: dict = {}
    kind = None
    header = None
    rows: list[list[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# table="):
                kind = line[len("# table="):]
                continue
            if line.startswith("# "):
                key, value = line[2:].split("=", 1)
                meta[key] = json.loads(value)
                continue
            if not line:
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if kind not in PLOT_TABLE_KINDS or header is None:
        raise FormatError(f"{path}: not a plot-data table")
    columns = {
        name: np.array([float(row[i]) for row in rows], dtype=float)
        for i, name in enumerate(header)
    }
    return kind, meta, header, columns


def version() -> str:
    from . import __version__

    return __version__
