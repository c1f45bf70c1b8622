"""Reader for the delimited plot-data table contract.

A table starts with '# table=<kind>', then '# key=<json value>' metadata
lines, a CSV header, and data rows. Kinds: density-overlay, histogram,
violins, scatter-marginals.
"""

from __future__ import annotations

import json

import numpy as np

TABLE_KINDS = ("density-overlay", "histogram", "violins", "scatter-marginals")


class PlotDataError(ValueError):
    pass


def read_table(path):
    """Parse a plot-data file into (kind, meta, header, columns)."""
    kind = None
    meta = {}
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# table="):
                kind = line[len("# table="):]
                continue
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                meta[key] = json.loads(value)
                continue
            if not line:
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if kind not in TABLE_KINDS:
        raise PlotDataError(f"{path}: missing or unknown table kind {kind!r}")
    if header is None:
        raise PlotDataError(f"{path}: missing column header")
    if not rows:
        raise PlotDataError(f"{path}: table has no data rows")
    columns = {
        name: np.array([float(row[i]) for row in rows], dtype=float)
        for i, name in enumerate(header)
    }
    return kind, meta, header, columns


def require_kind(kind: str, expected: str, path):
    if kind != expected:
        raise PlotDataError(
            f"{path}: table kind {kind!r} does not match this figure "
            f"(expected {expected!r})"
        )
