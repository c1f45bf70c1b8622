"""Ensemble tables, convergence diagnostics, and outlier statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DiagnosticsError(ValueError):
    pass


@dataclass
class EnsembleTable:
    """Column store of one chain's records.

    ``columns`` maps column name to a numpy array (float for metrics, object
    for the plan-hash column). ``start_values`` carries the start plan's
    metric row when the producing run recorded one.
    """

    columns: dict[str, np.ndarray]
    k: int
    elections: tuple[str, ...]
    provenance: str = ""
    start_values: dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.columns["step"]) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DiagnosticsError(f"no column {name!r}") from None

    @classmethod
    def from_records(cls, records, k: int, elections, provenance: str = ""):
        """Build a table from chain EnsembleRecord objects."""
        elections = tuple(elections)
        cols: dict[str, list] = {"step": [], "hash": [], "cut_edges": []}
        for e in elections:
            for r in range(1, k + 1):
                cols[f"{e}_share_{r}"] = []
            from .metrics import MetricVector

            for f in MetricVector.FIELDS:
                cols[f"{e}_{f}"] = []
        for rec in records:
            cols["step"].append(rec.step)
            cols["hash"].append(rec.plan_hash)
            cols["cut_edges"].append(rec.cut_edges)
            for e in elections:
                for r, s in enumerate(rec.shares[e], start=1):
                    cols[f"{e}_share_{r}"].append(s)
                mv = rec.metrics[e]
                for f in type(mv).FIELDS:
                    cols[f"{e}_{f}"].append(getattr(mv, f))
        arrays = {
            name: (
                np.array(vals, dtype=object)
                if name == "hash"
                else np.array(vals, dtype=float)
            )
            for name, vals in cols.items()
        }
        return cls(columns=arrays, k=k, elections=elections, provenance=provenance)


@dataclass
class PsrfReport:
    """Per-metric potential scale reduction factors across chains."""

    values: dict[str, float]
    chains: int
    length: int
    degenerate: set[str] = field(default_factory=set)


def psrf(series) -> float:
    """Gelman-Rubin potential scale reduction factor for m scalar chains.

    B = n * variance of the chain means, W = mean within-chain variance,
    and the pooled estimate is Vhat = (n-1)/n * W + B/n; the PSRF is
    sqrt(Vhat / W). All chains constant and equal reads as exactly 1;
    constant chains at different levels read as infinity.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 2:
        raise DiagnosticsError("series must be an (m, n) array of m chains")
    m, n = x.shape
    if m < 2:
        raise DiagnosticsError("need at least 2 chains")
    if n < 2:
        raise DiagnosticsError("need chains of length >= 2")
    means = x.mean(axis=1)
    b = n * means.var(ddof=1)
    w = x.var(axis=1, ddof=1).mean()
    if w == 0.0:
        return 1.0 if b == 0.0 else math.inf
    vhat = (n - 1) / n * w + b / n
    return float(math.sqrt(vhat / w))


def psrf_is_degenerate(series) -> bool:
    x = np.asarray(series, dtype=float)
    return bool(x.var(axis=1, ddof=1).mean() == 0.0 and x.mean(axis=1).var(ddof=1) == 0.0)


def psrf_report(
    tables: list[EnsembleTable], columns, burn_in: int = 0, thin: int = 1
) -> PsrfReport:
    """PSRF per metric column over the supplied chains.

    By default the raw series are used; ``burn_in`` drops leading records
    and ``thin`` keeps every thin-th record when subsampling is wanted.
    """
    if len(tables) < 2:
        raise DiagnosticsError("PSRF needs at least two chains")
    if burn_in < 0 or thin < 1:
        raise DiagnosticsError("burn_in must be >= 0 and thin >= 1")
    n = min(len(t) for t in tables)
    usable = (n - burn_in) // thin
    if usable < 10:
        raise DiagnosticsError("need chains of length >= 10 after burn-in/thinning")
    values = {}
    degenerate = set()
    for name in columns:
        series = np.stack(
            [t.column(name)[burn_in : burn_in + usable * thin : thin].astype(float)
             for t in tables]
        )
        values[name] = psrf(series)
        if psrf_is_degenerate(series):
            degenerate.add(name)
    return PsrfReport(
        values=values, chains=len(tables), length=usable, degenerate=degenerate
    )


def percentile_of(value: float, column) -> float:
    """Percentile of ``value`` within the column, in [0, 100].

    Counts entries strictly below, with ties counted half so a value equal
    to the entire ensemble reads 50 rather than 0 or 100.
    """
    col = np.asarray(column, dtype=float)
    if col.size == 0:
        raise DiagnosticsError("empty column")
    below = (col < value).sum()
    ties = (col == value).sum()
    return float(100.0 * (below + 0.5 * ties) / col.size)


def sorted_share_medians(table: EnsembleTable, election: str) -> np.ndarray:
    """Per-rank median of the sorted share columns across the ensemble."""
    if len(table) == 0:
        raise DiagnosticsError("empty table")
    return np.array(
        [
            float(np.median(table.column(f"{election}_share_{r}")))
            for r in range(1, table.k + 1)
        ]
    )


def pooled_share_medians(tables: list[EnsembleTable], election: str) -> np.ndarray:
    """Per-rank medians over the concatenated records of several chains."""
    if not tables:
        raise DiagnosticsError("no tables")
    k = tables[0].k
    return np.array(
        [
            float(
                np.median(
                    np.concatenate(
                        [t.column(f"{election}_share_{r}") for t in tables]
                    )
                )
            )
            for r in range(1, k + 1)
        ]
    )


def duplicate_rate(table: EnsembleTable) -> float:
    """Percentage of records whose plan hash repeats an earlier one."""
    hashes = table.column("hash")
    if hashes.size == 0:
        raise DiagnosticsError("empty table")
    distinct = len(set(hashes.tolist()))
    return float(100.0 * (1.0 - distinct / hashes.size))


def multi_start_density_check(
    tables: list[EnsembleTable], metric: str, bins: int = 40
) -> float:
    """Largest pairwise total-variation distance between the chains'
    histograms of one metric, on shared bins; near 0 when densities agree."""
    if len(tables) < 2:
        raise DiagnosticsError("need at least two tables")
    cols = [t.column(metric).astype(float) for t in tables]
    lo = min(float(c.min()) for c in cols)
    hi = max(float(c.max()) for c in cols)
    if hi == lo:
        hi = lo + 1.0  # all mass in one bin either way
    edges = np.linspace(lo, hi, bins + 1)
    hists = []
    for c in cols:
        h, _ = np.histogram(c, bins=edges)
        hists.append(h / h.sum())
    worst = 0.0
    for i in range(len(hists)):
        for j in range(i + 1, len(hists)):
            tv = 0.5 * float(np.abs(hists[i] - hists[j]).sum())
            worst = max(worst, tv)
    return worst
