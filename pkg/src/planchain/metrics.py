"""Plan-level partisan metrics, centered on the least-Republican vote share.

All scores are constructed for the Republican party: for signed metrics a
larger positive value indicates a plan more favorable to Republicans. Share
arithmetic is two-party throughout (third parties are dropped upstream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import DualGraph
from .partition import DistrictTally, Plan

# Vote share of the artificial districts appended by buffered_declination:
# one district won by each party, at this share and its complement.
DEFAULT_BUFFER_SHARE = 0.75


class MetricError(ValueError):
    pass


@dataclass
class ShareVector:
    """Republican two-party vote shares of one plan, sorted ascending.

    ``turnout`` carries each district's two-party vote total, aligned with
    the sorted shares so turnout-weighted statewide shares stay exact.
    """

    shares: np.ndarray
    election: str
    turnout: np.ndarray

    def __post_init__(self):
        shares = np.asarray(self.shares, dtype=float)
        turnout = np.asarray(self.turnout, dtype=float)
        if shares.shape != turnout.shape or shares.ndim != 1 or shares.size == 0:
            raise MetricError("shares and turnout must be matching 1-d arrays")
        order = np.argsort(shares, kind="stable")
        self.shares = shares[order]
        self.turnout = turnout[order]
        self.shares.setflags(write=False)
        self.turnout.setflags(write=False)

    @property
    def k(self) -> int:
        return self.shares.size

    def statewide_share(self) -> float:
        """Turnout-weighted statewide Republican two-party share."""
        return float(np.average(self.shares, weights=self.turnout))


def share_vector(tallies: list[DistrictTally], election: str) -> ShareVector:
    """Sorted district Republican shares for one election."""
    reps = np.array([t.votes[election][0] for t in tallies], dtype=float)
    dems = np.array([t.votes[election][1] for t in tallies], dtype=float)
    totals = reps + dems
    if (totals <= 0).any():
        bad = [t.district for t, tot in zip(tallies, totals) if tot <= 0]
        raise MetricError(
            f"district(s) {bad} have zero two-party turnout for {election!r}"
        )
    return ShareVector(shares=reps / totals, election=election, turnout=totals)


def lrvs(shares: ShareVector) -> float:
    """Least-Republican Vote Share: the smallest district share."""
    return float(shares.shares[0])


def mean_median(shares: ShareVector) -> float:
    """Mean minus median of the Republican district shares."""
    s = shares.shares
    return float(np.mean(s) - np.median(s))


def seat_count(shares: ShareVector) -> int:
    """Republican seats; a district at exactly 1/2 is not counted as won."""
    return int((shares.shares > 0.5).sum())


def tied_districts(shares: ShareVector) -> int:
    """Districts at exactly 1/2, flagged because they count as not won."""
    return int((shares.shares == 0.5).sum())


def partisan_bias(shares: ShareVector) -> float:
    """Republican seat share minus 1/2 after swinging the state to 50/50.

    Uniform partisan swing: every district share is shifted by the same
    constant that moves the turnout-weighted statewide share to one half.
    """
    shift = 0.5 - shares.statewide_share()
    shifted = shares.shares + shift
    return float((shifted > 0.5).sum() / shares.k - 0.5)


@dataclass
class SeatsVotesCurve:
    """Seat share as a step function of statewide vote share v in [0, 1].

    Thresholds are where districts flip under uniform swing. The curve is
    nondecreasing and evaluated right-continuously.
    """

    thresholds: np.ndarray
    k: int

    def seat_share(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.searchsorted(self.thresholds, v, side="right") / self.k


def seats_votes_curve(shares: ShareVector) -> SeatsVotesCurve:
    """Republican seats-votes curve under uniform partisan swing."""
    v0 = shares.statewide_share()
    thresholds = np.sort(0.5 + v0 - shares.shares)
    return SeatsVotesCurve(thresholds=thresholds, k=shares.k)


def partisan_gini(shares: ShareVector) -> float:
    """Area between the Republican seats-votes curve and its point
    reflection through (1/2, 1/2); zero means perfect partisan symmetry.

    Both curves are step functions, so the integral is taken exactly over
    the cells between consecutive breakpoints.
    """
    curve = seats_votes_curve(shares)
    t = curve.thresholds
    # reflected opponent curve R(v) = 1 - S(1 - v) jumps at 1 - t
    breaks = np.unique(np.concatenate([[0.0, 1.0], t, 1.0 - t]))
    breaks = breaks[(breaks >= 0.0) & (breaks <= 1.0)]
    if breaks[0] > 0.0:
        breaks = np.concatenate([[0.0], breaks])
    if breaks[-1] < 1.0:
        breaks = np.concatenate([breaks, [1.0]])
    mids = (breaks[:-1] + breaks[1:]) / 2.0
    widths = np.diff(breaks)
    s_mid = curve.seat_share(mids)
    r_mid = 1.0 - curve.seat_share(1.0 - mids)
    return float(np.sum(np.abs(s_mid - r_mid) * widths))


def efficiency_gap(tallies: list[DistrictTally], election: str) -> float:
    """Normalized wasted-vote difference; positive favors Republicans.

    The loser wastes every vote; the winner wastes votes above half the
    district's two-party total (the half convention keeps the score
    invariant under a common turnout rescaling). A tied district counts as
    a Republican loss.
    """
    wasted_rep = 0.0
    wasted_dem = 0.0
    total = 0.0
    for t in tallies:
        rep, dem = t.votes[election]
        two_party = rep + dem
        if two_party <= 0:
            raise MetricError(
                f"district {t.district} has zero two-party turnout for {election!r}"
            )
        total += two_party
        if rep > dem:
            wasted_rep += rep - two_party / 2.0
            wasted_dem += dem
        else:
            wasted_rep += rep
            wasted_dem += dem - two_party / 2.0
    return float((wasted_dem - wasted_rep) / total)


def stdev_shares(shares: ShareVector) -> float:
    """Population standard deviation of the district shares."""
    return float(np.std(shares.shares))


def ranked_marginal_deviation(shares, ensemble_medians) -> float:
    """Sum of squared gaps between sorted shares and the per-rank ensemble
    medians (the gerrymandering index)."""
    s = shares.shares if isinstance(shares, ShareVector) else np.asarray(shares, float)
    m = np.asarray(ensemble_medians, dtype=float)
    if s.shape != m.shape:
        raise MetricError(f"rank mismatch: {s.shape} vs {m.shape}")
    return float(np.sum((s - m) ** 2))


def buffered_declination(
    shares: ShareVector, buffer_share: float = DEFAULT_BUFFER_SHARE
) -> float:
    """Declination on the share vector padded with one safe district per
    party, so the score stays defined under single-party sweeps.

    Geometry: sorted Republican shares are plotted at x = (i - 1/2)/n. F and
    G are the centroids of the Democratic-won (< 1/2) and Republican-won
    (> 1/2) points, M sits at (fraction below, 1/2). The score compares the
    slopes of the lines F--M and M--G, scaled by 2/pi so it lives in
    (-1, 1); positive favors Republicans.
    """
    padded = np.sort(
        np.concatenate([shares.shares, [1.0 - buffer_share, buffer_share]])
    )
    n = padded.size
    x = (np.arange(1, n + 1) - 0.5) / n
    below = padded < 0.5
    above = padded > 0.5
    # districts at exactly 1/2 belong to neither group; the buffers keep
    # both groups nonempty regardless
    fx, fy = float(np.mean(x[below])), float(np.mean(padded[below]))
    gx, gy = float(np.mean(x[above])), float(np.mean(padded[above]))
    mx, my = below.sum() / n, 0.5
    theta_f = math.atan2(my - fy, mx - fx)
    theta_g = math.atan2(gy - my, gx - mx)
    return (2.0 / math.pi) * (theta_f - theta_g)


# ---------------------------------------------------------------------------
# average absolute partisan dislocation


class AapdNeighborhoods:
    """Per-precinct nearest-voter neighborhoods, shared read-only.

    For each precinct, the nearest precincts by centroid distance (always
    including the precinct itself) are accumulated until their two-party
    vote count reaches the statewide two-party total divided by k; the
    neighborhood's Republican share is frozen here since it does not depend
    on the plan. Ties in distance break toward the lower node index.
    """

    def __init__(self, graph: DualGraph, election: str, k: int):
        if election not in graph.elections:
            raise MetricError(f"unknown election {election!r}")
        self.election = election
        self.k = k
        votes = graph.votes[election].astype(float)
        two_party = votes.sum(axis=1)
        threshold = two_party.sum() / k
        coords = graph.centroids
        n = graph.node_count
        shares = np.empty(n, dtype=float)
        for i in range(n):
            d2 = ((coords - coords[i]) ** 2).sum(axis=1)
            order = np.argsort(d2, kind="stable")
            cum = np.cumsum(two_party[order])
            stop = int(np.searchsorted(cum, threshold, side="left"))
            stop = min(stop, n - 1)
            members = order[: stop + 1]
            tot = two_party[members].sum()
            if tot <= 0:
                raise MetricError("neighborhood has zero two-party turnout")
            shares[i] = votes[members, 0].sum() / tot
        shares.setflags(write=False)
        self.neighborhood_shares = shares


def aapd(
    graph: DualGraph,
    plan: Plan,
    election: str,
    neighborhoods: AapdNeighborhoods | None = None,
) -> float:
    """Average absolute partisan dislocation.

    Each precinct's dislocation is its district's Republican two-party share
    minus its neighborhood's; the mean absolute value is taken uniformly
    over precincts.
    """
    if neighborhoods is None or neighborhoods.k != plan.k:
        neighborhoods = AapdNeighborhoods(graph, election, plan.k)
    votes = graph.votes[election].astype(float)
    labels = plan.assignment
    rep_d = np.bincount(labels, weights=votes[:, 0], minlength=plan.k)
    two_d = np.bincount(labels, weights=votes.sum(axis=1), minlength=plan.k)
    if (two_d <= 0).any():
        raise MetricError(f"district with zero two-party turnout for {election!r}")
    district_share = rep_d / two_d
    dislocation = district_share[labels] - neighborhoods.neighborhood_shares
    return float(np.abs(dislocation).mean())


# ---------------------------------------------------------------------------
# assembled metric vector


@dataclass
class MetricVector:
    """All per-election plan metrics, in the fixed recorded order."""

    lrvs: float
    mean_median: float
    partisan_bias: float
    partisan_gini: float
    efficiency_gap: float
    stdev_shares: float
    aapd: float
    buffered_declination: float
    seats_r: int
    tied_districts: int
    rmd: float | None = None  # needs ensemble medians; filled in analysis

    FIELDS = (
        "lrvs",
        "mean_median",
        "partisan_bias",
        "partisan_gini",
        "efficiency_gap",
        "stdev_shares",
        "aapd",
        "buffered_declination",
        "seats_r",
        "tied_districts",
    )


def metric_vector(
    graph: DualGraph,
    plan: Plan,
    tallies: list[DistrictTally],
    shares: ShareVector,
    neighborhoods: AapdNeighborhoods | None = None,
) -> MetricVector:
    """Evaluate every recorded metric for one plan and election."""
    return MetricVector(
        lrvs=lrvs(shares),
        mean_median=mean_median(shares),
        partisan_bias=partisan_bias(shares),
        partisan_gini=partisan_gini(shares),
        efficiency_gap=efficiency_gap(tallies, shares.election),
        stdev_shares=stdev_shares(shares),
        aapd=aapd(graph, plan, shares.election, neighborhoods),
        buffered_declination=buffered_declination(shares),
        seats_r=seat_count(shares),
        tied_districts=tied_districts(shares),
    )
