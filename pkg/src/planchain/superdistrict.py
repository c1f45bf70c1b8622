"""Greedy search for two majority-Democratic districts, contiguity ignored.

The construction: split the state into two population-balanced "super"
districts seeded by Democratic vote share, greedily swap precincts between
them to push one super district's Democratic share above one half, then
split that super district into two quarter-population districts that are
each majority-Democratic. No step here requires or checks contiguity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import DualGraph


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SuperDistrictState:
    """A precinct set with running vote and population totals."""

    members: frozenset[str]
    dem_votes: int
    rep_votes: int
    population: int
    election: str

    @property
    def two_party_votes(self) -> int:
        return self.dem_votes + self.rep_votes

    @property
    def dem_share(self) -> float:
        return self.dem_votes / self.two_party_votes


def _node_arrays(graph: DualGraph, election: str):
    votes = graph.votes[election]
    dem = votes[:, 1].astype(np.int64)
    two_party = votes.sum(axis=1).astype(np.int64)
    return dem, two_party, graph.populations


def _state_from_indices(graph, election, indices) -> SuperDistrictState:
    dem, two_party, pops = _node_arrays(graph, election)
    idx = np.asarray(sorted(indices), dtype=np.int64)
    return SuperDistrictState(
        members=frozenset(graph.ids[i] for i in idx),
        dem_votes=int(dem[idx].sum()),
        rep_votes=int((two_party[idx] - dem[idx]).sum()),
        population=int(pops[idx].sum()),
        election=election,
    )


def seed_by_share(
    graph: DualGraph, election: str
) -> tuple[SuperDistrictState, SuperDistrictState]:
    """Fill one super district with the most-Democratic precincts.

    Precincts are sorted by Democratic two-party share descending (ties by
    id) and added until the running population first reaches half the state
    total; the rest form the second super district.
    """
    dem, two_party, pops = _node_arrays(graph, election)
    with np.errstate(invalid="ignore"):
        share = np.where(two_party > 0, dem / np.maximum(two_party, 1), 0.0)
    order = sorted(range(graph.node_count), key=lambda i: (-share[i], graph.ids[i]))
    half = graph.total_population / 2.0
    chosen = []
    running = 0
    for i in order:
        if running >= half:
            break
        chosen.append(i)
        running += int(pops[i])
    rest = sorted(set(range(graph.node_count)) - set(chosen))
    if not chosen or not rest:
        raise SearchError("cannot seed two super districts from this graph")
    return (
        _state_from_indices(graph, election, chosen),
        _state_from_indices(graph, election, rest),
    )


def swap_gain(
    state: SuperDistrictState,
    out_votes: tuple[int, int],
    in_votes: tuple[int, int],
) -> float:
    """Change in the state's Democratic share from swapping one precinct out
    for one in; votes are (dem, two_party) pairs."""
    d_out, t_out = out_votes
    d_in, t_in = in_votes
    d, t = state.dem_votes, state.two_party_votes
    new_total = t - t_out + t_in
    if new_total == 0:
        raise SearchError("swap empties the super district of voters")
    return (d - d_out + d_in) / new_total - d / t


@dataclass
class GreedyTrace:
    """Swap-by-swap record of a greedy improvement run."""

    swaps: list[tuple[str, str, float]]  # (out id, in id, share after)
    final_share: float


def greedy_improve(
    state_a: SuperDistrictState,
    state_b: SuperDistrictState,
    graph: DualGraph,
    pop_tolerance: float = 0.01,
) -> tuple[SuperDistrictState, SuperDistrictState, GreedyTrace]:
    """Greedily raise A's Democratic share by feasible precinct swaps.

    Each round applies the population-feasible swap (one precinct each way,
    both totals within pop_tolerance of half the state) with the largest
    strictly positive share gain for A; ties break lexicographically on
    (outgoing id, incoming id). Stops at the first round with no positive
    feasible gain. The share of A strictly increases every round, so the
    loop terminates.
    """
    election = state_a.election
    dem, two_party, pops = _node_arrays(graph, election)
    ids = np.array(graph.ids, dtype=object)
    half = graph.total_population / 2.0
    bound = pop_tolerance * half

    in_a = np.array([pid in state_a.members for pid in graph.ids])
    a_dem, a_two = state_a.dem_votes, state_a.two_party_votes
    a_pop = state_a.population
    swaps: list[tuple[str, str, float]] = []

    while True:
        out_idx = np.nonzero(in_a)[0]
        in_idx = np.nonzero(~in_a)[0]
        # candidate totals after swapping out o and in i
        new_pop = a_pop - pops[out_idx][:, None] + pops[in_idx][None, :]
        feasible = np.abs(new_pop - half) <= bound
        new_dem = a_dem - dem[out_idx][:, None] + dem[in_idx][None, :]
        new_two = a_two - two_party[out_idx][:, None] + two_party[in_idx][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(
                feasible & (new_two > 0), new_dem / new_two - a_dem / a_two, -np.inf
            )
        best = float(gain.max()) if gain.size else -np.inf
        if not np.isfinite(best) or best <= 0.0:
            break
        candidates = np.argwhere(gain == best)
        pairs = sorted(
            (str(ids[out_idx[o]]), str(ids[in_idx[i]]), int(o), int(i))
            for o, i in candidates
        )
        out_id, in_id, o, i = pairs[0]
        go, gi = out_idx[o], in_idx[i]
        in_a[go] = False
        in_a[gi] = True
        a_dem = a_dem - int(dem[go]) + int(dem[gi])
        a_two = a_two - int(two_party[go]) + int(two_party[gi])
        a_pop = a_pop - int(pops[go]) + int(pops[gi])
        swaps.append((out_id, in_id, a_dem / a_two))

    final_a = _state_from_indices(graph, election, np.nonzero(in_a)[0])
    final_b = _state_from_indices(graph, election, np.nonzero(~in_a)[0])
    return final_a, final_b, GreedyTrace(swaps=swaps, final_share=final_a.dem_share)


@dataclass
class SplitResult:
    """Outcome of splitting a super district into two quarter districts."""

    part_a: SuperDistrictState
    part_b: SuperDistrictState
    population_feasible: bool
    majority_feasible: bool

    @property
    def feasible(self) -> bool:
        return self.population_feasible and self.majority_feasible


def split_superdistrict(
    state: SuperDistrictState,
    graph: DualGraph,
    pop_tolerance: float = 0.01,
    require_majority: bool = True,
) -> SplitResult:
    """Split a super district into two population-balanced halves, each
    majority-Democratic when possible.

    Heuristic: walk the members by descending Democratic share, assigning
    each to the currently lighter half, then repair with pairwise swaps that
    raise the smaller half-share while keeping populations within
    pop_tolerance of a quarter of the state. Infeasibility is reported, not
    raised.
    """
    if not state.members:
        raise SearchError("cannot split an empty super district")
    dem, two_party, pops = _node_arrays(graph, state.election)
    idx = np.array(sorted(graph.index[pid] for pid in state.members), dtype=np.int64)
    with np.errstate(invalid="ignore"):
        share = np.where(two_party[idx] > 0, dem[idx] / np.maximum(two_party[idx], 1), 0.0)
    order = sorted(range(len(idx)), key=lambda j: (-share[j], graph.ids[idx[j]]))

    quarter = graph.total_population / 4.0
    bound = pop_tolerance * quarter
    in_a = np.zeros(len(idx), dtype=bool)
    pop_a = 0
    pop_b = 0
    for j in order:
        if pop_a <= pop_b:
            in_a[j] = True
            pop_a += int(pops[idx[j]])
        else:
            pop_b += int(pops[idx[j]])

    def totals(mask):
        sel = idx[mask]
        d = int(dem[sel].sum())
        t = int(two_party[sel].sum())
        p = int(pops[sel].sum())
        return d, t, p

    def score(mask):
        da, ta, pa = totals(mask)
        db, tb, pb = totals(~mask)
        if ta == 0 or tb == 0:
            return -np.inf
        return min(da / ta, db / tb)

    if require_majority:
        improved = True
        while improved and score(in_a) <= 0.5:
            improved = False
            da, ta, pa = totals(in_a)
            db, tb, pb = totals(~in_a)
            a_mem = np.nonzero(in_a)[0]
            b_mem = np.nonzero(~in_a)[0]
            best_gain = 0.0
            best_pair = None
            current = score(in_a)
            for j in a_mem:
                for l in b_mem:
                    na = pa - int(pops[idx[j]]) + int(pops[idx[l]])
                    nb = pb - int(pops[idx[l]]) + int(pops[idx[j]])
                    if abs(na - quarter) > bound or abs(nb - quarter) > bound:
                        continue
                    nda = da - int(dem[idx[j]]) + int(dem[idx[l]])
                    nta = ta - int(two_party[idx[j]]) + int(two_party[idx[l]])
                    ndb = db + int(dem[idx[j]]) - int(dem[idx[l]])
                    ntb = tb + int(two_party[idx[j]]) - int(two_party[idx[l]])
                    if nta == 0 or ntb == 0:
                        continue
                    cand = min(nda / nta, ndb / ntb)
                    if cand - current > best_gain + 1e-15:
                        best_gain = cand - current
                        best_pair = (j, l)
            if best_pair is not None:
                j, l = best_pair
                in_a[j] = False
                in_a[l] = True
                improved = True

    part_a = _state_from_indices(graph, state.election, idx[in_a])
    part_b = _state_from_indices(graph, state.election, idx[~in_a])
    pop_ok = (
        abs(part_a.population - quarter) <= bound
        and abs(part_b.population - quarter) <= bound
    )
    majority_ok = part_a.dem_share > 0.5 and part_b.dem_share > 0.5
    return SplitResult(
        part_a=part_a,
        part_b=part_b,
        population_feasible=pop_ok,
        majority_feasible=majority_ok if require_majority else True,
    )
