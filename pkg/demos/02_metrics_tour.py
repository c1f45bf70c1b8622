"""
A tour of the plan metrics
==========================

Score a few hand-made 4-district vote patterns with every metric and show
the relationships the metrics are supposed to capture: symmetry scores
vanish on symmetric patterns, the efficiency gap collapses to one value on
sweeps, and the buffered declination stays finite where the plain
declination would not.
"""

import numpy as np

from planchain.metrics import (
    ShareVector,
    buffered_declination,
    efficiency_gap,
    lrvs,
    mean_median,
    partisan_bias,
    partisan_gini,
    seat_count,
    seats_votes_curve,
    stdev_shares,
)
from planchain.partition import DistrictTally


def tallies_from(shares, turnout=10000):
    return [
        DistrictTally(d, 1000, {"e": (int(s * turnout), int((1 - s) * turnout))})
        for d, s in enumerate(shares)
    ]


def vector(shares):
    return ShareVector(
        shares=np.array(shares), election="e",
        turnout=np.full(len(shares), 10000.0),
    )


patterns = {
    "symmetric": [0.40, 0.45, 0.55, 0.60],
    "all-R sweep": [0.55, 0.60, 0.70, 0.80],
    "cracked D": [0.20, 0.60, 0.62, 0.64],
    "packed R": [0.45, 0.48, 0.49, 0.90],
}

header = f"{'pattern':>12} {'LRVS':>6} {'seats':>5} {'mm':>7} {'bias':>6} " \
         f"{'gini':>7} {'eg':>7} {'stdev':>6} {'bdecl':>7}"
print(header)
for name, shares in patterns.items():
    vec = vector(shares)
    print(
        f"{name:>12} {lrvs(vec):6.3f} {seat_count(vec):5d} "
        f"{mean_median(vec):7.3f} {partisan_bias(vec):6.2f} "
        f"{partisan_gini(vec):7.4f} {efficiency_gap(tallies_from(shares), 'e'):7.3f} "
        f"{stdev_shares(vec):6.3f} {buffered_declination(vec):7.3f}"
    )

# the seats-votes curve behind partisan bias and partisan Gini
vec = vector(patterns["cracked D"])
curve = seats_votes_curve(vec)
print("\nseats-votes curve for the cracked-D pattern (uniform swing):")
for v in np.arange(0.40, 0.71, 0.05):
    seats = curve.seat_share(v)
    bar = "#" * int(seats * 20)
    print(f"  v={v:.2f}  R seat share {seats:4.2f} {bar}")

# every all-Republican sweep shares one efficiency gap value:
# 3/2 - 2 * statewide share
for shares in ([0.52, 0.55, 0.70, 0.80], [0.51, 0.60, 0.63, 0.73]):
    vec = vector(shares)
    statewide = vec.statewide_share()
    print(
        f"\nsweep {shares}: eg = {efficiency_gap(tallies_from(shares), 'e'):.4f}, "
        f"3/2 - 2V = {1.5 - 2 * statewide:.4f}"
    )
