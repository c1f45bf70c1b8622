"""Metric-vs-LRVS scatter with marginal density panels.

The enacted plan is drawn as a red star, and short red ticks in the
marginal panels show where it falls in each marginal distribution.
"""

from __future__ import annotations

import sys

import numpy as np

from .dataio import PlotDataError, read_table, require_kind
from . import style


def render(input_path, output_path, width=7.0, height=7.0, dpi=150, title=None):
    kind, meta, header, columns = read_table(input_path)
    require_kind(kind, "scatter-marginals", input_path)
    x = columns[header[0]]
    y = columns[header[1]]

    import matplotlib.pyplot as plt

    fig = plt.figure(figsize=(width, height))
    grid = fig.add_gridspec(
        2, 2, width_ratios=(5, 1), height_ratios=(1, 5), hspace=0.06, wspace=0.06
    )
    ax = fig.add_subplot(grid[1, 0])
    ax_top = fig.add_subplot(grid[0, 0], sharex=ax)
    ax_right = fig.add_subplot(grid[1, 1], sharey=ax)
    ax_top.set_gid("marginal-panel-x")
    ax_right.set_gid("marginal-panel-y")
    ax_top.tick_params(labelbottom=False, left=False, labelleft=False)
    ax_right.tick_params(labelleft=False, bottom=False, labelbottom=False)

    dots = ax.scatter(x, y, s=4, alpha=0.35, color=style.SERIES_COLOR,
                      linewidths=0)
    dots.set_gid("scatter-points")

    def panel(axis, values, color, vertical):
        lo, hi = float(values.min()), float(values.max())
        pad = 0.05 * (hi - lo) if hi > lo else 0.05
        pts = np.linspace(lo - pad, hi + pad, 300)
        curve = style.gaussian_kde(values, pts)
        if vertical:
            axis.fill_betweenx(pts, 0, curve, color=color, alpha=0.5)
        else:
            axis.fill_between(pts, 0, curve, color=color, alpha=0.5)

    panel(ax_top, x, style.DENSITY_COLOR, vertical=False)
    panel(ax_right, y, style.LRVS_COLOR, vertical=True)

    ex, ey = meta.get("enacted_x"), meta.get("enacted_y")
    if ex is not None and ey is not None:
        (star,) = ax.plot(
            [float(ex)], [float(ey)], marker="*", markersize=14,
            color=style.ENACTED_COLOR, linestyle="none",
        )
        star.set_gid("enacted-star")
        tick_x = ax_top.axvline(float(ex), ymax=0.25, color=style.ENACTED_COLOR, lw=1.4)
        tick_x.set_gid("enacted-tick-x")
        tick_y = ax_right.axhline(float(ey), xmax=0.25, color=style.ENACTED_COLOR, lw=1.4)
        tick_y.set_gid("enacted-tick-y")

    xname = meta.get("x", header[0])
    yname = meta.get("y", header[1])
    ax.set_xlabel(xname.replace("_", " "))
    ax.set_ylabel(yname.upper() if yname == "lrvs" else yname)
    ax_top.set_title(
        title
        or f"{xname.replace('_', ' ')} vs {yname.upper()}"
        + (f" ({meta['election']})" if "election" in meta else "")
    )
    style.save(fig, output_path, dpi)


def main(argv=None) -> int:
    args = style.build_parser(__doc__).parse_args(argv)
    try:
        render(args.input, args.output, args.width, args.height, args.dpi, args.title)
    except (PlotDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
