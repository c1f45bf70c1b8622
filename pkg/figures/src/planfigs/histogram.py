"""Histogram of a plan-level count (cut edges) with the enacted plan marked."""

from __future__ import annotations

import sys

import numpy as np

from .dataio import PlotDataError, read_table, require_kind
from . import style


def render(input_path, output_path, width=8.0, height=5.0, dpi=150, title=None,
           bins=60):
    kind, meta, header, columns = read_table(input_path)
    require_kind(kind, "histogram", input_path)
    values = columns[header[0]]

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(width, height))
    if np.all(values == np.round(values)) and np.ptp(values) < 10 * bins:
        lo, hi = int(values.min()), int(values.max())
        step = max(1, int(np.ceil((hi - lo + 1) / bins)))
        edges = np.arange(lo - 0.5, hi + step + 0.5, step)
    else:
        edges = bins
    _, _, patches = ax.hist(values, bins=edges, color=style.SERIES_COLOR,
                            edgecolor="white", linewidth=0.3)
    for i, patch in enumerate(patches):
        patch.set_gid(f"hist-bar-{i}")

    if meta.get("enacted") is not None:
        marker = ax.axvline(
            float(meta["enacted"]), color=style.ENACTED_COLOR, lw=1.6
        )
        marker.set_gid("enacted-marker")
        ax.annotate(
            "enacted",
            xy=(float(meta["enacted"]), ax.get_ylim()[1] * 0.95),
            color=style.ENACTED_COLOR,
            fontsize=8,
            ha="right",
        )

    metric = meta.get("metric", header[0])
    ax.set_xlabel(metric.replace("_", " "))
    ax.set_ylabel("plans")
    ax.set_title(title or f"{metric.replace('_', ' ')} across the ensemble")
    style.save(fig, output_path, dpi)


def main(argv=None) -> int:
    parser = style.build_parser(__doc__)
    parser.add_argument("--bins", type=int, default=60)
    args = parser.parse_args(argv)
    try:
        render(args.input, args.output, args.width, args.height, args.dpi,
               args.title, args.bins)
    except (PlotDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
