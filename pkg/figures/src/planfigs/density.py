"""Overlaid per-chain density curves of one metric, with start-value lines.

One curve per chain column shows whether chains from different starting
plans settle on the same distribution; vertical lines mark each chain's
starting value.
"""

from __future__ import annotations

import sys

import numpy as np

from .dataio import PlotDataError, read_table, require_kind
from . import style


def render(input_path, output_path, width=8.0, height=5.0, dpi=150, title=None):
    kind, meta, header, columns = read_table(input_path)
    require_kind(kind, "density-overlay", input_path)

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(width, height))
    lo = min(col.min() for col in columns.values())
    hi = max(col.max() for col in columns.values())
    pad = 0.05 * (hi - lo) if hi > lo else 0.05
    grid = np.linspace(lo - pad, hi + pad, 400)

    cmap = plt.get_cmap("tab20")
    for i, name in enumerate(header):
        curve = style.gaussian_kde(columns[name], grid)
        (line,) = ax.plot(grid, curve, lw=1.2, color=cmap(i % 20), label=name)
        line.set_gid(f"density-curve-{i}")

    for i, start in enumerate(meta.get("starts", [])):
        if start is None:
            continue
        marker = ax.axvline(float(start), color=style.ENACTED_COLOR, lw=0.8, alpha=0.7)
        marker.set_gid(f"start-line-{i}")

    metric = meta.get("metric", "metric")
    ax.set_xlabel(metric.upper() if metric == "lrvs" else metric)
    ax.set_ylabel("density")
    if len(header) <= 12:
        ax.legend(fontsize=7, ncol=2)
    ax.set_title(title or f"{metric} across {len(header)} chains"
                 + (f" ({meta['election']})" if "election" in meta else ""))
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
