"""Violins of district vote shares sorted least to most Republican.

The leftmost violin is the least-Republican district's share distribution
(the LRVS); red lines mark the enacted plan's value on each violin with its
ensemble percentile.
"""

from __future__ import annotations

import sys

from .dataio import PlotDataError, read_table, require_kind
from . import style


def render(input_path, output_path, width=8.0, height=5.0, dpi=150, title=None):
    kind, meta, header, columns = read_table(input_path)
    require_kind(kind, "violins", input_path)

    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(width, height))
    data = [columns[name] for name in header]
    positions = list(range(1, len(header) + 1))
    parts = ax.violinplot(data, positions=positions, showextrema=False)
    for i, body in enumerate(parts["bodies"]):
        body.set_gid(f"violin-body-{i}")
        body.set_facecolor(style.LRVS_COLOR)
        body.set_alpha(0.6)

    enacted = meta.get("enacted") or []
    percentiles = meta.get("enacted_percentiles") or []
    for i, value in enumerate(enacted):
        if value is None:
            continue
        line = ax.hlines(
            float(value), positions[i] - 0.3, positions[i] + 0.3,
            color=style.ENACTED_COLOR, lw=1.4,
        )
        line.set_gid(f"enacted-line-{i}")
        if i < len(percentiles) and percentiles[i] is not None:
            ax.annotate(
                f"{percentiles[i]:.0f}%",
                xy=(positions[i] + 0.32, float(value)),
                color=style.ENACTED_COLOR,
                fontsize=8,
                va="center",
            )

    ax.axhline(0.5, color="gray", lw=0.6, ls=":")
    ax.set_xticks(positions)
    ax.set_xticklabels([f"rank {i}" for i in positions])
    ax.set_ylabel("Republican vote share")
    ax.set_title(
        title
        or "district shares sorted least to most Republican"
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
