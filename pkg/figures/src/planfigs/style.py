"""Shared styling and deterministic rendering helpers."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "planfigs"

import matplotlib.pyplot as plt
import numpy as np

ENACTED_COLOR = "#d62728"  # red, matching the enacted-plan convention
SERIES_COLOR = "#1f77b4"
DENSITY_COLOR = "#2ca02c"
LRVS_COLOR = "#9467bd"


def build_parser(description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("input", help="plot-data file")
    parser.add_argument("output", help="image file (.svg or .png)")
    parser.add_argument("--width", type=float, default=8.0)
    parser.add_argument("--height", type=float, default=5.0)
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--title", default=None)
    return parser


def save(fig, output, dpi: int):
    """Write the figure; SVG output is byte-stable for identical input."""
    kwargs = {"dpi": dpi}
    if str(output).endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(output, **kwargs)
    plt.close(fig)


def gaussian_kde(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Plain Gaussian kernel density with Scott's-rule bandwidth."""
    values = np.asarray(values, dtype=float)
    n = values.size
    spread = values.std()
    if spread == 0:
        spread = max(abs(values[0]), 1.0) * 1e-3
    bandwidth = 1.06 * spread * n ** (-1 / 5)
    z = (grid[:, None] - values[None, :]) / bandwidth
    return np.exp(-0.5 * z * z).sum(axis=1) / (n * bandwidth * np.sqrt(2 * np.pi))
