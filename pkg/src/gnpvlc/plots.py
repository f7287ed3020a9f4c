"""Plain line charts of the experiment tables, written as deterministic SVG."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# (x column, y column, series column or None, log-y)
LAYOUT = {
    "sumrate": ("ptx_dbm", "sum_rate_bpshz", "variant", False),
    "secrecy": ("ptx_dbm", "secrecy_rate_bpshz", "variant", False),
    "ber_distance": ("target_ber", "distance_m", "ptx_dbm", False),
    "condnum": ("distance_m", "cond_gnp", None, True),
    "ao_trace": ("outer", "sum_slnr", "K", False),
    "chromaticity": ("x", "y", "i", False),
}


def plot_table(table, path: Path, title: str | None = None) -> Path:
    xcol, ycol, scol, logy = LAYOUT[table.name]
    ix, iy = table.header.index(xcol), table.header.index(ycol)
    series = defaultdict(list)
    for r in table.rows:
        key = r[table.header.index(scol)] if scol else ycol
        series[key].append((r[ix], r[iy]))
    plt.rcParams["svg.hashsalt"] = "gnpvlc"
    fig, ax = plt.subplots(figsize=(6, 4))
    style = "o" if table.name == "chromaticity" else "-o"
    for key in sorted(series, key=str):
        pts = sorted(series[key]) if table.name != "chromaticity" else series[key]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], style, ms=3, label=str(key))
    if table.name == "condnum":
        ax.plot(*zip(*[(r[0], r[2]) for r in table.rows]), "--", label="cond_nognp")
    if logy:
        ax.set_yscale("log")
    if table.name == "ber_distance":
        ax.set_xscale("log")
    ax.set_xlabel(xcol)
    ax.set_ylabel(ycol)
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(fontsize=7)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
