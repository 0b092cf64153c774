"""Static SVG emission for run outputs.

A thin optional layer: reads the CSV files a pipeline wrote and renders a
matching SVG next to each.  Histogram tables (bin_center, density,
reference_density) become bar charts with the reference curve overlaid; all
other tables become line charts of the remaining columns against the first.
matplotlib is imported lazily so the core package carries no rendering
dependency.
"""

from __future__ import annotations

import csv
from pathlib import Path

__all__ = ["emit_plots_for"]


def _require_pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError(
            "plot emission needs matplotlib; install the 'plots' extra"
        ) from exc
    matplotlib.use("Agg", force=True)
    matplotlib.rcParams["svg.hashsalt"] = "mblq"
    import matplotlib.pyplot as plt
    return plt


def _read_table(path: Path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        columns: list[list[float]] = [[] for _ in header]
        for row in reader:
            for col, value in zip(columns, row):
                col.append(float(value))
    return header, columns


def emit_plots_for(out: Path, files) -> list[Path]:
    """Render an SVG for every CSV in files; returns the paths written."""
    plt = _require_pyplot()
    written: list[Path] = []
    for path in files:
        path = Path(path)
        if path.suffix != ".csv":
            continue
        header, columns = _read_table(path)
        if not columns or not columns[0]:
            continue
        fig, ax = plt.subplots(figsize=(4.2, 3.0), constrained_layout=True)
        if header[0].startswith("bin_center"):
            centers, density, reference = columns[0], columns[1], columns[2]
            width = centers[1] - centers[0] if len(centers) > 1 else 1.0
            ax.bar(centers, density, width=width, alpha=0.6, label="measured")
            ax.plot(centers, reference, "k-", lw=1.2, label="reference")
            ax.legend(frameon=False, fontsize=8)
        else:
            for name, col in zip(header[1:], columns[1:]):
                ax.plot(columns[0], col, lw=1.2, label=name.split(" (")[0])
            if len(columns) > 2:
                ax.legend(frameon=False, fontsize=8)
        ax.set_xlabel(header[0])
        ax.set_ylabel(header[1])
        svg = path.with_suffix(".svg")
        fig.savefig(svg, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(svg)
    return written
