"""SVG renderings of the diagnostic and elicitation outputs.

Figures are written through the Agg backend with a fixed hash salt and
no embedded creation date, so repeated runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "decisionprior"

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import CalibrationTable, DiagnosticsReport


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def calibration_svg(table: CalibrationTable, path) -> None:
    occupied = [b for b in table.bins if b.count > 0]
    xs = [b.mean_predicted for b in occupied]
    ys = [b.observed_positive for b in occupied]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", label="ideal")
    ax.plot(xs, ys, marker="o", color="tab:blue", label="model")
    ax.set_xlabel("Mean predicted probability")
    ax.set_ylabel("Observed positive fraction")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title("Calibration")
    ax.legend()
    _save(fig, path)


def entropy_histograms_svg(report: DiagnosticsReport, path) -> None:
    panels = [
        ("All predictions", report.entropy_all),
        ("Correct predictions", report.entropy_correct),
        ("Incorrect predictions", report.entropy_incorrect),
    ]
    bins = len(report.entropy_all)
    edges = np.arange(bins) / bins
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5), sharey=True)
    for ax, (title, counts) in zip(axes, panels):
        ax.bar(edges, counts, width=1.0 / bins, align="edge", color="tab:blue")
        ax.set_title(title)
        ax.set_xlabel("Entropy")
        ax.set_xlim(0, 1)
    axes[0].set_ylabel("Cases")
    fig.tight_layout()
    _save(fig, path)


def density_svg(columns: dict[str, np.ndarray], path, title: str = "") -> None:
    """Line plot of density columns against the shared x column."""
    fig, ax = plt.subplots(figsize=(6, 4))
    x = columns["x"]
    for name, values in columns.items():
        if name == "x":
            continue
        ax.plot(x, values, label=name)
    ax.set_xlabel("Probability of the event")
    ax.set_ylabel("Density")
    ax.set_xlim(0, 1)
    if title:
        ax.set_title(title)
    if len(columns) > 2:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
