"""Figure rendering for benchmark summaries.

Draws the fairness-versus-balanced-accuracy scatter per metric: one point
per split and phase, a reference line at the metric's ideal value, and the
mean of each phase marked. Files are written next to the delimited reports,
named by the config digest. Uses the Agg backend so rendering works without
a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import SummaryTable
from .errors import ArgumentError
from .metrics import METRIC_INFO

__all__ = ["render_benchmark_figures"]


def render_benchmark_figures(summary: SummaryTable, directory) -> list[Path]:
    """One PNG per metric; returns the written paths in metric order."""
    if not summary.runs:
        raise ArgumentError("no successful splits to plot")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digest = summary.config.digest()
    dataset = summary.config.dataset or summary.config.data_file
    paths = []
    for name in summary.config.metrics:
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        x_before = [r.balanced_accuracy_before for r in summary.runs]
        y_before = [r.metrics_before[name] for r in summary.runs]
        ax.scatter(x_before, y_before, s=22, alpha=0.7, label="before", color="#c44e52")
        if summary.has_after:
            x_after = [r.balanced_accuracy_after for r in summary.runs]
            y_after = [r.metrics_after[name] for r in summary.runs]
            ax.scatter(
                x_after, y_after, s=22, alpha=0.7, marker="^",
                label=f"after {summary.config.algorithm}", color="#4c72b0",
            )
        ideal = METRIC_INFO[name].ideal
        if ideal is not None:
            ax.axhline(ideal, linewidth=1.0, linestyle="--", color="#555555")
        ax.set_xlabel("balanced accuracy")
        ax.set_ylabel(name)
        ax.set_title(f"{dataset}: {name}")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = directory / f"bench_{digest}_{name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
