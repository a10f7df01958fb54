"""Figure rendering for comparison reports.

Renders the same distributions that the delimited plot-data files carry,
so the PNGs are a convenience view and the CSVs remain the canonical
output. Uses the non-interactive backend; nothing here opens a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluate import METHODS, ComparisonSummary

_METHOD_COLORS = {"interva": "#d95f02", "insilicova": "#1b9e77"}
_METHOD_TITLES = {"interva": "InterVA", "insilicova": "InSilicoVA"}

plt.rcParams.update({
    "figure.figsize": (8.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
})


def _hist_panel(ax, summary: ComparisonSummary, metric: str, xlabel: str) -> None:
    hist = summary.accuracy_hist if metric == "accuracy" else summary.tv_hist
    edges = hist.bin_edges
    width = (edges[1] - edges[0]) * 0.45
    for i, method in enumerate(METHODS):
        ax.bar(
            edges[:-1] + i * width,
            hist.counts[method],
            width=width,
            align="edge",
            label=_METHOD_TITLES[method],
            color=_METHOD_COLORS[method],
            alpha=0.85,
        )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("replicates")
    ax.legend()


def render_comparison_figures(summary: ComparisonSummary, out_dir: str | Path) -> list[Path]:
    """Write histogram and box-plot PNGs for one comparison run.

    Returns the created file paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []

    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.0))
    _hist_panel(axes[0], summary, "accuracy", "individual accuracy")
    _hist_panel(axes[1], summary, "tv", "CSMF total-variation error")
    fig.suptitle(f"Scenario: {summary.scenario}")
    fig.tight_layout()
    path = out_dir / "metrics_hist.png"
    fig.savefig(path)
    plt.close(fig)
    created.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.0))
    for ax, metric, label in (
        (axes[0], "accuracy", "individual accuracy"),
        (axes[1], "tv", "CSMF total-variation error"),
    ):
        data = [summary.values(m, metric) for m in METHODS]
        ax.boxplot(data, tick_labels=[_METHOD_TITLES[m] for m in METHODS])
        ax.set_ylabel(label)
    fig.suptitle(f"Scenario: {summary.scenario}")
    fig.tight_layout()
    path = out_dir / "metrics_box.png"
    fig.savefig(path)
    plt.close(fig)
    created.append(path)

    return created
