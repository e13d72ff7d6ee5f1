"""Plot-data emission: delimited scatter/histogram tables plus rendered
figures (annotated correlation heatmap as SVG, pairplot as PNG).

Output is deterministic for fixed input: the SVG is stripped of its date
metadata and rendered with a fixed hash salt, and histogram binning uses
the Sturges rule unless overridden.
"""

from __future__ import annotations

import math
from itertools import combinations
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import ObjectiveSpec, default_objective_spec, pareto_front, pearson_matrix
from .dataset import ResultTable, _open_writer
from .errors import EmptyInput, InsufficientData
from .loadcases import VALIDITY_VALID

_SVG_SALT = "bikeframe"
_VALID_COLOR = "#2c7fb8"
_INVALID_COLOR = "#d95f02"
_FRONT_COLOR = "#111111"


def sturges_bins(n: int) -> int:
    """Sturges rule bin count; at least one bin."""
    if n < 1:
        return 1
    return int(math.ceil(math.log2(n))) + 1


def _scatter_data(results: ResultTable, spec: ObjectiveSpec, front: set[str]):
    ids, X = spec.matrix(results)
    validity = {r: v for r, v in zip(results.ids, results.validity)}
    return ids, X, [validity[r] for r in ids], [r in front for r in ids]


def emit_plots(
    results: ResultTable,
    spec: ObjectiveSpec | None = None,
    out_dir=".",
    bins: int | None = None,
) -> list[Path]:
    """Write all plot products for a result table into out_dir.

    For k objectives this produces C(k,2) scatter-pair files, k histogram
    files, one annotated correlation heatmap (SVG), and one pairplot
    figure (PNG). Returns the written paths.
    """
    spec = spec or default_objective_spec()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        front = pareto_front(results, spec)
    except EmptyInput:
        front = set()
    ids, X, validity, on_front = _scatter_data(results, spec, front)
    labels = spec.labels
    written: list[Path] = []

    for i, j in combinations(range(len(labels)), 2):
        path = out / f"scatter_{labels[i]}__{labels[j]}.csv"
        handle, writer = _open_writer(path)
        with handle:
            writer.writerow(("row_id", labels[i], labels[j], "validity", "pareto"))
            for k, row_id in enumerate(ids):
                writer.writerow(
                    (row_id, repr(float(X[k, i])), repr(float(X[k, j])), validity[k], int(on_front[k]))
                )
        written.append(path)

    n_bins = bins if bins is not None else sturges_bins(len(ids))
    histograms = {}
    for j, label in enumerate(labels):
        path = out / f"hist_{label}.csv"
        column = X[:, j] if len(ids) else np.array([])
        if column.size:
            counts, edges = np.histogram(column, bins=n_bins)
        else:
            counts, edges = np.array([], dtype=int), np.array([0.0])
        histograms[label] = (counts, edges)
        handle, writer = _open_writer(path)
        with handle:
            writer.writerow(("bin_left", "bin_right", "count"))
            for k, count in enumerate(counts):
                writer.writerow((repr(float(edges[k])), repr(float(edges[k + 1])), int(count)))
        written.append(path)

    written.append(_render_heatmap(results, spec, out / "correlation_heatmap.svg"))
    written.append(_render_pairplot(ids, X, validity, on_front, labels, out / "pairplot.png"))
    return written


def _render_heatmap(results: ResultTable, spec: ObjectiveSpec, path: Path) -> Path:
    labels = spec.labels
    k = len(labels)
    try:
        corr = pearson_matrix(results, spec)
    except InsufficientData:
        corr = np.full((k, k), math.nan)

    fig, ax = plt.subplots(figsize=(1.2 * k + 2.0, 1.2 * k + 1.0))
    image = ax.imshow(np.nan_to_num(corr), cmap="RdBu_r", vmin=-1.0, vmax=1.0)
    ax.set_xticks(range(k))
    ax.set_yticks(range(k))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticklabels(labels, fontsize=8)
    for i in range(k):
        for j in range(k):
            text = "" if math.isnan(corr[i, j]) else f"{corr[i, j]:.2f}"
            ax.text(j, i, text, ha="center", va="center", fontsize=8)
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("objective correlations (Pearson)")
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": _SVG_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _render_pairplot(ids, X, validity, on_front, labels, path: Path) -> Path:
    k = len(labels)
    valid_mask = np.array([v == VALIDITY_VALID for v in validity], dtype=bool)
    front_mask = np.array(on_front, dtype=bool)

    fig, axes = plt.subplots(k, k, figsize=(2.2 * k, 2.2 * k))
    axes = np.atleast_2d(axes)
    for i in range(k):
        for j in range(k):
            ax = axes[i, j]
            if not len(ids):
                ax.set_axis_off()
                continue
            if i == j:
                ax.hist(
                    [X[valid_mask, i], X[~valid_mask, i]],
                    bins=sturges_bins(len(ids)),
                    stacked=True,
                    color=[_VALID_COLOR, _INVALID_COLOR],
                )
            else:
                ax.scatter(X[~valid_mask, j], X[~valid_mask, i], s=4, c=_INVALID_COLOR, linewidths=0)
                ax.scatter(X[valid_mask, j], X[valid_mask, i], s=4, c=_VALID_COLOR, linewidths=0)
                ax.scatter(
                    X[front_mask, j], X[front_mask, i], s=10, facecolors="none",
                    edgecolors=_FRONT_COLOR, linewidths=0.6,
                )
            if i == k - 1:
                ax.set_xlabel(labels[j], fontsize=7)
            if j == 0:
                ax.set_ylabel(labels[i], fontsize=7)
            ax.tick_params(labelsize=6)
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=110)
    plt.close(fig)
    return path
