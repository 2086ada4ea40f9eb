"""Matplotlib renderings of layouts and benchmark reports.

Each helper draws onto a fresh Figure and writes straight to a file, so
everything works headless and nothing touches global pyplot state. PNG
metadata is stripped for reproducible bytes across reruns.
"""

from __future__ import annotations

import numpy as np
from matplotlib import colormaps
from matplotlib.figure import Figure

from .cluster import Partition
from .projection import ProjectionLayout

# keep reruns byte-identical: drop the default Software/version stamp
_PNG_META = {"Software": None}


def _group_color(group_id: int):
    return colormaps["tab10"](group_id % 10)


def save_layout_figure(layout: ProjectionLayout, part: Partition, path, title: str | None = None) -> None:
    """Scatter of the 2-D layout: one color per group, medoids as black-edged
    squares, flagged outliers ringed."""
    fig = Figure(figsize=(7.0, 6.0))
    ax = fig.add_subplot(111)
    coords = layout.coords
    for g in part.groups:
        mask = part.labels == g.group_id
        ax.scatter(
            coords[mask, 0],
            coords[mask, 1],
            s=18,
            color=_group_color(g.group_id),
            alpha=0.8,
            linewidths=0,
            label="group %d (%d)" % (g.group_id, g.size),
        )
    flagged = np.asarray(layout.outlier_flags, dtype=bool)
    if flagged.any():
        ax.scatter(
            coords[flagged, 0],
            coords[flagged, 1],
            s=70,
            facecolors="none",
            edgecolors="black",
            linewidths=0.9,
            label="outlier",
        )
    med = layout.medoid_coords
    if med.size:
        ax.scatter(
            med[:, 0],
            med[:, 1],
            s=60,
            marker="s",
            c=[_group_color(g.group_id) for g in part.groups],
            edgecolors="black",
            linewidths=1.2,
            label="medoid",
        )
    ax.set_xlabel("dim 1")
    ax.set_ylabel("dim 2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)


def save_noise_figure(report, path) -> None:
    """Rand index and runtime against the noise column count, one line per
    clustering pipeline."""
    fig = Figure(figsize=(9.0, 4.0))
    ax_rand, ax_time = fig.subplots(1, 2)
    for pipe, marker in (("raw", "o"), ("pca", "s")):
        rows = [r for r in report.rows if r["pipeline"] == pipe]
        xs = [r["noise_columns"] for r in rows]
        ax_rand.plot(xs, [r["rand_index"] for r in rows], marker=marker, label=pipe)
        ax_time.plot(xs, [r["runtime_ms"] for r in rows], marker=marker, label=pipe)
    ax_rand.set_xlabel("noise columns")
    ax_rand.set_ylabel("Rand index")
    ax_rand.set_ylim(0.0, 1.05)
    ax_time.set_xlabel("noise columns")
    ax_time.set_ylabel("clustering runtime (ms)")
    for ax in (ax_rand, ax_time):
        ax.legend()
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)


def save_projection_figure(report, path) -> None:
    """Projection runtime against dataset size per method, with the layout
    silhouettes alongside."""
    fig = Figure(figsize=(9.0, 4.0))
    ax_time, ax_sil = fig.subplots(1, 2)
    for method, marker in (("lamp", "o"), ("mds", "s")):
        rows = [r for r in report.rows if r["method"] == method]
        xs = [r["n"] for r in rows]
        ax_time.plot(xs, [r["runtime_ms"] for r in rows], marker=marker, label=method)
        ax_sil.plot(xs, [r["silhouette"] for r in rows], marker=marker, label=method)
    ax_time.set_xlabel("instances")
    ax_time.set_ylabel("projection runtime (ms)")
    ax_time.set_yscale("log")
    ax_sil.set_xlabel("instances")
    ax_sil.set_ylabel("2-D silhouette")
    ax_sil.set_ylim(-1.0, 1.05)
    for ax in (ax_time, ax_sil):
        ax.legend()
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)


def save_report_figure(report, path) -> None:
    """Dispatch on the report kind."""
    if report.kind == "noise":
        save_noise_figure(report, path)
    elif report.kind == "projection":
        save_projection_figure(report, path)
    else:
        raise ValueError("no figure renderer for report kind %r" % report.kind)
