"""End-to-end orchestration: reduce, cluster, flag outliers, project, rank.

This is the composition layer the CLI and the HTTP service share. Artifacts
serialize deterministically (no timings inside), so identical inputs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields

import numpy as np

from .analysis import (
    FeatureRanking,
    rank_features_by_deviation,
    rank_features_by_group_mean,
)
from .cluster import (
    ClusterConfig,
    Partition,
    flag_outliers,
    kmeans_lloyd,
    outlier_scores,
    partition_from_labels,
)
from .data import AttributionMatrix, Selection
from .errors import RangeError, ValidationError
from .kernels import ReducedMatrix, pca_fit_transform
from .projection import ProjectionConfig, ProjectionLayout, project

__all__ = [
    "PipelineConfig",
    "PipelineResult",
    "layout_to_json",
    "rankings_to_json",
    "run_pipeline",
]


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the full run; one seed drives reduction, clustering,
    and projection so a run is reproducible from this object alone."""

    k: int = 5
    n_components: int = 10
    seed: int = 42
    bins: int = 20
    max_iter: int = 300
    tol: float = 1e-4
    restarts: int = 3
    controls_per_cluster: int | None = None
    inner_shrink: float = 0.7
    same_class_boost: float = 1.3
    epsilon: float = 1e-9
    outlier_neighbors: int = 10
    outlier_percentile: float = 98.0

    def __post_init__(self):
        if self.n_components < 1:
            raise RangeError("n_components must be >= 1")
        if self.bins < 1:
            raise RangeError("bins must be >= 1")
        if self.restarts < 1:
            raise RangeError("restarts must be >= 1")
        if self.outlier_neighbors < 1:
            raise RangeError("outlier_neighbors must be >= 1")
        if not (0.0 <= self.outlier_percentile <= 100.0):
            raise RangeError("outlier_percentile must be in [0, 100]")
        # delegate the remaining checks to the component configs
        self.cluster_config()
        self.projection_config()

    @classmethod
    def from_json_dict(cls, payload: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ValidationError(f"unknown pipeline config keys: {sorted(unknown)}")
        return cls(**payload)

    def to_json_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def cluster_config(self, seed: int | None = None) -> ClusterConfig:
        return ClusterConfig(
            k=self.k, max_iter=self.max_iter, tol=self.tol,
            seed=self.seed if seed is None else seed,
        )

    def projection_config(self) -> ProjectionConfig:
        return ProjectionConfig(
            controls_per_cluster=self.controls_per_cluster,
            inner_shrink=self.inner_shrink,
            same_class_boost=self.same_class_boost,
            epsilon=self.epsilon,
            seed=self.seed,
        )


@dataclass
class PipelineResult:
    matrix: AttributionMatrix
    config: PipelineConfig
    reduced: ReducedMatrix
    partition: Partition
    layout: ProjectionLayout
    mean_rankings: dict[int, FeatureRanking]
    deviation_ranking: FeatureRanking | None
    outliers: Selection
    timings_ms: dict[str, float] = field(default_factory=dict)


def cluster_reduced(reduced_values: np.ndarray, cfg: PipelineConfig) -> Partition:
    """Best-of-``restarts`` k-means (lowest inertia wins), as a Partition.

    Restart seeds derive from cfg.seed, so the whole bundle stays
    deterministic.
    """
    best = None
    for r in range(cfg.restarts):
        result = kmeans_lloyd(reduced_values, cfg.cluster_config(seed=cfg.seed + 7919 * r))
        if best is None or result.inertia < best.inertia:
            best = result
    return partition_from_labels(reduced_values, best.labels, provenance="algorithmic")


def compute_outliers(reduced_values: np.ndarray, cfg: PipelineConfig) -> Selection:
    n = reduced_values.shape[0]
    k = min(cfg.outlier_neighbors, n - 1)
    if k < 1:
        return Selection(())
    return flag_outliers(outlier_scores(reduced_values, k), cfg.outlier_percentile)


def project_and_rank(
    matrix: AttributionMatrix,
    reduced: ReducedMatrix,
    partition: Partition,
    cfg: PipelineConfig,
    outliers: Selection,
) -> tuple[ProjectionLayout, dict[int, FeatureRanking], FeatureRanking | None]:
    """The partition-dependent tail of the pipeline; rerun after every edit."""
    flags = np.zeros(matrix.n, dtype=bool)
    flags[outliers.as_array()] = True
    layout = project(reduced.values, partition, cfg.projection_config(), outlier_flags=flags)
    mean_rankings = {
        g.group_id: rank_features_by_group_mean(matrix, partition, g.group_id)
        for g in partition.groups
    }
    deviation = (
        rank_features_by_deviation(matrix, partition, bins=cfg.bins) if partition.k >= 2 else None
    )
    return layout, mean_rankings, deviation


def run_pipeline(matrix: AttributionMatrix, cfg: PipelineConfig | None = None) -> PipelineResult:
    """Reduce -> cluster -> outliers -> project -> rank, with stage timings.

    The requested component count is capped at min(n, m); clustering,
    medoids, outlier scores, and the projection all run in the reduced space,
    while rankings always consume the original attribution values.
    """
    cfg = cfg or PipelineConfig()
    if cfg.k > matrix.n:
        raise RangeError(f"k={cfg.k} exceeds {matrix.n} instances")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    p = min(cfg.n_components, matrix.n, matrix.m)
    reduced = pca_fit_transform(matrix.values, p, seed=cfg.seed)
    timings["reduce"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    partition = cluster_reduced(reduced.values, cfg)
    timings["cluster"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    outliers = compute_outliers(reduced.values, cfg)
    timings["outliers"] = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    layout, mean_rankings, deviation = project_and_rank(matrix, reduced, partition, cfg, outliers)
    timings["project_rank"] = (time.perf_counter() - t0) * 1000.0

    return PipelineResult(
        matrix=matrix,
        config=cfg,
        reduced=reduced,
        partition=partition,
        layout=layout,
        mean_rankings=mean_rankings,
        deviation_ranking=deviation,
        outliers=outliers,
        timings_ms=timings,
    )


def layout_to_json(matrix: AttributionMatrix, partition: Partition, layout: ProjectionLayout) -> dict:
    """The scatterplot payload: one point per instance, the medoid marks,
    and the control scaffold."""
    points = [
        {
            "id": matrix.instance_ids[i],
            "x": float(layout.coords[i, 0]),
            "y": float(layout.coords[i, 1]),
            "group": int(partition.labels[i]),
            "outlier": bool(layout.outlier_flags[i]),
        }
        for i in range(matrix.n)
    ]
    medoids = [
        {
            "group": g.group_id,
            "id": matrix.instance_ids[g.medoid],
            "x": float(layout.medoid_coords[j, 0]),
            "y": float(layout.medoid_coords[j, 1]),
        }
        for j, g in enumerate(partition.groups)
    ]
    controls = [
        {
            "index": int(idx),
            "x": float(layout.control_coords[j, 0]),
            "y": float(layout.control_coords[j, 1]),
        }
        for j, idx in enumerate(layout.control_indices)
    ]
    return {"points": points, "medoids": medoids, "controls": controls}


def rankings_to_json(
    mean_rankings: dict[int, FeatureRanking],
    deviation: FeatureRanking | None,
    feature_names,
    bins: int,
) -> dict:
    return {
        "feature_names": list(feature_names),
        "bins": bins,
        "mean": {str(gid): r.to_json_dict() for gid, r in sorted(mean_rankings.items())},
        "deviation": deviation.to_json_dict() if deviation is not None else None,
    }
