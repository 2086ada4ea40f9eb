"""Subpopulation analysis of black-box model explanations.

Cluster per-instance attribution vectors, project them to an interactive 2-D
layout, rank features per subpopulation, and refine the partition by hand -
from Python, from the command line, or over HTTP.
"""

from .analysis import (
    FeatureRanking,
    SelectionSplitStats,
    feature_histograms,
    low_attribution_instances,
    rank_features_by_deviation,
    rank_features_by_group_mean,
    selection_split_stats,
)
from .cluster import (
    ClusterConfig,
    Group,
    Partition,
    add_subpopulation,
    flag_outliers,
    kmeans,
    medoid,
    outlier_scores,
    partition_from_labels,
    remove_subpopulation,
)
from .data import (
    AttributionMatrix,
    GroupAggregate,
    IngestConfig,
    Selection,
    export_group_aggregates,
    export_selected_instances,
    load_attributions,
    load_attributions_json,
)
from .errors import ParseError, RangeError, SubplexError, ValidationError
from .kernels import (
    Histogram,
    ReducedMatrix,
    classical_mds,
    emd_1d,
    histogram,
    pca_fit_transform,
    rand_index,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .projection import ProjectionConfig, ProjectionLayout, project

__version__ = "0.1.0"

__all__ = [
    "AttributionMatrix",
    "ClusterConfig",
    "FeatureRanking",
    "Group",
    "GroupAggregate",
    "Histogram",
    "IngestConfig",
    "ParseError",
    "Partition",
    "PipelineConfig",
    "PipelineResult",
    "ProjectionConfig",
    "ProjectionLayout",
    "RangeError",
    "ReducedMatrix",
    "Selection",
    "SelectionSplitStats",
    "SubplexError",
    "ValidationError",
    "add_subpopulation",
    "classical_mds",
    "emd_1d",
    "export_group_aggregates",
    "export_selected_instances",
    "feature_histograms",
    "flag_outliers",
    "histogram",
    "kmeans",
    "load_attributions",
    "load_attributions_json",
    "low_attribution_instances",
    "medoid",
    "outlier_scores",
    "partition_from_labels",
    "pca_fit_transform",
    "project",
    "rand_index",
    "rank_features_by_deviation",
    "rank_features_by_group_mean",
    "remove_subpopulation",
    "run_pipeline",
    "selection_split_stats",
]
