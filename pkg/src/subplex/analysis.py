"""Per-subpopulation feature statistics: mean-attribution rankings, the
distribution-deviation ranking built on pairwise earth mover's distances,
selection split statistics, and the low-attribution diagnostic.

Partition edits live in ``cluster``; they are re-exported here because the
editing workflow and the statistics are used together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import Partition, add_subpopulation, remove_subpopulation
from .data import AttributionMatrix, Selection
from .errors import RangeError, ValidationError
from .kernels import Histogram, emd_1d, histogram

__all__ = [
    "FeatureRanking",
    "GroupSplit",
    "SelectionSplitStats",
    "add_subpopulation",
    "feature_histograms",
    "low_attribution_instances",
    "rank_features_by_deviation",
    "rank_features_by_group_mean",
    "remove_subpopulation",
    "selection_split_stats",
]

DEFAULT_BINS = 20


@dataclass(frozen=True)
class FeatureRanking:
    """Features ordered by descending score; ties fall back to ascending
    feature index. ``scores`` is indexed by feature, not by rank."""

    basis: str
    order: tuple[int, ...]
    scores: np.ndarray
    group_id: int | None = None

    def to_json_dict(self) -> dict:
        out = {
            "basis": self.basis,
            "order": [int(i) for i in self.order],
            "scores": [float(s) for s in self.scores],
        }
        if self.group_id is not None:
            out["group_id"] = int(self.group_id)
        return out


def _descending_order(scores: np.ndarray) -> tuple[int, ...]:
    # stable sort on negated scores = descending score, ascending index on ties
    return tuple(int(i) for i in np.argsort(-scores, kind="stable"))


def rank_features_by_group_mean(
    matrix: AttributionMatrix, part: Partition, group_id: int
) -> FeatureRanking:
    """Rank features by their mean attribution over one group's members."""
    if group_id < 0 or group_id >= part.k:
        raise ValidationError(f"unknown group {group_id}")
    members = part.members(group_id)
    if members.size == 0:
        raise ValidationError(f"group {group_id} is empty")
    scores = matrix.values[members].mean(axis=0)
    return FeatureRanking(
        basis="group_mean", order=_descending_order(scores), scores=scores, group_id=group_id
    )


def _feature_range(column: np.ndarray) -> tuple[float, float]:
    return float(column.min()), float(column.max())


def rank_features_by_deviation(
    matrix: AttributionMatrix, part: Partition, bins: int = DEFAULT_BINS
) -> FeatureRanking:
    """Rank features by how much their distribution differs across groups.

    Per feature: one histogram per group on shared dataset-wide edges, each
    normalized by its own group size; the score is the sum of earth mover's
    distances over all unordered group pairs. A feature constant over the
    whole dataset scores 0.
    """
    if part.k < 2:
        raise ValidationError("deviation ranking needs at least 2 groups")
    if bins < 1:
        raise RangeError("bins must be >= 1")
    member_lists = [part.members(g.group_id) for g in part.groups]
    scores = np.zeros(matrix.m)
    for f in range(matrix.m):
        column = matrix.values[:, f]
        lo, hi = _feature_range(column)
        if lo == hi:
            continue
        hists = [
            histogram(column[members], lo, hi, bins, total_weight=members.size)
            for members in member_lists
        ]
        total = 0.0
        for i in range(len(hists)):
            for j in range(i + 1, len(hists)):
                total += emd_1d(hists[i], hists[j])
        scores[f] = total
    return FeatureRanking(basis="deviation_emd", order=_descending_order(scores), scores=scores)


def feature_histograms(
    matrix: AttributionMatrix, part: Partition, bins: int = DEFAULT_BINS
) -> list[dict]:
    """Per feature: shared bin edges plus one group-size-normalized mass
    vector per group, the payload the superposed histogram column renders."""
    if bins < 1:
        raise RangeError("bins must be >= 1")
    out = []
    for f in range(matrix.m):
        column = matrix.values[:, f]
        lo, hi = _feature_range(column)
        entry = {"feature": matrix.feature_names[f], "groups": {}}
        if lo == hi:
            # degenerate support: single bin holding all mass
            entry["bin_edges"] = [lo, hi]
            for g in part.groups:
                entry["groups"][str(g.group_id)] = [1.0]
            out.append(entry)
            continue
        edges: Histogram | None = None
        for g in part.groups:
            members = part.members(g.group_id)
            h = histogram(column[members], lo, hi, bins, total_weight=members.size)
            entry["groups"][str(g.group_id)] = [float(v) for v in h.mass]
            edges = h
        entry["bin_edges"] = [float(e) for e in edges.bin_edges]
        out.append(entry)
    return out


@dataclass(frozen=True)
class GroupSplit:
    group_id: int
    selected_count: int
    unselected_count: int
    selected_mean: np.ndarray
    unselected_mean: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "group_id": int(self.group_id),
            "selected_count": int(self.selected_count),
            "unselected_count": int(self.unselected_count),
            "selected_mean": [float(v) for v in self.selected_mean],
            "unselected_mean": [float(v) for v in self.unselected_mean],
        }


@dataclass(frozen=True)
class SelectionSplitStats:
    groups: tuple[GroupSplit, ...]

    def to_json_dict(self) -> dict:
        return {"groups": [g.to_json_dict() for g in self.groups]}


def selection_split_stats(
    matrix: AttributionMatrix, part: Partition, sel: Selection
) -> SelectionSplitStats:
    """Split every group into its selected and unselected sides and report the
    count and per-feature mean of each; an empty side is count 0, zero means."""
    if part.labels.shape[0] != matrix.n:
        raise ValidationError("partition does not cover this matrix")
    selected = np.zeros(matrix.n, dtype=bool)
    selected[sel.as_array()] = True

    splits = []
    for g in part.groups:
        in_group = part.labels == g.group_id
        sel_mask = in_group & selected
        unsel_mask = in_group & ~selected
        sel_count, unsel_count = int(sel_mask.sum()), int(unsel_mask.sum())
        sel_mean = matrix.values[sel_mask].mean(axis=0) if sel_count else np.zeros(matrix.m)
        unsel_mean = matrix.values[unsel_mask].mean(axis=0) if unsel_count else np.zeros(matrix.m)
        splits.append(
            GroupSplit(
                group_id=g.group_id,
                selected_count=sel_count,
                unselected_count=unsel_count,
                selected_mean=sel_mean,
                unselected_mean=unsel_mean,
            )
        )
    return SelectionSplitStats(groups=tuple(splits))


def low_attribution_instances(matrix: AttributionMatrix, fraction: float = 0.01) -> Selection:
    """Instances whose mean |attribution| falls below fraction * max |value|;
    the cleanup target when explanations carry no signal at all."""
    if fraction < 0:
        raise RangeError("fraction must be >= 0")
    magnitudes = np.abs(matrix.values)
    threshold = fraction * magnitudes.max()
    mean_abs = magnitudes.mean(axis=1)
    return Selection.from_iterable(np.flatnonzero(mean_abs < threshold), matrix.n)
