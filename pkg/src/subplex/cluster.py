"""Partitioning instances in explanation space: seeded k-means, the Partition
type the rest of the system passes around, per-group medoids, outlier scoring,
and the two editing moves (carve a selection out as a new group, dissolve one).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Selection
from .errors import RangeError, ValidationError
from .kernels import knn_mean_distance, medoid_index, pairwise_sq_dists

__all__ = [
    "ClusterConfig",
    "Group",
    "KMeansResult",
    "Partition",
    "add_subpopulation",
    "flag_outliers",
    "kmeans",
    "kmeans_lloyd",
    "medoid",
    "outlier_scores",
    "partition_from_labels",
    "remove_subpopulation",
]


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    max_iter: int = 300
    tol: float = 1e-4
    seed: int = 42

    def __post_init__(self):
        if self.k < 1:
            raise RangeError("k must be >= 1")
        if self.max_iter < 1:
            raise RangeError("max_iter must be >= 1")
        if self.tol <= 0:
            raise RangeError("tol must be > 0")


@dataclass(frozen=True)
class Group:
    """One subpopulation: contiguous id, member count, and the member whose
    summed distance to the rest of the group is lowest (its medoid)."""

    group_id: int
    size: int
    medoid: int


@dataclass(frozen=True)
class Partition:
    """A full assignment of every instance to exactly one group.

    ``labels`` holds values 0..k-1 with no gaps; ``groups`` is ordered by id.
    ``provenance`` is "algorithmic" until a user edit touches the partition.
    """

    labels: np.ndarray
    groups: tuple[Group, ...]
    provenance: str = "algorithmic"

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        if self.provenance not in ("algorithmic", "user_edited"):
            raise ValidationError(f"unknown provenance {self.provenance!r}")

    @property
    def k(self) -> int:
        return len(self.groups)

    def members(self, group_id: int) -> np.ndarray:
        if group_id < 0 or group_id >= self.k:
            raise RangeError(f"group {group_id} not in [0, {self.k})")
        return np.flatnonzero(self.labels == group_id)

    def to_json_dict(self) -> dict:
        return {
            "labels": self.labels.tolist(),
            "groups": [
                {"group_id": g.group_id, "size": g.size, "medoid": g.medoid} for g in self.groups
            ],
            "provenance": self.provenance,
        }


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int


def _seed_centroids(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # kmeans++: successive centers drawn proportionally to squared distance
    # from the nearest center already chosen
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    d2 = pairwise_sq_dists(data, centers[0:1]).ravel()
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centers[j] = data[pick]
        d2 = np.minimum(d2, pairwise_sq_dists(data, centers[j : j + 1]).ravel())
    return centers


def kmeans_lloyd(data: np.ndarray, config: ClusterConfig) -> KMeansResult:
    """Lloyd iterations from a kmeans++ seeding.

    Stops at max_iter or when the relative inertia drop falls below tol.
    Empty clusters are re-seeded at the point currently farthest from its
    assigned centroid. A final assignment pass guarantees the returned labels
    put every point with its nearest returned centroid.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValidationError("kmeans input must be 2-D")
    n = data.shape[0]
    if config.k > n:
        raise RangeError(f"k={config.k} exceeds {n} points")

    rng = np.random.default_rng(config.seed)
    centers = _seed_centroids(data, config.k, rng)
    prev_inertia = np.inf
    n_iter = 0
    for n_iter in range(1, config.max_iter + 1):
        d2 = pairwise_sq_dists(data, centers)
        labels = np.argmin(d2, axis=1)
        point_costs = d2[np.arange(n), labels]

        counts = np.bincount(labels, minlength=config.k)
        for j in np.flatnonzero(counts == 0):
            far = int(np.argmax(point_costs))
            centers[j] = data[far]
            labels[far] = j
            point_costs[far] = 0.0
            counts = np.bincount(labels, minlength=config.k)

        inertia = float(point_costs.sum())
        for j in range(config.k):
            if counts[j] > 0:
                centers[j] = data[labels == j].mean(axis=0)
        if np.isfinite(prev_inertia) and prev_inertia - inertia <= config.tol * max(
            prev_inertia, 1e-300
        ):
            break
        prev_inertia = inertia

    d2 = pairwise_sq_dists(data, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return KMeansResult(labels=labels, centroids=centers, inertia=inertia, n_iter=n_iter)


def kmeans(data: np.ndarray, config: ClusterConfig) -> Partition:
    """Cluster and package as a Partition with per-group medoids."""
    result = kmeans_lloyd(data, config)
    return partition_from_labels(data, result.labels, provenance="algorithmic")


def partition_from_labels(
    data: np.ndarray, labels: np.ndarray, provenance: str = "algorithmic"
) -> Partition:
    """Compact arbitrary labels to 0..k-1 (ascending original order) and
    compute each group's medoid in ``data`` space."""
    data = np.asarray(data, dtype=np.float64)
    labels = np.asarray(labels).ravel()
    if labels.shape[0] != data.shape[0]:
        raise ValidationError("labels must cover every data row")
    uniq, compact = np.unique(labels, return_inverse=True)
    groups = []
    for gid in range(len(uniq)):
        member_rows = np.flatnonzero(compact == gid)
        local = medoid_index(data[member_rows])
        groups.append(Group(group_id=gid, size=int(member_rows.size), medoid=int(member_rows[local])))
    return Partition(labels=compact.astype(np.int64), groups=tuple(groups), provenance=provenance)


def medoid(data: np.ndarray, members) -> int:
    """Member index minimizing summed Euclidean distance to the other members.

    Ties resolve to the smallest index.
    """
    members = np.sort(np.asarray(list(members), dtype=np.int64))  # ties -> smallest index
    if members.size == 0:
        raise ValidationError("medoid of an empty member list")
    data = np.asarray(data, dtype=np.float64)
    return int(members[medoid_index(data[members])])


def outlier_scores(data: np.ndarray, k_neighbors: int) -> np.ndarray:
    """Mean distance to the k nearest neighbors; high scores mean isolated."""
    return knn_mean_distance(data, k_neighbors)


def flag_outliers(scores: np.ndarray, percentile: float = 98.0) -> Selection:
    """Indices scoring strictly above the given percentile.

    Strictness keeps all-identical scores (threshold = max) from flagging
    anything, and percentile 100 always yields an empty selection.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if not (0.0 <= percentile <= 100.0):
        raise RangeError("percentile must be in [0, 100]")
    threshold = np.percentile(scores, percentile)
    return Selection.from_iterable(np.flatnonzero(scores > threshold), scores.size)


def add_subpopulation(partition: Partition, sel: Selection, data: np.ndarray) -> Partition:
    """Carve the selected instances out into a brand-new group.

    Existing groups shrink accordingly; any group emptied by the move
    disappears and ids re-compact. Medoids are recomputed in ``data`` space.
    """
    if len(sel) == 0:
        raise ValidationError("cannot create an empty subpopulation")
    n = partition.labels.shape[0]
    idx = sel.as_array()
    if idx.max() >= n or idx.min() < 0:
        raise RangeError("selection index outside partition")
    labels = partition.labels.copy()
    labels[idx] = labels.max() + 1
    return partition_from_labels(data, labels, provenance="user_edited")


def remove_subpopulation(partition: Partition, group_id: int, data: np.ndarray) -> Partition:
    """Dissolve a group: its members move to the nearest remaining medoid
    (by Euclidean distance in ``data`` space), then ids re-compact."""
    if group_id < 0 or group_id >= partition.k:
        raise ValidationError(f"no group {group_id} in this partition (k={partition.k})")
    if partition.k < 2:
        raise ValidationError("cannot remove the only group")
    orphans = partition.members(group_id)
    keep = [g for g in partition.groups if g.group_id != group_id]
    medoid_rows = np.asarray([data[g.medoid] for g in keep])
    nearest = np.argmin(pairwise_sq_dists(data[orphans], medoid_rows), axis=1)
    labels = partition.labels.copy()
    labels[orphans] = np.asarray([keep[j].group_id for j in nearest])
    return partition_from_labels(data, labels, provenance="user_edited")
