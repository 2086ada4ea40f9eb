"""Class-aware 2-D projection.

Control points are drawn per group, laid out by classical MDS on distances
where same-group pairs are shrunk, and every instance is then mapped by a
local affine transform whose control weights favor the instance's own group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cluster import Partition
from .errors import RangeError, ValidationError
from .kernels import classical_mds, pairwise_sq_dists

__all__ = [
    "ProjectionConfig",
    "ProjectionLayout",
    "lamp_map",
    "project",
    "seed_control_layout",
    "select_control_points",
]

SNAP_DISTANCE = 1e-12  # below this, a point is "on" a control and snaps to it


@dataclass(frozen=True)
class ProjectionConfig:
    """Knobs for control selection and the affine mapping.

    ``controls_per_cluster=None`` scales the count with cluster size:
    max(5, ceil(sqrt(size))), capped at the size itself.
    """

    controls_per_cluster: int | None = None
    inner_shrink: float = 0.7
    same_class_boost: float = 1.3
    epsilon: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.controls_per_cluster is not None and self.controls_per_cluster < 1:
            raise RangeError("controls_per_cluster must be >= 1")
        if not (0.0 < self.inner_shrink <= 1.0):
            raise RangeError("inner_shrink must be in (0, 1]")
        if self.same_class_boost < 1.0:
            raise RangeError("same_class_boost must be >= 1")
        if self.epsilon <= 0.0:
            raise RangeError("epsilon must be > 0")


@dataclass(frozen=True)
class ProjectionLayout:
    """Everything the scatterplot needs: one 2-D point per instance, the
    control scaffold, per-group medoid positions, and outlier flags."""

    coords: np.ndarray
    control_indices: tuple[int, ...]
    control_coords: np.ndarray
    medoid_coords: np.ndarray
    outlier_flags: np.ndarray


def _group_control_count(size: int, cfg: ProjectionConfig) -> int:
    want = cfg.controls_per_cluster if cfg.controls_per_cluster is not None else max(
        5, math.ceil(math.sqrt(size))
    )
    return min(want, size)


def select_control_points(part: Partition, cfg: ProjectionConfig) -> list[int]:
    """Uniform sample without replacement from each group, one block per group
    in group-id order. Deterministic for a fixed seed."""
    rng = np.random.default_rng(cfg.seed)
    picked: list[int] = []
    for group in part.groups:
        members = part.members(group.group_id)
        count = _group_control_count(members.size, cfg)
        block = rng.choice(members, size=count, replace=False)
        picked.extend(int(i) for i in np.sort(block))
    return picked


def seed_control_layout(
    control_rows: np.ndarray, control_groups: np.ndarray, cfg: ProjectionConfig
) -> np.ndarray:
    """2-D scaffold for the controls: full pairwise Euclidean distances, with
    same-group distances multiplied by ``inner_shrink``, embedded by classical
    MDS. Shrinking pulls each cluster together before any point is mapped."""
    control_rows = np.asarray(control_rows, dtype=np.float64)
    control_groups = np.asarray(control_groups).ravel()
    if control_rows.shape[0] != control_groups.shape[0]:
        raise ValidationError("one group label per control row required")
    if control_rows.shape[0] == 0:
        raise ValidationError("no control points")
    d = np.sqrt(pairwise_sq_dists(control_rows, control_rows))
    same = control_groups[:, None] == control_groups[None, :]
    d = np.where(same, d * cfg.inner_shrink, d)
    np.fill_diagonal(d, 0.0)
    return classical_mds(d, dim=2)


def _fallback_transform(m: int) -> np.ndarray:
    # degenerate cross-covariance: keep the first two input axes, translation only
    return np.eye(m, 2)


def lamp_map(
    data: np.ndarray,
    control_indices,
    control_coords: np.ndarray,
    part: Partition,
    cfg: ProjectionConfig,
    outlier_flags: np.ndarray | None = None,
    chunk_hint: float = 4e6,
) -> ProjectionLayout:
    """Map every instance through its own weighted orthogonal-affine transform.

    Per point x: weight each control i by b_i / (||x - x_i||^2 + epsilon)
    (b_i = same_class_boost when the control shares x's group, else 1), take
    the weighted means of control inputs/outputs, and solve the weighted
    Procrustes problem via SVD of the cross-covariance. Points within
    SNAP_DISTANCE of a control snap exactly to that control's coordinate.
    """
    data = np.asarray(data, dtype=np.float64)
    control_indices = tuple(int(i) for i in control_indices)
    control_coords = np.asarray(control_coords, dtype=np.float64)
    if len(control_indices) == 0:
        raise ValidationError("no control points")
    if control_coords.shape != (len(control_indices), 2):
        raise ValidationError("one 2-D coordinate per control required")
    n, m = data.shape
    ctrl_rows = data[list(control_indices)]
    ctrl_groups = part.labels[list(control_indices)]

    coords = np.empty((n, 2))
    fallback = _fallback_transform(m)
    chunk = max(8, int(chunk_hint / max(1, len(control_indices) * m)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        x = data[start:stop]
        d2 = pairwise_sq_dists(x, ctrl_rows)
        boost = np.where(part.labels[start:stop, None] == ctrl_groups[None, :],
                         cfg.same_class_boost, 1.0)
        alpha = boost / (d2 + cfg.epsilon)
        wsum = alpha.sum(axis=1, keepdims=True)
        xt = (alpha @ ctrl_rows) / wsum
        yt = (alpha @ control_coords) / wsum
        sq = np.sqrt(alpha)[:, :, None]
        a = sq * (ctrl_rows[None, :, :] - xt[:, None, :])
        b = sq * (control_coords[None, :, :] - yt[:, None, :])
        cross = np.einsum("bcm,bct->bmt", a, b)
        u, s, vt = np.linalg.svd(cross, full_matrices=False)
        mat = u @ vt
        bad = s.max(axis=1) < 1e-12
        if np.any(bad):
            mat[bad] = fallback
        y = np.einsum("bm,bmt->bt", x - xt, mat) + yt

        # the fast distance expansion carries absolute noise ~eps * |x|^2, far
        # above the snap threshold, so rows that look close get their distances
        # to every control recomputed exactly before deciding
        scale2 = max(float(np.einsum("ij,ij->i", x, x).max(initial=0.0)),
                     float(np.einsum("ij,ij->i", ctrl_rows, ctrl_rows).max()))
        band = 1e-10 * max(1.0, scale2)
        maybe = np.flatnonzero(d2.min(axis=1) < band)
        for r in maybe:
            exact = ((ctrl_rows - x[r]) ** 2).sum(axis=1)
            i = int(np.argmin(exact))
            if exact[i] < SNAP_DISTANCE**2:
                y[r] = control_coords[i]
        coords[start:stop] = y

    medoid_coords = np.asarray([coords[g.medoid] for g in part.groups])
    if outlier_flags is None:
        outlier_flags = np.zeros(n, dtype=bool)
    else:
        outlier_flags = np.asarray(outlier_flags, dtype=bool)
        if outlier_flags.shape != (n,):
            raise ValidationError("one outlier flag per instance required")
    return ProjectionLayout(
        coords=coords,
        control_indices=control_indices,
        control_coords=control_coords,
        medoid_coords=medoid_coords,
        outlier_flags=outlier_flags,
    )


def project(
    data: np.ndarray,
    part: Partition,
    cfg: ProjectionConfig | None = None,
    outlier_flags: np.ndarray | None = None,
) -> ProjectionLayout:
    """Select controls, seed their scaffold, and map the full dataset."""
    cfg = cfg or ProjectionConfig()
    picked = select_control_points(part, cfg)
    scaffold = seed_control_layout(
        np.asarray(data, dtype=np.float64)[picked], part.labels[picked], cfg
    )
    return lamp_map(data, picked, scaffold, part, cfg, outlier_flags=outlier_flags)
