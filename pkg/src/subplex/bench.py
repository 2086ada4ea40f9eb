"""Synthetic laboratory and benchmark harness.

Builds the two-feature dataset whose two halves are governed by different
features, explains a rule black box with a perturbation surrogate, augments
attribution matrices with noise columns, and runs the two headline sweeps:
clustering robustness vs. noise (raw vs. PCA pipelines) and projection
runtime scaling (local affine mapping vs. full classical MDS).
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import silhouette_score

from .cluster import partition_from_labels
from .data import AttributionMatrix
from .errors import RangeError, ValidationError
from .kernels import classical_mds, pairwise_sq_dists, pca_fit_transform, rand_index
from .pipeline import PipelineConfig, cluster_reduced
from .projection import ProjectionConfig, lamp_map, seed_control_layout, select_control_points

__all__ = [
    "ExperimentReport",
    "SurrogateConfig",
    "SyntheticDataset",
    "SyntheticSpec",
    "add_noise_columns",
    "attribution_pattern_stats",
    "blackbox_predict",
    "gen_cluster_blobs",
    "gen_synthetic_dataset",
    "oracle_blackbox",
    "rule_blackbox",
    "run_noise_experiment",
    "run_projection_timing",
    "surrogate_attributions",
]


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 10000
    seed: int = 42

    def __post_init__(self):
        if self.n < 2 or self.n % 2 != 0:
            raise ValidationError("n must be even (the dataset has two equal halves)")


@dataclass(frozen=True)
class SyntheticDataset:
    """Feature columns A and B, balanced class labels (1/2), and which half
    each row belongs to (0 = first, 1 = second)."""

    features: np.ndarray
    class_labels: np.ndarray
    half_labels: np.ndarray

    @property
    def n(self) -> int:
        return self.features.shape[0]


def _balanced_classes(half_n: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.repeat([1, 2], [half_n - half_n // 2, half_n // 2])
    return rng.permutation(labels)


def gen_synthetic_dataset(spec: SyntheticSpec) -> SyntheticDataset:
    """Two halves with disjoint feature supports.

    First half: A ~ U[0,1] for class 1, U[1,2] for class 2; B ~ U[1,2].
    Second half: A ~ U[2,3]; B ~ U[3,4] for class 1, U[4,5] for class 2.
    So A alone decides the class in the first half, B alone in the second.
    """
    rng = np.random.default_rng(spec.seed)
    half_n = spec.n // 2
    cls1 = _balanced_classes(half_n, rng)
    cls2 = _balanced_classes(half_n, rng)

    a1 = np.where(cls1 == 1, rng.uniform(0, 1, half_n), rng.uniform(1, 2, half_n))
    b1 = rng.uniform(1, 2, half_n)
    a2 = rng.uniform(2, 3, half_n)
    b2 = np.where(cls2 == 1, rng.uniform(3, 4, half_n), rng.uniform(4, 5, half_n))

    features = np.column_stack(
        [np.concatenate([a1, a2]), np.concatenate([b1, b2])]
    )
    return SyntheticDataset(
        features=features,
        class_labels=np.concatenate([cls1, cls2]),
        half_labels=np.repeat([0, 1], half_n),
    )


def blackbox_predict(row, half: int) -> int:
    """The generating rule itself: first half decides by A > 1, second by
    B > 4. Analytically exact on generated data."""
    a, b = float(row[0]), float(row[1])
    if half == 0:
        return 2 if a > 1 else 1
    return 2 if b > 4 else 1


def oracle_blackbox(rows: np.ndarray, halves: np.ndarray) -> np.ndarray:
    """Vectorized blackbox_predict: each row is scored under the half it was
    perturbed from, the faithful way to query the rule off-manifold."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    halves = np.asarray(halves).ravel()
    by_a = np.where(rows[:, 0] > 1, 2, 1)
    by_b = np.where(rows[:, 1] > 4, 2, 1)
    return np.where(halves == 0, by_a, by_b).astype(np.int64)


# feature supports of the two halves: (A range, B range)
_HALF_BOXES = (((0.0, 2.0), (1.0, 2.0)), ((2.0, 3.0), (3.0, 5.0)))


def _box_dist2(rows: np.ndarray, box) -> np.ndarray:
    d2 = np.zeros(rows.shape[0])
    for j, (lo, hi) in enumerate(box):
        gap = np.maximum(lo - rows[:, j], 0.0) + np.maximum(rows[:, j] - hi, 0.0)
        d2 += gap**2
    return d2


def rule_blackbox(rows: np.ndarray) -> np.ndarray:
    """Vectorized rule classifier over rows alone.

    The half is inferred by nearest generating support (the halves occupy
    disjoint boxes in feature space), so a perturbed row stays under its own
    half's rule unless both features drift toward the other half at once -
    the off-manifold behavior a classifier trained on this data converges to.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    first_half = _box_dist2(rows, _HALF_BOXES[0]) <= _box_dist2(rows, _HALF_BOXES[1])
    by_a = np.where(rows[:, 0] > 1, 2, 1)
    by_b = np.where(rows[:, 1] > 4, 2, 1)
    return np.where(first_half, by_a, by_b).astype(np.int64)


@dataclass(frozen=True)
class SurrogateConfig:
    """Perturbation + weighted ridge explainer settings.

    Perturbations are Gaussian with per-feature scale perturb_scale * feature
    std; kernel distances are measured in those per-feature units and
    kernel_width defaults to 0.75 * sqrt(m). Attributions are |coefficient| *
    feature std (the standardized coefficient), optionally L1-normalized per
    instance (rows whose raw sum is below 1e-10 stay unnormalized, so a
    constant black box still yields all-but-zero attributions).
    """

    n_samples: int = 500
    kernel_width: float | None = None
    ridge: float = 1e-3
    seed: int = 0
    perturb_scale: float = 0.5
    normalize: bool = True

    def __post_init__(self):
        if self.n_samples < 2:
            raise RangeError("n_samples must be >= 2")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise RangeError("kernel_width must be > 0")
        if self.ridge <= 0:
            raise RangeError("ridge must be > 0")
        if self.perturb_scale <= 0:
            raise RangeError("perturb_scale must be > 0")


def surrogate_attributions(
    features: np.ndarray,
    blackbox,
    cfg: SurrogateConfig | None = None,
    feature_names=None,
    context: np.ndarray | None = None,
) -> AttributionMatrix:
    """Local linear surrogate per instance.

    For each instance: Gaussian perturbations around it, exponential distance
    kernel weights, weighted ridge fit of the black-box output, attribution =
    |coefficient| * feature std.

    ``context`` is an optional per-instance value (e.g. which regime governs
    the instance); when given, the black box is called as
    blackbox(perturbed_rows, per_row_context) so every perturbed row is
    scored under its source instance's regime.
    """
    cfg = cfg or SurrogateConfig()
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValidationError("features must be 2-D")
    n, m = features.shape
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{j}" for j in range(m))
    if context is not None:
        context = np.asarray(context).ravel()
        if context.shape[0] != n:
            raise ValidationError("context must have one value per instance")

    feat_scale = features.std(axis=0)
    sigma = cfg.perturb_scale * feat_scale
    sigma_safe = np.where(sigma > 0, sigma, 1.0)
    kw = cfg.kernel_width if cfg.kernel_width is not None else 0.75 * np.sqrt(m)
    rng = np.random.default_rng(cfg.seed)
    eye = np.eye(m)

    attrs = np.empty((n, m))
    chunk = max(1, int(4e6 / max(1, cfg.n_samples * m)))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        x = features[start:stop]
        noise = rng.standard_normal((stop - start, cfg.n_samples, m)) * sigma
        perturbed = x[:, None, :] + noise
        flat = perturbed.reshape(-1, m)
        if context is None:
            y = np.asarray(blackbox(flat), dtype=np.float64)
        else:
            per_row = np.repeat(context[start:stop], cfg.n_samples)
            y = np.asarray(blackbox(flat, per_row), dtype=np.float64)
        y = y.reshape(stop - start, cfg.n_samples)

        z2 = ((noise / sigma_safe) ** 2).sum(axis=2)
        w = np.exp(-z2 / kw**2)
        wsum = w.sum(axis=1)
        xm = np.einsum("bs,bsm->bm", w, perturbed) / wsum[:, None]
        ym = np.einsum("bs,bs->b", w, y) / wsum
        xc = perturbed - xm[:, None, :]
        yc = y - ym[:, None]

        gram = np.einsum("bs,bsm,bsn->bmn", w, xc, xc) + cfg.ridge * eye[None]
        rhs = np.einsum("bs,bsm,bs->bm", w, xc, yc)
        coef = np.linalg.solve(gram, rhs[..., None])[..., 0]
        # coefficient on the feature's own scale, as a standardized coefficient
        attrs[start:stop] = np.abs(coef) * feat_scale

    if cfg.normalize:
        row_sums = attrs.sum(axis=1)
        scale = np.where(row_sums > 1e-10, row_sums, 1.0)
        attrs = attrs / scale[:, None]

    return AttributionMatrix(
        instance_ids=tuple(str(i) for i in range(n)),
        feature_names=names,
        values=attrs,
    )


def add_noise_columns(matrix: AttributionMatrix, count: int, seed: int = 0) -> AttributionMatrix:
    """Append ``count`` columns of U[0, 0.5] noise; originals untouched."""
    if count < 0:
        raise RangeError("count must be >= 0")
    if count == 0:
        return matrix
    rng = np.random.default_rng(seed)
    noise = rng.uniform(0.0, 0.5, size=(matrix.n, count))
    return AttributionMatrix(
        instance_ids=matrix.instance_ids,
        feature_names=matrix.feature_names + tuple(f"noise_{j}" for j in range(count)),
        values=np.hstack([np.asarray(matrix.values), noise]),
        prior_labels=matrix.prior_labels,
    )


@dataclass(frozen=True)
class ExperimentReport:
    """Flat result rows plus the config that produced them; CSV and JSON
    writers share the same column order."""

    kind: str
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    config: dict

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "config": self.config, "rows": [dict(r) for r in self.rows]}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(self.columns))
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)

    def summary_table(self) -> str:
        widths = {c: max(len(c), *(len(_fmt(r[c])) for r in self.rows)) for c in self.columns}
        header = "  ".join(c.ljust(widths[c]) for c in self.columns)
        lines = [header, "  ".join("-" * widths[c] for c in self.columns)]
        for row in self.rows:
            lines.append("  ".join(_fmt(row[c]).ljust(widths[c]) for c in self.columns))
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def run_noise_experiment(
    noise_counts=(500, 1000, 2000, 4000),
    *,
    n: int = 2000,
    k: int = 2,
    repeats: int = 5,
    n_components: int = 10,
    seed: int = 42,
    surrogate_cfg: SurrogateConfig | None = None,
) -> ExperimentReport:
    """Cluster surrogate attributions with and without PCA while noise
    columns pile up; report mean Rand index vs. the half labels and mean
    runtime per (noise level, pipeline).
    """
    if repeats < 1:
        raise RangeError("repeats must be >= 1")
    levels = sorted(int(c) for c in noise_counts)
    acc: dict[tuple[int, str], list[tuple[float, float]]] = {
        (lvl, pipe): [] for lvl in levels for pipe in ("raw", "pca")
    }

    for rep in range(repeats):
        rep_seed = seed + 101 * rep
        dataset = gen_synthetic_dataset(SyntheticSpec(n=n, seed=rep_seed))
        scfg = surrogate_cfg or SurrogateConfig(seed=rep_seed)
        base = surrogate_attributions(
            dataset.features,
            oracle_blackbox,
            scfg,
            feature_names=("A", "B"),
            context=dataset.half_labels,
        )
        for lvl in levels:
            noisy = add_noise_columns(base, lvl, seed=rep_seed + lvl)
            values = np.asarray(noisy.values)
            cluster_cfg = PipelineConfig(k=k, n_components=n_components, seed=rep_seed)

            t0 = time.perf_counter()
            raw_part = cluster_reduced(values, cluster_cfg)
            raw_ms = (time.perf_counter() - t0) * 1000.0
            acc[(lvl, "raw")].append(
                (rand_index(raw_part.labels, dataset.half_labels), raw_ms)
            )

            t0 = time.perf_counter()
            p = min(n_components, values.shape[0], values.shape[1])
            reduced = pca_fit_transform(values, p, seed=rep_seed)
            pca_part = cluster_reduced(reduced.values, cluster_cfg)
            pca_ms = (time.perf_counter() - t0) * 1000.0
            acc[(lvl, "pca")].append(
                (rand_index(pca_part.labels, dataset.half_labels), pca_ms)
            )

    rows = []
    for lvl in levels:
        for pipe in ("raw", "pca"):
            trials = acc[(lvl, pipe)]
            rows.append(
                {
                    "noise_columns": lvl,
                    "pipeline": pipe,
                    "rand_index": float(np.mean([t[0] for t in trials])),
                    "runtime_ms": float(np.mean([t[1] for t in trials])),
                }
            )
    return ExperimentReport(
        kind="noise",
        columns=("noise_columns", "pipeline", "rand_index", "runtime_ms"),
        rows=tuple(rows),
        config={
            "n": n, "k": k, "repeats": repeats, "n_components": n_components,
            "seed": seed, "noise_counts": levels,
        },
    )


def gen_cluster_blobs(
    clusters: int = 3, attrs: int = 30, n: int = 1000, separation: float = 5.0, seed: int = 42
) -> tuple[np.ndarray, np.ndarray]:
    """Unit-variance Gaussian blobs whose closest pair of centers sits
    ``separation`` apart. Sizes as equal as n allows; labels 0..clusters-1."""
    if clusters < 2:
        raise RangeError("need at least 2 clusters")
    if n < clusters:
        raise RangeError("n must be >= clusters")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((clusters, attrs))
    d = np.sqrt(pairwise_sq_dists(centers, centers))
    np.fill_diagonal(d, np.inf)
    centers *= separation / d.min()

    sizes = np.full(clusters, n // clusters)
    sizes[: n % clusters] += 1
    labels = np.repeat(np.arange(clusters), sizes)
    values = centers[labels] + rng.standard_normal((n, attrs))
    return values, labels


def _time_lamp(values: np.ndarray, labels: np.ndarray, seed: int) -> tuple[float, np.ndarray]:
    part = partition_from_labels(values, labels)
    cfg = ProjectionConfig(seed=seed)
    t0 = time.perf_counter()
    picked = select_control_points(part, cfg)
    scaffold = seed_control_layout(values[picked], part.labels[picked], cfg)
    layout = lamp_map(values, picked, scaffold, part, cfg)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return elapsed, layout.coords


def _time_mds(values: np.ndarray) -> tuple[float, np.ndarray]:
    t0 = time.perf_counter()
    d = np.sqrt(pairwise_sq_dists(values, values))
    coords = classical_mds(d, dim=2)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return elapsed, coords


def run_projection_timing(
    sizes=(500, 1000, 2000, 5000),
    *,
    clusters: int = 3,
    attrs: int = 30,
    separation: float = 5.0,
    seed: int = 42,
    trials_small: int = 3,
) -> ExperimentReport:
    """Wall-clock of the local affine pipeline (control selection + scaffold
    + mapping) vs. classical MDS over every point, per dataset size, with a
    2-D silhouette against the generating labels for each layout.

    Sizes below 5000 are timed as the median of ``trials_small`` runs to
    steady out scheduler jitter; the largest size runs once.
    """
    sizes = sorted(int(s) for s in sizes)
    if sizes[0] < clusters:
        raise RangeError("smallest size must cover the clusters")
    rows = []
    for size in sizes:
        values, labels = gen_cluster_blobs(clusters, attrs, size, separation, seed)
        trials = 1 if size >= 5000 else trials_small
        lamp_times, mds_times = [], []
        lamp_coords = mds_coords = None
        for _ in range(trials):
            ms, lamp_coords = _time_lamp(values, labels, seed)
            lamp_times.append(ms)
            ms, mds_coords = _time_mds(values)
            mds_times.append(ms)
        rows.append(
            {
                "n": size,
                "method": "lamp",
                "runtime_ms": float(np.median(lamp_times)),
                "silhouette": float(silhouette_score(lamp_coords, labels)),
            }
        )
        rows.append(
            {
                "n": size,
                "method": "mds",
                "runtime_ms": float(np.median(mds_times)),
                "silhouette": float(silhouette_score(mds_coords, labels)),
            }
        )
    return ExperimentReport(
        kind="projection",
        columns=("n", "method", "runtime_ms", "silhouette"),
        rows=tuple(rows),
        config={
            "sizes": sizes, "clusters": clusters, "attrs": attrs,
            "separation": separation, "seed": seed,
        },
    )


def attribution_pattern_stats(matrix: AttributionMatrix, half_labels: np.ndarray) -> dict:
    """Per half: median attribution of that half's predictive feature vs. the
    75th percentile of the other feature. The expected structure is
    median(predictive) > p75(other) in both halves."""
    values = np.asarray(matrix.values)
    half_labels = np.asarray(half_labels).ravel()
    out = {}
    for half, pred in ((0, 0), (1, 1)):
        rows = values[half_labels == half]
        other = 1 - pred
        out[f"half{half}"] = {
            "predictive_feature": matrix.feature_names[pred],
            "median_predictive": float(np.median(rows[:, pred])),
            "p75_other": float(np.percentile(rows[:, other], 75)),
        }
    out["pattern_holds"] = all(
        out[h]["median_predictive"] > out[h]["p75_other"] for h in ("half0", "half1")
    )
    return out
