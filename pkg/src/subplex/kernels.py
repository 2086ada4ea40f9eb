"""Numeric kernels: PCA, classical MDS, binned 1-D earth mover's distance,
medoids, Rand index, and the distance helpers everything else leans on.

All routines are deterministic for a fixed seed and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RangeError, ValidationError

__all__ = [
    "Histogram",
    "PCAModel",
    "ReducedMatrix",
    "classical_mds",
    "emd_1d",
    "euclidean_dist_sums",
    "histogram",
    "histogram_counts",
    "knn_mean_distance",
    "medoid_index",
    "pairwise_sq_dists",
    "pca_fit",
    "pca_fit_transform",
    "rand_index",
]


def pairwise_sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of x and rows of y.

    Uses the expansion ||a-b||^2 = ||a||^2 + ||b||^2 - 2 a.b, clipped at zero
    to kill the tiny negatives the cancellation produces.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xx = np.einsum("ij,ij->i", x, x)[:, None]
    yy = np.einsum("ij,ij->i", y, y)[None, :]
    d2 = xx + yy - 2.0 * (x @ y.T)
    np.clip(d2, 0.0, None, out=d2)
    return d2


def euclidean_dist_sums(x: np.ndarray, chunk: int = 512) -> np.ndarray:
    """For each row, the sum of Euclidean distances to every row (self included,
    contributing 0). Chunked so the full n x n matrix never materializes.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    sums = np.empty(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        sums[start:stop] = np.sqrt(pairwise_sq_dists(x[start:stop], x)).sum(axis=1)
    return sums


def medoid_index(x: np.ndarray) -> int:
    """Row index with the lowest summed Euclidean distance to all other rows.

    Ties resolve to the smallest index.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("medoid needs a non-empty 2-D array")
    return int(np.argmin(euclidean_dist_sums(x)))


@dataclass(frozen=True)
class PCAModel:
    """Fitted principal components: rows of ``components`` are unit vectors."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance_ratio: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return (x - self.mean) @ self.components.T

    def inverse_transform(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) @ self.components + self.mean


def _randomized_svd(xc: np.ndarray, k: int, seed: int, oversample: int = 10, power_iters: int = 2):
    # range finder with power iterations; plenty for spectra with a clear elbow
    rng = np.random.default_rng(seed)
    n, m = xc.shape
    probe = rng.standard_normal((m, min(k + oversample, min(n, m))))
    y = xc @ probe
    for _ in range(power_iters):
        q, _ = np.linalg.qr(y)
        y = xc @ (xc.T @ q)
    q, _ = np.linalg.qr(y)
    b = q.T @ xc
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    return (q @ ub)[:, :k], s[:k], vt[:k]


@dataclass(frozen=True)
class ReducedMatrix:
    """PCA scores (columns mean-centered) plus how much variance each keeps."""

    values: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def pca_fit(x: np.ndarray, n_components: int, seed: int = 0) -> PCAModel:
    """PCA by SVD of the centered matrix.

    Falls back to a seeded randomized range finder when the matrix is large
    and few components are requested; exact SVD otherwise. Component signs are
    fixed so the largest-magnitude loading of each component is positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("pca input must be 2-D")
    n, m = x.shape
    p = min(n, m)
    if n_components < 1 or n_components > p:
        raise RangeError(f"n_components must be in [1, {p}], got {n_components}")

    mean = x.mean(axis=0)
    xc = x - mean
    total_var = float(np.einsum("ij,ij->", xc, xc))

    if p > 200 and n_components <= p // 4:
        _, s, vt = _randomized_svd(xc, n_components, seed)
    else:
        _, s, vt = np.linalg.svd(xc, full_matrices=False)
        s, vt = s[:n_components], vt[:n_components]

    # deterministic orientation
    flip = np.sign(vt[np.arange(vt.shape[0]), np.argmax(np.abs(vt), axis=1)])
    flip[flip == 0] = 1.0
    vt = vt * flip[:, None]

    evr = (s**2) / total_var if total_var > 0 else np.zeros_like(s)
    return PCAModel(mean=mean, components=vt, explained_variance_ratio=evr)


def pca_fit_transform(x: np.ndarray, n_components: int, seed: int = 0) -> ReducedMatrix:
    """Project onto the top principal directions. Zero-variance input yields
    all-zero scores with zero explained variance (not an error)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValidationError("pca needs at least 2 rows")
    model = pca_fit(x, n_components, seed=seed)
    scores = model.transform(x)
    if not model.explained_variance_ratio.any():
        scores = np.zeros_like(scores)
    return ReducedMatrix(values=scores, explained_variance_ratio=model.explained_variance_ratio)


def classical_mds(d: np.ndarray, dim: int = 2) -> np.ndarray:
    """Classical (Torgerson) MDS of a symmetric distance matrix.

    Double-centers the squared distances, eigendecomposes, and keeps the top
    ``dim`` coordinates; negative eigenvalues (non-Euclidean noise) clamp to
    zero, yielding zero coordinates in those directions.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError("distance matrix must be square")
    if not np.allclose(d, d.T, atol=1e-10):
        raise ValidationError("distance matrix must be symmetric")
    if np.any(d < 0):
        raise ValidationError("distances must be non-negative")
    n = d.shape[0]
    if dim < 1:
        raise RangeError("dim must be >= 1")

    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d**2) @ j
    b = (b + b.T) / 2.0
    w, v = np.linalg.eigh(b)
    order = np.argsort(w)[::-1][:dim]
    w_top = np.clip(w[order], 0.0, None)
    coords = v[:, order] * np.sqrt(w_top)[None, :]
    if coords.shape[1] < dim:
        coords = np.hstack([coords, np.zeros((n, dim - coords.shape[1]))])

    flip = np.sign(coords[np.argmax(np.abs(coords), axis=0), np.arange(dim)])
    flip[flip == 0] = 1.0
    return coords * flip[None, :]


@dataclass(frozen=True)
class Histogram:
    """Mass over uniform bins; mass sums to 1 when it covers a whole group."""

    bin_edges: np.ndarray
    mass: np.ndarray
    bin_width: float


def histogram_counts(values: np.ndarray, lo: float, hi: float, bins: int) -> np.ndarray:
    """Counts over ``bins`` uniform bins on [lo, hi].

    Bin of v is floor((v - lo) / width), clipped into range, so v == hi lands
    in the last bin and out-of-range values clamp to the boundary bins.
    """
    if bins < 1:
        raise RangeError("bins must be >= 1")
    values = np.asarray(values, dtype=np.float64).ravel()
    width = (hi - lo) / bins
    idx = np.floor((values - lo) / width).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    return np.bincount(idx, minlength=bins).astype(np.float64)


def histogram(values: np.ndarray, lo: float, hi: float, bins: int, total_weight: int) -> Histogram:
    """Histogram where each value contributes 1/total_weight mass.

    total_weight is the owning group's size, so a subset's masses sum to
    |subset| / group size and a whole group's masses sum to 1.
    """
    if lo >= hi:
        raise RangeError(f"need lo < hi, got [{lo}, {hi}]")
    values = np.asarray(values, dtype=np.float64).ravel()
    if total_weight < max(1, values.size):
        raise RangeError("total_weight must cover every value")
    counts = histogram_counts(values, lo, hi, bins)
    return Histogram(
        bin_edges=np.linspace(lo, hi, bins + 1),
        mass=counts / float(total_weight),
        bin_width=(hi - lo) / bins,
    )


def emd_1d(a: Histogram, b: Histogram) -> float:
    """Earth mover's distance between histograms on identical uniform bins:
    bin_width * sum |CDF_a - CDF_b|. Exact optimal-transport cost in 1-D."""
    if a.bin_edges.shape != b.bin_edges.shape or not np.array_equal(a.bin_edges, b.bin_edges):
        raise ValidationError("histograms must share identical bin edges")
    delta = np.cumsum(a.mass - b.mass)
    return float(a.bin_width * np.abs(delta).sum())


def rand_index(labels_a: np.ndarray, labels_b: np.ndarray) -> float:
    """Rand index between two labelings of the same points: the fraction of
    point pairs on which the labelings agree (together in both, or apart in
    both). Computed from the contingency table, not by pair enumeration.
    """
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape:
        raise ValidationError("labelings must have equal length")
    n = a.size
    if n < 2:
        raise ValidationError("rand index needs at least two points")

    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka, kb = ai.max() + 1, bi.max() + 1
    contingency = np.bincount(ai * kb + bi, minlength=ka * kb).reshape(ka, kb)

    def pairs(counts):
        counts = counts.astype(np.float64)
        return float((counts * (counts - 1) / 2).sum())

    together_both = pairs(contingency.ravel())
    together_a = pairs(contingency.sum(axis=1))
    together_b = pairs(contingency.sum(axis=0))
    all_pairs = n * (n - 1) / 2.0
    return (all_pairs + 2 * together_both - together_a - together_b) / all_pairs


def knn_mean_distance(x: np.ndarray, k: int, chunk: int = 512) -> np.ndarray:
    """Mean Euclidean distance from each row to its k nearest other rows."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if k < 1 or k >= n:
        raise RangeError(f"k must be in [1, {n - 1}], got {k}")
    out = np.empty(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = pairwise_sq_dists(x[start:stop], x)
        # k+1 smallest include the self distance (exactly one 0 per row, or a
        # duplicate's 0 which costs the same), drop one and keep k
        part = np.partition(d2, k, axis=1)[:, : k + 1]
        part.sort(axis=1)
        out[start:stop] = np.sqrt(part[:, 1:]).mean(axis=1)
    return out
