"""Feature rankings, selection splits, and the low-attribution diagnostic."""

import numpy as np
import pytest
from scipy.optimize import linprog

from subplex.analysis import (
    feature_histograms,
    low_attribution_instances,
    rank_features_by_deviation,
    rank_features_by_group_mean,
    selection_split_stats,
)
from subplex.cluster import partition_from_labels
from subplex.data import Selection
from subplex.errors import ValidationError

from conftest import make_matrix


def lp_transport_cost(mass_a, mass_b, centers) -> float:
    m = len(centers)
    cost = np.abs(np.subtract.outer(centers, centers)).ravel()
    a_eq = []
    for i in range(m):
        row = np.zeros((m, m))
        row[i, :] = 1.0
        a_eq.append(row.ravel())
    for j in range(m):
        col = np.zeros((m, m))
        col[:, j] = 1.0
        a_eq.append(col.ravel())
    res = linprog(cost, A_eq=a_eq, b_eq=np.concatenate([mass_a, mass_b]),
                  bounds=(0, None), method="highs")
    assert res.success
    return float(res.fun)


# --- group-mean ranking ---

def test_mean_ranking_simple_order():
    vals = np.array([[0.5, 0.1], [0.5, 0.1]])
    part = partition_from_labels(vals, np.zeros(2, dtype=int))
    r = rank_features_by_group_mean(make_matrix(vals), part, 0)
    assert list(r.order) == [0, 1]
    assert r.scores[0] == pytest.approx(0.5)


def test_mean_ranking_tie_keeps_feature_index_order():
    vals = np.full((3, 4), 0.25)
    part = partition_from_labels(vals, np.zeros(3, dtype=int))
    r = rank_features_by_group_mean(make_matrix(vals), part, 0)
    assert list(r.order) == [0, 1, 2, 3]


def test_mean_ranking_matches_naive_sort():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(40, 6))
    labels = rng.integers(0, 3, size=40)
    labels[:3] = [0, 1, 2]
    part = partition_from_labels(vals, labels)
    for g in range(3):
        r = rank_features_by_group_mean(make_matrix(vals), part, g)
        means = vals[labels == g].mean(axis=0)
        expect = sorted(range(6), key=lambda j: (-means[j], j))
        assert list(r.order) == expect
        np.testing.assert_allclose(np.sort(r.scores)[::-1], r.scores[np.argsort(-r.scores)])


def test_mean_ranking_unknown_group_rejected():
    vals = np.zeros((4, 2))
    part = partition_from_labels(vals, np.array([0, 0, 1, 1]))
    with pytest.raises(ValidationError):
        rank_features_by_group_mean(make_matrix(vals), part, 9)


# --- deviation ranking ---

def test_deviation_identical_feature_scores_zero_and_last():
    rng = np.random.default_rng(1)
    n = 60
    labels = np.repeat([0, 1], 30)
    vals = np.zeros((n, 2))
    vals[:, 0] = np.where(labels == 0, 0.1, 0.9)  # strongly deviating
    vals[:, 1] = np.tile(rng.random(30), 2)       # identical in both groups
    part = partition_from_labels(vals, labels)
    r = rank_features_by_deviation(make_matrix(vals), part, bins=10)
    assert list(r.order) == [0, 1]
    assert r.scores[1] == pytest.approx(0.0, abs=1e-12)


def test_deviation_two_constants_known_value():
    # constant 0 vs constant 1 over range [0,1] with 20 bins: all mass sits in
    # the first and last bins, CDF differs by 1 in 19 of 20 bins -> 19 * 0.05
    labels = np.repeat([0, 1], 10)
    vals = np.zeros((20, 2))
    vals[:, 0] = labels.astype(float)
    vals[10:, 1] = 1.0  # keeps feature ranges [0,1] without affecting feature 0
    part = partition_from_labels(vals, labels)
    r = rank_features_by_deviation(make_matrix(vals), part, bins=20)
    assert r.scores[list(r.order).index(0)] == pytest.approx(0.95, abs=1e-12)


def test_deviation_matches_lp_oracle_pairwise_sums():
    rng = np.random.default_rng(2)
    vals = rng.normal(size=(45, 3))
    labels = np.repeat([0, 1, 2], 15)
    part = partition_from_labels(vals, labels)
    bins = 8
    r = rank_features_by_deviation(make_matrix(vals), part, bins=bins)

    for j in range(3):
        lo, hi = vals[:, j].min(), vals[:, j].max()
        edges = np.linspace(lo, hi, bins + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        masses = []
        for g in range(3):
            col = vals[labels == g, j]
            idx = np.clip(np.digitize(col, edges) - 1, 0, bins - 1)
            masses.append(np.bincount(idx, minlength=bins) / len(col))
        expect = sum(
            lp_transport_cost(masses[a], masses[b], centers)
            for a in range(3) for b in range(a + 1, 3)
        )
        assert r.scores[j] == pytest.approx(expect, abs=1e-9)


def test_deviation_requires_two_groups():
    vals = np.random.default_rng(3).normal(size=(5, 2))
    part = partition_from_labels(vals, np.zeros(5, dtype=int))
    with pytest.raises(ValidationError):
        rank_features_by_deviation(make_matrix(vals), part, bins=10)


def test_deviation_invariant_under_relabeling():
    rng = np.random.default_rng(4)
    vals = rng.normal(size=(30, 4))
    labels = np.repeat([0, 1, 2], 10)
    part_a = partition_from_labels(vals, labels)
    part_b = partition_from_labels(vals, 2 - labels)  # reversed ids
    ra = rank_features_by_deviation(make_matrix(vals), part_a, bins=12)
    rb = rank_features_by_deviation(make_matrix(vals), part_b, bins=12)
    np.testing.assert_allclose(ra.scores, rb.scores, atol=1e-12)


def test_deviation_scores_nonnegative_and_sorted():
    rng = np.random.default_rng(5)
    vals = rng.normal(size=(40, 5))
    labels = rng.integers(0, 2, size=40)
    labels[:2] = [0, 1]
    part = partition_from_labels(vals, labels)
    r = rank_features_by_deviation(make_matrix(vals), part, bins=10)
    assert np.all(np.asarray(r.scores) >= 0)
    sorted_scores = [r.scores[j] for j in r.order]
    assert all(a >= b - 1e-15 for a, b in zip(sorted_scores, sorted_scores[1:]))


# --- selection splits ---

def test_split_whole_group_selected():
    rng = np.random.default_rng(6)
    vals = rng.normal(size=(20, 3))
    labels = np.repeat([0, 1], 10)
    part = partition_from_labels(vals, labels)
    stats = selection_split_stats(make_matrix(vals), part, Selection(tuple(range(10))))
    g0 = stats.groups[0]
    assert g0.selected_count == 10 and g0.unselected_count == 0
    np.testing.assert_allclose(g0.selected_mean, vals[:10].mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(g0.unselected_mean, 0.0)


def test_split_empty_selection():
    rng = np.random.default_rng(7)
    vals = rng.normal(size=(10, 2))
    part = partition_from_labels(vals, np.repeat([0, 1], 5))
    stats = selection_split_stats(make_matrix(vals), part, Selection(()))
    for g in stats.groups:
        assert g.selected_count == 0
        assert g.unselected_count == 5


def test_split_matches_brute_force():
    rng = np.random.default_rng(8)
    vals = rng.normal(size=(50, 4))
    labels = rng.integers(0, 3, size=50)
    labels[:3] = [0, 1, 2]
    part = partition_from_labels(vals, labels)
    sel = Selection.from_iterable(rng.choice(50, 23, replace=False), n=50)
    chosen = set(sel.indices)
    stats = selection_split_stats(make_matrix(vals), part, sel)
    for g in stats.groups:
        inside = [i for i in range(50) if labels[i] == g.group_id and i in chosen]
        outside = [i for i in range(50) if labels[i] == g.group_id and i not in chosen]
        assert g.selected_count == len(inside)
        assert g.unselected_count == len(outside)
        if inside:
            np.testing.assert_allclose(g.selected_mean, vals[inside].mean(axis=0), atol=1e-12)
        if outside:
            np.testing.assert_allclose(g.unselected_mean, vals[outside].mean(axis=0), atol=1e-12)


def test_split_sides_recombine_to_group_mean():
    rng = np.random.default_rng(9)
    vals = rng.normal(size=(40, 3))
    labels = np.repeat([0, 1], 20)
    part = partition_from_labels(vals, labels)
    sel = Selection.from_iterable(rng.choice(40, 15, replace=False), n=40)
    stats = selection_split_stats(make_matrix(vals), part, sel)
    for g in stats.groups:
        size = g.selected_count + g.unselected_count
        combined = (
            g.selected_count * g.selected_mean + g.unselected_count * g.unselected_mean
        ) / size
        group_mean = vals[labels == g.group_id].mean(axis=0)
        np.testing.assert_allclose(combined, group_mean, atol=1e-12)


# --- feature histograms payload ---

def test_feature_histograms_masses_sum_to_one_per_group():
    rng = np.random.default_rng(10)
    vals = rng.normal(size=(30, 3))
    part = partition_from_labels(vals, np.repeat([0, 1], 15))
    feats = feature_histograms(make_matrix(vals), part, bins=8)
    assert len(feats) == 3
    for feat in feats:
        assert len(feat["bin_edges"]) == 9
        for masses in feat["groups"].values():
            assert sum(masses) == pytest.approx(1.0, abs=1e-12)


def test_feature_histograms_shared_edges_span_global_range():
    vals = np.array([[0.0], [0.5], [1.0], [2.0]])
    part = partition_from_labels(vals, np.array([0, 0, 1, 1]))
    (feat,) = feature_histograms(make_matrix(vals), part, bins=4)
    assert feat["bin_edges"][0] == pytest.approx(0.0)
    assert feat["bin_edges"][-1] == pytest.approx(2.0)


# --- low-attribution diagnostic ---

def test_low_attribution_flags_near_zero_rows():
    vals = np.array([[1.0, 2.0], [0.001, 0.0], [3.0, 1.0]])
    sel = low_attribution_instances(make_matrix(vals), fraction=0.01)
    assert sel.indices == (1,)


def test_low_attribution_none_when_all_strong():
    vals = np.array([[1.0, 2.0], [2.0, 1.0]])
    sel = low_attribution_instances(make_matrix(vals), fraction=0.01)
    assert sel.indices == ()
