"""The one-call pipeline and its JSON projections."""

import numpy as np
import pytest

from subplex.errors import RangeError, ValidationError
from subplex.kernels import rand_index
from subplex.pipeline import (
    PipelineConfig,
    layout_to_json,
    rankings_to_json,
    run_pipeline,
)

from conftest import make_matrix


@pytest.fixture(scope="module")
def result():
    rng = np.random.default_rng(7)
    vals = np.vstack([rng.normal(c, 0.25, size=(25, 4)) for c in (0.0, 3.0, 6.0)])
    mx = make_matrix(vals)
    return mx, run_pipeline(mx, PipelineConfig(k=3, seed=42))


def test_pipeline_recovers_blobs(result):
    mx, res = result
    truth = np.repeat([0, 1, 2], 25)
    assert rand_index(res.partition.labels, truth) == 1.0


def test_pipeline_components_capped_by_shape(result):
    mx, res = result
    assert res.reduced.p <= min(mx.n, mx.m)


def test_pipeline_rankings_cover_every_group(result):
    mx, res = result
    assert sorted(res.mean_rankings) == [0, 1, 2]
    assert res.deviation_ranking is not None
    for r in res.mean_rankings.values():
        assert sorted(r.order) == [0, 1, 2, 3]


def test_pipeline_timings_present(result):
    _, res = result
    assert set(res.timings_ms) >= {"reduce", "cluster", "outliers", "project_rank"}
    assert all(v >= 0 for v in res.timings_ms.values())


def test_pipeline_k_too_large():
    mx = make_matrix(np.zeros((4, 2)))
    with pytest.raises(RangeError):
        run_pipeline(mx, PipelineConfig(k=5, seed=42))


def test_pipeline_deterministic():
    rng = np.random.default_rng(8)
    mx = make_matrix(rng.normal(size=(30, 5)))
    a = run_pipeline(mx, PipelineConfig(k=2, seed=1))
    b = run_pipeline(mx, PipelineConfig(k=2, seed=1))
    assert np.array_equal(a.partition.labels, b.partition.labels)
    np.testing.assert_array_equal(a.layout.coords, b.layout.coords)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        PipelineConfig.from_json_dict({"k": 3, "mystery": 1})


def test_config_round_trips_through_json():
    cfg = PipelineConfig(k=4, seed=9, bins=15)
    again = PipelineConfig.from_json_dict(cfg.to_json_dict())
    assert again == cfg


def test_layout_json_contract(result):
    mx, res = result
    payload = layout_to_json(mx, res.partition, res.layout)
    assert len(payload["points"]) == mx.n
    point = payload["points"][0]
    assert set(point) == {"id", "x", "y", "group", "outlier"}
    assert len(payload["medoids"]) == 3
    med = payload["medoids"][0]
    assert set(med) == {"group", "id", "x", "y"}
    assert all(set(c) == {"index", "x", "y"} for c in payload["controls"])
    # medoid entries point at real rows of their own group
    ids = list(mx.instance_ids)
    for med in payload["medoids"]:
        row = ids.index(med["id"])
        assert payload["points"][row]["group"] == med["group"]


def test_rankings_json_contract(result):
    mx, res = result
    payload = rankings_to_json(res.mean_rankings, res.deviation_ranking, mx.feature_names, 20)
    assert payload["feature_names"] == list(mx.feature_names)
    assert payload["bins"] == 20
    assert sorted(payload["mean"]) == ["0", "1", "2"]
    assert payload["deviation"]["basis"] == "deviation_emd"
    for entry in payload["mean"].values():
        assert entry["basis"] == "group_mean"
