import numpy as np
import pytest

from subplex.data import AttributionMatrix


def make_matrix(values, ids=None, names=None, labels=None) -> AttributionMatrix:
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    return AttributionMatrix(
        instance_ids=tuple(ids) if ids else tuple(str(i) for i in range(n)),
        feature_names=tuple(names) if names else tuple(f"f{j}" for j in range(m)),
        values=values,
        prior_labels=np.asarray(labels, dtype=np.int64) if labels is not None else None,
    )


@pytest.fixture
def three_blob_matrix():
    """75 x 4, three tight well-separated blobs of 25."""
    rng = np.random.default_rng(7)
    vals = np.vstack([rng.normal(c, 0.25, size=(25, 4)) for c in (0.0, 3.0, 6.0)])
    return make_matrix(vals), np.repeat([0, 1, 2], 25)
