import numpy as np
import pytest

from coin.data import Dataset
from coin.detection import detect_knn_distance, knn_distance_scores
from coin.experiments import SyntheticSpec, generate_synthetic


def test_scores_match_brute_force(rng):
    X = rng.normal(size=(30, 4))
    k = 3
    d = np.linalg.norm(X[:, None] - X[None], axis=2)
    np.fill_diagonal(d, np.inf)
    np.testing.assert_allclose(knn_distance_scores(X, k), np.sort(d, axis=1)[:, k - 1])


def test_fraction_zero_flags_nothing(rng):
    ds = Dataset.from_array(rng.normal(size=(20, 2)))
    assert detect_knn_distance(ds, 3, 0.0).outlier_ids == ()


def test_flags_the_obvious_outlier(rng):
    X = np.vstack([rng.normal(size=(40, 2)), [[50.0, 50.0]]])
    res = detect_knn_distance(Dataset.from_array(X), 5, 1 / 41)
    assert res.outlier_ids == (40,)


def test_ties_broken_by_row():
    ds = Dataset.from_array([[0.0], [10.0], [20.0], [30.0]])
    # rows 0 and 3 share the largest 2-NN distance (20)
    assert detect_knn_distance(ds, 2, 0.25).outlier_ids == (0,)


def test_cannot_flag_everything(rng):
    ds = Dataset.from_array(rng.normal(size=(5, 2)))
    with pytest.raises(ValueError):
        detect_knn_distance(ds, 2, 1.0)


def test_syn1_count():
    ds, truth = generate_synthetic(SyntheticSpec("SYN1", seed=0))
    res = detect_knn_distance(ds, 10, 30 / 405)
    assert len(res.outlier_ids) == 30
    # the planted outliers are far off every cluster, most of them are recovered
    assert len(set(res.outlier_ids) & set(truth.outlier_ids)) >= 20
