"""A reference k-NN distance detector.

The interpreter only consumes the set of flagged ids, so any detector can be
swapped in by writing its ids to an outlier-id file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, distances_to


@dataclass(frozen=True)
class DetectionResult:
    outlier_ids: tuple
    scores: np.ndarray  # aligned with dataset rows


def knn_distance_scores(values: np.ndarray, k: int) -> np.ndarray:
    """Distance from each row to its k-th nearest other row (brute force)."""
    n = values.shape[0]
    scores = np.empty(n)
    for i in range(n):
        d = distances_to(values, values[i])
        d[i] = np.inf
        scores[i] = np.partition(d, k - 1)[k - 1]
    return scores


def detect_knn_distance(dataset: Dataset, k: int = 10, fraction: float = 0.05) -> DetectionResult:
    if not 0 <= fraction <= 1:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    if not 1 <= k < dataset.n:
        raise ValueError(f"k must satisfy 1 <= k < N={dataset.n}, got {k}")
    # rounding guards against 30/405*405 = 30.000000000000004
    n_flag = math.ceil(round(fraction * dataset.n, 9))
    if n_flag >= dataset.n:
        raise ValueError(f"fraction {fraction} would flag all {dataset.n} instances")
    scores = knn_distance_scores(dataset.values, k)
    order = np.lexsort((np.arange(dataset.n), -scores))[:n_flag]
    ids = tuple(dataset.instance_ids[r] for r in order)
    return DetectionResult(ids, scores)
