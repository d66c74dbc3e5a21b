"""Context identification and clustering around a query outlier.

The context is the set of nearest normal instances. It is split into
clusters with K-means, the number of clusters being the largest one whose
prediction strength clears a threshold; tiny clusters are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeding import seed_sequence
from .data import Dataset, nearest_rows
from .exceptions import DegenerateContextError

K_MIN = 10


@dataclass(frozen=True)
class Context:
    outlier_id: object
    member_ids: tuple
    distances: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return len(self.member_ids)


@dataclass(frozen=True)
class Cluster:
    member_ids: tuple
    centroid: np.ndarray

    @property
    def size(self) -> int:
        return len(self.member_ids)


@dataclass(frozen=True)
class ContextClusters:
    clusters: tuple[Cluster, ...]
    L: int
    pruned_count: int
    pruned_ids: tuple = ()
    strengths: tuple = ()

    @property
    def surviving_size(self) -> int:
        return sum(c.size for c in self.clusters)


def context_size(n_normal: int, context_fraction: float, k_min: int = K_MIN) -> int:
    if not 0 < context_fraction <= 1:
        raise ValueError(f"context_fraction must lie in (0, 1], got {context_fraction}")
    if n_normal < k_min:
        raise DegenerateContextError(f"only {n_normal} normal instances, at least {k_min} required")
    return min(n_normal, max(k_min, math.ceil(round(context_fraction * n_normal, 9))))


def build_context(dataset: Dataset, normal_ids, outlier, context_fraction: float = 0.08,
                  k_min: int = K_MIN, outlier_id=None) -> Context:
    """The k nearest normal instances of ``outlier``, sorted by distance."""
    rows = np.unique(dataset.rows(normal_ids))
    if rows.size == 0:
        raise DegenerateContextError("no normal instances to build a context from")
    k = context_size(rows.size, context_fraction, k_min)
    near, dist = nearest_rows(dataset.values, rows, np.asarray(outlier, dtype=float), k)
    ids = tuple(dataset.instance_ids[r] for r in near)
    return Context(outlier_id, ids, dist)


# --- K-means ---------------------------------------------------------------

@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    history: list  # inertia after each assignment step of the winning restart


def _sq_dists(points, centroids):
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp(points, k, rng):
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    closest = ((points - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(points[idx])
        closest = np.minimum(closest, ((points - points[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(points, centroids, max_iter):
    k = centroids.shape[0]
    labels = None
    history = []
    for _ in range(max_iter):
        d = _sq_dists(points, centroids)
        new_labels = d.argmin(axis=1)
        history.append(float(d[np.arange(points.shape[0]), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = centroids.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = points[members].mean(axis=0)
    return labels, centroids, history[-1], history


def kmeans(points, k: int, rng, n_init: int = 10, max_iter: int = 100) -> KMeansResult:
    """K-means with k-means++ seeding; the restart with the lowest inertia wins.

    Labels are renumbered by first appearance so results do not depend on
    centroid order.
    """
    points = np.asarray(points, dtype=float)
    if not 1 <= k <= points.shape[0]:
        raise ValueError(f"cannot form {k} clusters from {points.shape[0]} points")
    best = None
    for _ in range(n_init):
        labels, centroids, inertia, history = _lloyd(points, _kmeans_pp(points, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centroids, inertia, history)
    _, first = np.unique(best.labels, return_index=True)
    used = best.labels[np.sort(first)]
    remap = np.full(k, -1)
    remap[used] = np.arange(used.size)
    best.labels = remap[best.labels]
    best.centroids = best.centroids[used]
    return best


# --- prediction strength ---------------------------------------------------

def _strength_of_split(test, test_labels, train_centroids, k):
    nearest_train = _sq_dists(test, train_centroids).argmin(axis=1)
    worst = 1.0
    for c in range(k):
        members = nearest_train[test_labels == c]
        n_c = members.size
        if n_c < 2:
            continue
        counts = np.bincount(members)
        together = (counts * (counts - 1)).sum() / 2
        worst = min(worst, together / (n_c * (n_c - 1) / 2))
    return worst


def prediction_strength(points, candidate_k: int, splits: int = 5, seed=0, n_init: int = 10) -> float:
    """Average, over random halvings, of the worst co-membership rate of test clusters.

    A pair of test points sharing a test cluster counts as preserved when
    both are closest to the same centroid of the training-half clustering.
    Test clusters with fewer than two points score 1.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n < 4:
        raise ValueError(f"prediction strength needs at least 4 points, got {n}")
    if not 1 <= candidate_k <= n // 2:
        raise ValueError(f"candidate_k must lie in [1, {n // 2}], got {candidate_k}")
    if candidate_k == 1:
        return 1.0
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(splits):
        perm = rng.permutation(n)
        train, test = points[perm[: n // 2]], points[perm[n // 2:]]
        train_fit = kmeans(train, candidate_k, rng, n_init=n_init)
        test_fit = kmeans(test, candidate_k, rng, n_init=n_init)
        total += _strength_of_split(test, test_fit.labels, train_fit.centroids, candidate_k)
    return total / splits


def default_max_clusters(context_k: int, cap: int = 10) -> int:
    return max(1, min(cap, context_k // 5))


def resolve_context(points, max_L: int, ps_threshold: float = 0.8, min_cluster_fraction: float = 0.03,
                    seed=0, splits: int = 5, member_ids=None, n_init: int = 10) -> ContextClusters:
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if n == 0:
        raise DegenerateContextError("empty context")
    if member_ids is None:
        member_ids = tuple(range(n))
    ps_seed, km_seed = seed_sequence(seed).spawn(2)
    L, strengths = 1, [1.0]
    top = min(max_L, n // 2) if n >= 4 else 1
    for k in range(2, top + 1):
        ps = prediction_strength(points, k, splits, ps_seed.spawn(1)[0], n_init=n_init)
        strengths.append(ps)
        if ps >= ps_threshold:
            L = k
    fit = kmeans(points, L, np.random.default_rng(km_seed), n_init=n_init)
    clusters, pruned = [], []
    limit = min_cluster_fraction * n
    for j in range(fit.centroids.shape[0]):
        rows = np.flatnonzero(fit.labels == j)
        ids = tuple(member_ids[r] for r in rows)
        if rows.size <= limit:
            pruned.extend(ids)
            continue
        clusters.append(Cluster(ids, points[rows].mean(axis=0)))
    if not clusters:
        raise DegenerateContextError("every context cluster was pruned")
    return ContextClusters(tuple(clusters), L, fit.centroids.shape[0] - len(clusters),
                           tuple(pruned), tuple(strengths))
