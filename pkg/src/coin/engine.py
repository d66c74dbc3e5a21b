"""Per-outlier interpretation pipeline and aggregation of cluster evidence.

For each query: build its context among normal instances, resolve the
context into clusters, expand the query into a synthetic outlier class, fit
one local classifier per cluster, then combine the clusters' attribute
scores and margins, weighted by cluster size, into the interpretation.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._seeding import seed_sequence
from .config import Config
from .context import build_context, default_max_clusters, resolve_context
from .data import Dataset
from .exceptions import CoinError
from .explainer import ClusterEvidence, LinearBoundary, ResolutionProfile, explain_against_cluster
from .sampler import expand_outlier

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PriorKnowledge:
    """Per-attribute significance ``beta`` (>= 0) and expected direction ``p``.

    ``p[m] = +1`` means outliers are expected to take large values of
    attribute m, ``-1`` small values, ``0`` no preference.
    """

    beta: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        p = np.asarray(self.p, dtype=int)
        if beta.shape != p.shape or beta.ndim != 1:
            raise ValueError("beta and p must be vectors of equal length")
        if not np.all(np.isfinite(beta)) or np.any(beta < 0):
            raise ValueError("beta must be finite and nonnegative")
        if not np.all(np.isin(p, (-1, 0, 1))):
            raise ValueError("p entries must be -1, 0 or 1")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "p", p)

    @classmethod
    def neutral(cls, m: int) -> "PriorKnowledge":
        return cls(np.ones(m), np.zeros(m, dtype=int))

    @classmethod
    def from_config(cls, config: Config, m: int) -> "PriorKnowledge":
        return cls(_broadcast(config.beta, m, "beta"), _broadcast(config.p, m, "p"))

    def with_beta(self, beta) -> "PriorKnowledge":
        return PriorKnowledge(beta, self.p)


def _broadcast(value, m, name):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return np.full(m, arr[0])
    if arr.size != m:
        raise ValueError(f"{name} has {arr.size} entries for {m} attributes")
    return arr


@dataclass
class Interpretation:
    outlier_id: object
    abnormal_attributes: list  # (index, name, score), descending score
    outlierness: float
    clusters: list  # ClusterEvidence
    attribute_scores: np.ndarray
    base_outlierness: float = 0.0
    context_size: int = 0
    L: int = 0
    pruned_count: int = 0
    flags: list = field(default_factory=list)
    error: str | None = None

    @property
    def abnormal_indices(self) -> set:
        return {i for i, _, _ in self.abnormal_attributes}


# --- aggregation -------------------------------------------------------------

def aggregate_attribute_scores(evidence, context_size: int | None = None) -> np.ndarray:
    """Cluster-size weighted mean of per-cluster attribute scores."""
    if not evidence:
        raise ValueError("no cluster evidence")
    if context_size is None:
        context_size = sum(e.cluster_size for e in evidence)
    total = sum(e.cluster_size * e.scores for e in evidence)
    return total / context_size


def select_abnormal_attributes(scores, theta_rel: float = 0.1) -> list:
    """Indices whose score reaches ``theta_rel`` times the largest score, best first."""
    scores = np.asarray(scores, dtype=float)
    if np.any(scores < 0):
        raise ValueError("scores must be nonnegative")
    top = scores.max() if scores.size else 0.0
    if top <= 0:
        return []
    chosen = np.flatnonzero(scores >= theta_rel * top)
    return sorted(chosen.tolist(), key=lambda m: (-scores[m], m))


def base_outlierness(evidence, context_size: int | None = None) -> float:
    """Size-weighted margin to each cluster, each in units of that cluster's spacing."""
    if not evidence:
        raise ValueError("no cluster evidence")
    if context_size is None:
        context_size = sum(e.cluster_size for e in evidence)
    return sum(e.cluster_size * e.margin / e.resolution.cluster_gamma for e in evidence) / context_size


def prior_adjusted_cluster_outlierness(boundary: LinearBoundary, resolution: ResolutionProfile, outlier,
                                       prior: PriorKnowledge) -> float:
    """Margin to one cluster with non-conforming weight components removed and
    each component scaled by its significance.

    With inliers on the positive side, an attribute expected to be large for
    outliers (p=+1) conforms when its weight is negative, so only min(0, w)
    is kept; p=-1 keeps max(0, w); p=0 keeps w.
    """
    w = boundary.w
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        return 0.0
    g = abs(float(boundary.decision(outlier)))
    w_adj = np.where(prior.p > 0, np.minimum(0.0, w), np.where(prior.p < 0, np.maximum(0.0, w), w))
    vec = (g / (resolution.cluster_gamma * norm)) * (w_adj / norm) * prior.beta
    return float(np.linalg.norm(vec))


def overall_outlierness(evidence, prior: PriorKnowledge, outlier, context_size: int | None = None) -> float:
    if not evidence:
        raise ValueError("no cluster evidence")
    if context_size is None:
        context_size = sum(e.cluster_size for e in evidence)
    total = sum(e.cluster_size * prior_adjusted_cluster_outlierness(e.boundary, e.resolution, outlier, prior)
                for e in evidence)
    return total / context_size


# --- pipeline ----------------------------------------------------------------

def outlier_seed(master_seed: int, outlier_id) -> int:
    """Stable 64-bit seed from the master seed and the query id."""
    digest = hashlib.blake2b(f"{master_seed}:{outlier_id!r}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def interpret_outlier(dataset: Dataset, normal_ids, outlier_id, prior: PriorKnowledge | None = None,
                      config: Config | None = None, seed=None) -> Interpretation:
    """Interpret one query. Context and sampling errors are raised with the id attached."""
    config = config or Config()
    prior = prior or PriorKnowledge.from_config(config, dataset.m)
    if seed is None:
        seed = outlier_seed(config.master_seed, outlier_id)
    normal_ids = list(normal_ids)
    if outlier_id in set(normal_ids):
        raise ValueError(f"query {outlier_id!r} is listed among the normal instances")
    outlier = dataset.point(outlier_id)
    ctx_seed, sample_seed, fit_seed = seed_sequence(seed).spawn(3)
    flags = []
    try:
        context = build_context(dataset, normal_ids, outlier, config.context_fraction, config.k_min, outlier_id)
        points = dataset.values[dataset.rows(context.member_ids)]
        resolved = resolve_context(
            points, default_max_clusters(context.k, config.max_L), config.ps_threshold,
            config.min_cluster_fraction, ctx_seed, config.ps_splits, context.member_ids,
            n_init=config.kmeans_restarts)
        clusters = [c for c in resolved.clusters if c.size >= 2]
        if len(clusters) < len(resolved.clusters):
            flags.append("singleton_cluster_dropped")
        if not clusters:
            raise CoinError("no context cluster has two or more members")
        surviving = np.vstack([dataset.values[dataset.rows(c.member_ids)] for c in clusters])
        synthetic = expand_outlier(outlier, surviving, len(surviving), config.radius_factor, sample_seed)
        evidence = []
        for c, s in zip(clusters, fit_seed.spawn(len(clusters))):
            evidence.append(explain_against_cluster(
                outlier, dataset.values[dataset.rows(c.member_ids)], synthetic, config.lambda_grid,
                config.holdout_fraction, s, config.solver_max_iter, config.solver_tol, c.member_ids))
    except CoinError as exc:
        raise type(exc)(f"outlier {outlier_id!r}: {exc}") from exc

    size = sum(e.cluster_size for e in evidence)
    scores = aggregate_attribute_scores(evidence, size)
    chosen = select_abnormal_attributes(scores, config.theta_rel)
    d = overall_outlierness(evidence, prior, outlier, size)
    if any(e.degenerate for e in evidence):
        flags.append("zero_weight_cluster")
    if any(not e.boundary.converged for e in evidence):
        flags.append("solver_not_converged")
    if not chosen:
        flags.append("no_abnormal_attributes")
    if d < config.report_threshold:
        flags.append("low_outlierness")
    return Interpretation(
        outlier_id=outlier_id,
        abnormal_attributes=[(m, dataset.attribute_names[m], float(scores[m])) for m in chosen],
        outlierness=float(d),
        clusters=evidence,
        attribute_scores=scores,
        base_outlierness=float(base_outlierness(evidence, size)),
        context_size=size,
        L=resolved.L,
        pruned_count=resolved.pruned_count,
        flags=flags,
    )


def _failed(dataset: Dataset, outlier_id, exc: Exception) -> Interpretation:
    return Interpretation(outlier_id, [], 0.0, [], np.zeros(dataset.m), flags=["failed"], error=str(exc))


def interpret_all(dataset: Dataset, outliers, prior: PriorKnowledge | None = None, config: Config | None = None,
                  master_seed: int | None = None, normal_ids=None, threads: int | None = 1) -> list:
    """Interpret every query in ``outliers`` (a DetectionResult or an id list).

    Normal instances default to every instance not listed as a query; a
    query is always removed from its own normal set. Per-query failures are
    returned as flagged records. Results keep input order and do not depend
    on ``threads``.
    """
    config = config or Config()
    if master_seed is None:
        master_seed = config.master_seed
    ids = list(getattr(outliers, "outlier_ids", outliers))
    for i in ids:
        dataset.row(i)
    prior = prior or PriorKnowledge.from_config(config, dataset.m)
    if normal_ids is None:
        query_set = set(ids)
        base = [i for i in dataset.instance_ids if i not in query_set]
    else:
        base = list(normal_ids)

    def run(oid):
        normal = [i for i in base if i != oid]
        try:
            return interpret_outlier(dataset, normal, oid, prior, config, outlier_seed(master_seed, oid))
        except (CoinError, ValueError) as exc:
            log.warning("interpretation failed for %r: %s", oid, exc)
            return _failed(dataset, oid, exc)

    if threads is not None and threads <= 1:
        return [run(i) for i in ids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, ids))
