"""Synthetic benchmarks with planted outlying attributes, evaluation metrics,
the prior-weight sweep and the CA-lasso (CAL) baseline.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import Lasso
from sklearn.model_selection import StratifiedKFold

from ._seeding import seed_sequence
from .config import Config
from .context import build_context
from .data import Dataset
from .engine import PriorKnowledge, interpret_all, outlier_seed, overall_outlierness
from .sampler import expand_outlier

ENVELOPE_SIGMAS = 3.0


@dataclass(frozen=True)
class SyntheticSpec:
    variant: str = "SYN1"
    n_inliers: int = 375
    n_outliers: int = 30
    M: int = 15
    n_clusters: int = 5
    seed: int = 0
    q_range: tuple = (2, 5)
    margin_sigmas: tuple = (1.0, 3.0)  # planted distance beyond the envelopes, in parent std

    def __post_init__(self):
        object.__setattr__(self, "variant", self.variant.upper())
        if self.variant not in ("SYN1", "SYN2"):
            raise ValueError(f"unknown variant {self.variant!r}")
        lo, hi = self.q_range
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid q_range {self.q_range}")
        if hi > self.M:
            raise ValueError(f"cannot plant {hi} attributes among M={self.M}")
        if self.variant == "SYN2" and self.n_clusters < 2:
            raise ValueError("SYN2 needs at least two clusters")
        if self.n_inliers < self.n_clusters:
            raise ValueError("fewer inliers than clusters")


@dataclass
class GroundTruth:
    planted: dict  # outlier id -> sorted tuple of attribute indices
    labels: np.ndarray  # True for outliers, aligned with dataset rows
    means: np.ndarray = field(default=None, repr=False)
    stds: np.ndarray = field(default=None, repr=False)
    parents: dict = field(default_factory=dict)  # outlier id -> tuple of cluster indices

    @property
    def outlier_ids(self) -> list:
        return list(self.planted)

    def envelopes(self):
        """(low, high) arrays of shape (n_clusters, M)."""
        return self.means - ENVELOPE_SIGMAS * self.stds, self.means + ENVELOPE_SIGMAS * self.stds

    def to_json(self) -> str:
        return json.dumps({str(k): list(map(int, v)) for k, v in self.planted.items()}, indent=2)

    @classmethod
    def from_json(cls, text: str, dataset: Dataset) -> "GroundTruth":
        raw = json.loads(text)
        planted = {dataset.resolve_id(k): tuple(sorted(int(m) for m in v)) for k, v in raw.items()}
        labels = np.zeros(dataset.n, dtype=bool)
        labels[dataset.rows(planted)] = True
        return cls(planted, labels)


def save_truth(truth: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(truth.to_json() + "\n")


def load_truth(path, dataset: Dataset) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        return GroundTruth.from_json(fh.read(), dataset)


# --- generator ---------------------------------------------------------------

def _truncated_normal(rng, mean, std, size, limit=ENVELOPE_SIGMAS):
    """Gaussian draws resampled until every entry lies within +-limit std."""
    z = rng.standard_normal(size)
    bad = np.abs(z) > limit
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > limit
    return mean + std * z


def _free_value(axis_low, axis_high, start, margin, rng):
    """Nearest value to ``start`` lying at least ``margin`` outside every interval.

    Direction (up or down) goes to whichever needs the shorter move; ties
    are broken at random.
    """
    lows, highs = axis_low - margin, axis_high + margin

    def walk(v, up):
        moved = True
        while moved:
            moved = False
            inside = (lows <= v) & (v <= highs)
            if inside.any():
                v = highs[inside].max() + 1e-9 if up else lows[inside].min() - 1e-9
                moved = True
        return v

    up, down = walk(start, True), walk(start, False)
    du, dd = up - start, start - down
    if du == dd:
        return up if rng.random() < 0.5 else down
    return up if du < dd else down


def _equal_offset_values(mean, std, low_env, high_env, q, margin_sigmas, rng, tries=100):
    """Plant q attributes at one shared offset beyond the parent's envelope.

    The offset is (3 + u) parent std with u drawn once per outlier, so
    every planted attribute is displaced by the same relative amount. Only
    axes where the displaced value (on either side) clears every cluster's
    envelope are eligible; u is redrawn when fewer than q axes qualify.
    Returns {axis: value}.
    """
    M = mean.size
    for _ in range(tries):
        u = rng.uniform(*margin_sigmas)
        shift = (ENVELOPE_SIGMAS + u) * std
        sides = []
        for v in (mean + shift, mean - shift):
            inside = (low_env <= v) & (v <= high_env)
            sides.append(~inside.any(axis=0))
        up_ok, down_ok = sides
        eligible = np.flatnonzero(up_ok | down_ok)
        if eligible.size < q:
            continue
        axes = np.sort(rng.choice(eligible, q, replace=False))
        out = {}
        for m in axes.tolist():
            up = bool(up_ok[m]) if not (up_ok[m] and down_ok[m]) else rng.random() < 0.5
            out[m] = float(mean[m] + shift[m] if up else mean[m] - shift[m])
        return out
    raise RuntimeError(f"could not find {q} attributes to plant at a common offset")


def _cluster_params(spec: SyntheticSpec, rng):
    means = rng.uniform(-10, 10, (spec.n_clusters, spec.M))
    stds = rng.uniform(0.5, 1.5, (spec.n_clusters, spec.M))
    return means, stds


def _twin_pairs(means, stds, rng, n_gap_axes=2, margin_sigmas=(1.0, 3.0)):
    """Turn consecutive clusters into pairs that coincide except on a few gap axes.

    On each gap axis the pair straddles a centre value lying outside every
    other cluster's envelope, far enough apart that the centre is also
    outside both of their own envelopes. Returns [(a, b, gap_axes, centre)].
    """
    n_clusters, M = means.shape
    pairs = []
    for a in range(0, n_clusters - 1, 2):
        b = a + 1
        means[b] = means[a]
        axes = np.sort(rng.choice(M, n_gap_axes, replace=False))
        centre = np.empty(n_gap_axes)
        others = [j for j in range(n_clusters) if j not in (a, b)]
        for t, m in enumerate(axes):
            half = ENVELOPE_SIGMAS * max(stds[a, m], stds[b, m]) + rng.uniform(*margin_sigmas) * max(stds[a, m], stds[b, m])
            low = means[others, m] - ENVELOPE_SIGMAS * stds[others, m]
            high = means[others, m] + ENVELOPE_SIGMAS * stds[others, m]
            c = _free_value(low, high, rng.uniform(-10, 10), rng.uniform(*margin_sigmas) * stds[a, m], rng)
            centre[t] = c
            means[a, m], means[b, m] = c - half, c + half
        pairs.append((a, b, tuple(int(m) for m in axes), centre))
    return pairs


def generate_synthetic(spec: SyntheticSpec):
    """Gaussian clusters plus outliers with planted outlying attributes.

    Inliers are Gaussian draws truncated to +-3 std per axis. Planted
    attributes end up outside every cluster's +-3 std envelope; other
    attributes keep a truncated draw from the parent cluster.

    SYN1: each outlier derives from a single parent cluster. All its planted
    attributes sit at one common offset of 3 + u parent std from the parent
    mean, u drawn once per outlier from ``margin_sigmas``, on axes where
    that offset clears every envelope.
    SYN2: clusters come in twin pairs that differ only on two gap axes. An
    outlier sits at the midpoint of a pair, so on the gap axes it lies above
    one twin and below the other (outside both envelopes); those axes plus
    extra planted attributes form its truth. An extra attribute moves to the
    nearest value lying u parent std beyond every envelope. Unplanted
    attributes are drawn within both twins' envelopes.
    """
    rng = np.random.default_rng(spec.seed)
    means, stds = _cluster_params(spec, rng)
    pairs = _twin_pairs(means, stds, rng, margin_sigmas=spec.margin_sigmas) if spec.variant == "SYN2" else []
    sizes = np.full(spec.n_clusters, spec.n_inliers // spec.n_clusters)
    sizes[: spec.n_inliers % spec.n_clusters] += 1
    inliers = np.vstack([
        _truncated_normal(rng, means[j], stds[j], (sizes[j], spec.M)) for j in range(spec.n_clusters)
    ])
    low_env, high_env = means - ENVELOPE_SIGMAS * stds, means + ENVELOPE_SIGMAS * stds
    lo_q, hi_q = spec.q_range
    outliers, planted, parents = [], [], []
    for _ in range(spec.n_outliers):
        if spec.variant == "SYN1":
            j = int(rng.integers(spec.n_clusters))
            x = _truncated_normal(rng, means[j], stds[j], spec.M)
            q = int(rng.integers(lo_q, hi_q + 1))
            moved = _equal_offset_values(means[j], stds[j], low_env, high_env, q, spec.margin_sigmas, rng)
            x[list(moved)] = list(moved.values())
            axes, parent = set(moved), (j,)
        else:
            a, b, gap_axes, centre = pairs[int(rng.integers(len(pairs)))]
            sigma = np.minimum(stds[a], stds[b])
            x = _truncated_normal(rng, means[a], sigma, spec.M)
            x[list(gap_axes)] = centre
            q = int(rng.integers(max(lo_q, len(gap_axes)), hi_q + 1))
            rest = [m for m in range(spec.M) if m not in gap_axes]
            extra = rng.choice(rest, q - len(gap_axes), replace=False).tolist()
            for m in sorted(extra):
                margin = rng.uniform(*spec.margin_sigmas) * sigma[m]
                x[m] = _free_value(low_env[:, m], high_env[:, m], means[a, m], margin, rng)
            axes, parent = set(extra) | set(gap_axes), (a, b)
        outliers.append(x)
        planted.append(tuple(sorted(int(m) for m in axes)))
        parents.append(parent)
    values = np.vstack([inliers] + outliers) if outliers else inliers
    dataset = Dataset.from_array(values)
    ids = dataset.instance_ids[spec.n_inliers:]
    labels = np.zeros(dataset.n, dtype=bool)
    labels[spec.n_inliers:] = True
    truth = GroundTruth(dict(zip(ids, planted)), labels, means, stds, dict(zip(ids, parents)))
    return dataset, truth


def envelope_violations(dataset: Dataset, truth: GroundTruth) -> list:
    """Check planted attributes lie outside every envelope and the rest inside the parents'.

    Returns a list of human-readable violations (empty when sound).
    """
    low, high = truth.envelopes()
    problems = []
    for oid, axes in truth.planted.items():
        x = dataset.point(oid)
        parents = truth.parents[oid]
        for m in range(dataset.m):
            if m in axes:
                inside = (low[:, m] <= x[m]) & (x[m] <= high[:, m])
                if inside.any():
                    problems.append(f"{oid}: planted attribute {m} inside cluster {np.flatnonzero(inside)[0]}")
            else:
                for j in parents:
                    if not low[j, m] <= x[m] <= high[j, m]:
                        problems.append(f"{oid}: attribute {m} outside parent cluster {j}")
    return problems


def augment_noise_attributes(dataset: Dataset, count: int, scale: float = 0.1, seed=0, prefix: str = "noise"):
    """Append ``count`` i.i.d. N(0, (scale * mean attribute std)^2) columns.

    Returns the widened dataset and the indices of the new columns.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    sigma = float(dataset.values.std(axis=0).mean())
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((dataset.n, count)) * (scale * sigma)
    names = [f"{prefix}{j}" for j in range(count)]
    return dataset.with_columns(extra, names), list(range(dataset.m, dataset.m + count))


# --- metrics -----------------------------------------------------------------

def attribute_prf(predicted: dict, truth: dict):
    """Precision and recall averaged over queries; F1 is their harmonic mean.

    An empty prediction (or truth) facing a nonempty counterpart scores 0;
    both empty scores 1.
    """
    if set(predicted) != set(truth):
        raise ValueError("predicted and truth cover different outlier ids")
    if not truth:
        raise ValueError("no queries to evaluate")
    ps, rs = [], []
    for oid, true_set in truth.items():
        pred, true_set = set(predicted[oid]), set(true_set)
        hit = len(pred & true_set)
        if not pred and not true_set:
            ps.append(1.0)
            rs.append(1.0)
            continue
        ps.append(hit / len(pred) if pred else 0.0)
        rs.append(hit / len(true_set) if true_set else 0.0)
    p, r = float(np.mean(ps)), float(np.mean(rs))
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def ranking_auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative, ties counting half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ranking_auc needs both positive and negative labels")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


# --- CAL baseline --------------------------------------------------------------

def _lasso_fit(X, y, alpha):
    mu, sd = X.mean(axis=0), X.std(axis=0)
    sd[sd == 0] = 1.0
    model = Lasso(alpha=alpha, max_iter=10000, tol=1e-6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model.fit((X - mu) / sd, y)
    coef = model.coef_ / sd
    return coef, float(model.intercept_ - coef @ mu)


def _lasso_accuracy(X, y, alpha, train, test):
    coef, b = _lasso_fit(X[train], y[train], alpha)
    pred = np.where(X[test] @ coef + b > 0, 1.0, -1.0)
    return float(np.mean(pred == y[test]))


def baseline_cal(dataset: Dataset, outlier_id, config: Config | None = None, seed=0, normal_ids=None,
                 alpha: float | None = None):
    """CA-lasso: one two-class problem against the whole, unclustered context.

    Fits a lasso of the +-1 label on standardized attributes; selected
    attributes are the nonzero coefficients, the outlierness is the k-fold
    cross-validated accuracy of the sign of the fit. ``alpha`` defaults to
    the grid value with the best cross-validated accuracy (ties go larger).
    Returns (sorted attribute indices, outlierness).
    """
    config = config or Config()
    if normal_ids is None:
        normal_ids = [i for i in dataset.instance_ids if i != outlier_id]
    outlier = dataset.point(outlier_id)
    ctx_seed, sample_seed, cv_seed = seed_sequence(seed).spawn(3)
    context = build_context(dataset, normal_ids, outlier, config.context_fraction, config.k_min, outlier_id)
    ctx_points = dataset.values[dataset.rows(context.member_ids)]
    synthetic = expand_outlier(outlier, ctx_points, len(ctx_points), config.radius_factor, sample_seed)
    X = np.vstack([ctx_points, synthetic.points])
    y = np.concatenate([np.ones(len(ctx_points)), -np.ones(len(synthetic))])
    folds = min(config.cal_folds, len(ctx_points), len(synthetic))
    splitter = StratifiedKFold(n_splits=folds, shuffle=True,
                               random_state=int(np.random.default_rng(cv_seed).integers(2**31)))
    splits = list(splitter.split(X, y))

    def cv_accuracy(a):
        return float(np.mean([_lasso_accuracy(X, y, a, tr, te) for tr, te in splits]))

    if alpha is None:
        best_acc = -1.0
        for a in sorted(config.cal_alpha_grid, reverse=True):
            acc = cv_accuracy(a)
            if acc > best_acc:
                alpha, best_acc = a, acc
        score = best_acc
    else:
        score = cv_accuracy(alpha)
    coef, _ = _lasso_fit(X, y, alpha)
    chosen = sorted(np.flatnonzero(np.abs(coef) > 1e-6).tolist())
    return chosen, score


# --- protocols -------------------------------------------------------------------

def inlier_queries(truth: GroundTruth, dataset: Dataset, count: int, seed) -> list:
    inliers = [dataset.instance_ids[r] for r in np.flatnonzero(~truth.labels)]
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(inliers), size=min(count, len(inliers)), replace=False)
    return [inliers[i] for i in sorted(pick)]


def normal_pool(dataset: Dataset, truth: GroundTruth) -> list:
    return [dataset.instance_ids[r] for r in np.flatnonzero(~truth.labels)]


def coin_faithfulness(dataset: Dataset, truth: GroundTruth, config: Config | None = None, threads: int = 1):
    config = config or Config()
    results = interpret_all(dataset, truth.outlier_ids, None, config, config.master_seed,
                            normal_ids=normal_pool(dataset, truth), threads=threads)
    predicted = {r.outlier_id: r.abnormal_indices for r in results}
    return attribute_prf(predicted, truth.planted), results


def cal_faithfulness(dataset: Dataset, truth: GroundTruth, config: Config | None = None):
    config = config or Config()
    normal = normal_pool(dataset, truth)
    predicted = {}
    for oid in truth.outlier_ids:
        chosen, _ = baseline_cal(dataset, oid, config, outlier_seed(config.master_seed, oid), normal)
        predicted[oid] = set(chosen)
    return attribute_prf(predicted, truth.planted)


def ranking_queries(dataset: Dataset, truth: GroundTruth, seed):
    """True outliers plus an equal number of inliers sampled without replacement."""
    outs = truth.outlier_ids
    ins = inlier_queries(truth, dataset, len(outs), seed)
    return outs + ins, np.array([True] * len(outs) + [False] * len(ins))


def coin_ranking(dataset: Dataset, truth: GroundTruth, config: Config | None = None, seed=0, threads: int = 1):
    config = config or Config()
    queries, labels = ranking_queries(dataset, truth, seed)
    results = interpret_all(dataset, queries, None, config, config.master_seed,
                            normal_ids=normal_pool(dataset, truth), threads=threads)
    return ranking_auc([r.outlierness for r in results], labels), results, labels


def cal_ranking(dataset: Dataset, truth: GroundTruth, config: Config | None = None, seed=0):
    config = config or Config()
    queries, labels = ranking_queries(dataset, truth, seed)
    normal = normal_pool(dataset, truth)
    scores = []
    for q in queries:
        pool = [i for i in normal if i != q]
        scores.append(baseline_cal(dataset, q, config, outlier_seed(config.master_seed, q), pool)[1])
    return ranking_auc(scores, labels)


def beta_sweep(dataset: Dataset, queries, labels, simulated, beta_grid, config: Config | None = None,
               seed=None, normal_ids=None, threads: int = 1, interpretations=None):
    """Outlierness ranking AUC as the weight on the simulated attributes varies.

    Original attributes keep weight 1 and p is zero everywhere. The local
    classifiers do not depend on the weights, so each query is interpreted
    once and rescored for every grid value. Returns [(beta, auc)].
    """
    config = config or Config()
    seed = config.master_seed if seed is None else seed
    labels = np.asarray(labels, dtype=bool)
    if interpretations is None:
        interpretations = interpret_all(dataset, queries, None, config, seed, normal_ids=normal_ids, threads=threads)
    simulated = np.asarray(sorted(simulated), dtype=int)
    out = []
    for beta in beta_grid:
        weights = np.ones(dataset.m)
        weights[simulated] = beta
        prior = PriorKnowledge(weights, np.zeros(dataset.m, dtype=int))
        scores = [_rescore(r, prior, dataset) for r in interpretations]
        out.append((float(beta), ranking_auc(scores, labels)))
    return out


def _rescore(interp, prior, dataset):
    if not interp.clusters:
        return 0.0
    return overall_outlierness(interp.clusters, prior, dataset.point(interp.outlier_id), interp.context_size)


def block_removed_auc(dataset: Dataset, interpretations, labels, simulated) -> float:
    """AUC when the simulated attributes are dropped from every weight vector.

    Uses the same fitted boundaries; the prior-weighted margin is evaluated
    on the original attribute block only.
    """
    keep = np.setdiff1d(np.arange(dataset.m), np.asarray(list(simulated), dtype=int))
    prior = PriorKnowledge.neutral(keep.size)
    scores = []
    for r in interpretations:
        if not r.clusters:
            scores.append(0.0)
            continue
        o = dataset.point(r.outlier_id)
        total = 0.0
        for e in r.clusters:
            w = e.boundary.w
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                continue
            g = abs(float(e.boundary.decision(o)))
            vec = (g / (e.resolution.cluster_gamma * norm)) * (w[keep] / norm) * prior.beta
            total += e.cluster_size * float(np.linalg.norm(vec))
        scores.append(total / r.context_size)
    return ranking_auc(scores, labels)


def run_beta_sweep(dataset: Dataset, truth: GroundTruth, beta_grid=(0, 0.5, 1, 1.5, 2), config: Config | None = None,
                   seeds=(0,), threads: int = 1):
    """Append M simulated attributes, then sweep their weight for each seed.

    Returns (per-seed list of [(beta, auc)], per-seed block-removed AUC).
    """
    config = config or Config()
    per_seed, removed = [], []
    for s in seeds:
        wide, simulated = augment_noise_attributes(dataset, dataset.m, config.simulated_scale, seed=s, prefix="sim")
        queries, labels = ranking_queries(wide, truth, s)
        results = interpret_all(wide, queries, None, config, config.master_seed + int(s),
                                normal_ids=normal_pool(wide, truth), threads=threads)
        per_seed.append(beta_sweep(wide, queries, labels, simulated, beta_grid, config, interpretations=results))
        removed.append(block_removed_auc(wide, results, labels, simulated))
    return per_seed, removed


def summarize_sweep(per_seed):
    """Rows of (beta, mean, 25th percentile, 75th percentile) across seeds."""
    betas = [b for b, _ in per_seed[0]]
    aucs = np.array([[a for _, a in run] for run in per_seed])
    return [(b, float(aucs[:, i].mean()), float(np.percentile(aucs[:, i], 25)), float(np.percentile(aucs[:, i], 75)))
            for i, b in enumerate(betas)]


def trend_ok(aucs, max_inversions: int = 1, inversion_tol: float = 0.02) -> bool:
    """Non-increasing up to ``max_inversions`` adjacent rises of at most ``inversion_tol``."""
    rises = [b - a for a, b in zip(aucs, aucs[1:]) if b > a]
    return len(rises) <= max_inversions and all(r <= inversion_tol for r in rises)
