"""Local L1-regularized max-margin classifiers and the evidence read off them.

For one context cluster the outlier class (label -1) is separated from the
cluster (label +1) by a sparse linear boundary. Attribute scores are the
absolute weights divided by the per-axis nearest-neighbor spacing of the
cluster; the margin is the geometric distance of the outlier to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import SolverError
from .sampler import SyntheticOutlierClass

RESOLUTION_FLOOR = 1e-8
DEFAULT_LAMBDA_GRID = (0.001, 0.003, 0.01, 0.03, 0.1, 0.3)


@dataclass(frozen=True)
class LinearBoundary:
    """g(x) = w.x + intercept, inliers on the positive side."""

    w: np.ndarray
    intercept: float
    penalty: float
    objective: float
    converged: bool
    n_iter: int = 0
    history: tuple = ()
    label_convention: str = "inliers=+1, outliers=-1"

    def decision(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.w + self.intercept

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.w))


@dataclass(frozen=True)
class ResolutionProfile:
    per_attribute: np.ndarray
    cluster_gamma: float


@dataclass(frozen=True)
class ClusterEvidence:
    member_ids: tuple
    centroid: np.ndarray
    boundary: LinearBoundary
    resolution: ResolutionProfile
    scores: np.ndarray
    decision_value: float
    margin: float

    @property
    def cluster_size(self) -> int:
        return len(self.member_ids)

    @property
    def degenerate(self) -> bool:
        return not np.any(self.boundary.w)


def hinge_objective(X, y, w, intercept, lam) -> float:
    margins = y * (X @ w + intercept)
    return float(np.maximum(0.0, 1.0 - margins).mean() + lam * np.abs(w).sum())


@njit(cache=True, nogil=True)
def _admm(A, Kinv, lam, rho, max_iter, tol, check_every):
    """ADMM on min (1/N) sum max(0, u_n) + lam*|z|_1  s.t.  u = 1 - A x,  z = x[:M].

    x = (w, b) and A has rows y_n * (z_n, 1). Returns the best (z, b) seen at
    the checkpoints, where z is the soft-thresholded copy of w.
    """
    N, M1 = A.shape
    M = M1 - 1
    x = np.zeros(M1)
    u = np.ones(N)
    z = np.zeros(M)
    v1 = np.zeros(N)
    v2 = np.zeros(M)
    c = 1.0 / (N * rho)
    kappa = lam / rho
    best_obj = np.inf
    best_z = z.copy()
    best_b = 0.0
    prev = np.inf
    history = np.empty(max_iter // check_every + 1)
    n_checks = 0
    converged = False
    it = 0
    rhs = np.empty(M1)
    for it in range(1, max_iter + 1):
        q = 1.0 - u - v1
        for j in range(M1):
            s = 0.0
            for n in range(N):
                s += A[n, j] * q[n]
            rhs[j] = s
        for j in range(M):
            rhs[j] += z[j] - v2[j]
        x = Kinv @ rhs
        Ax = A @ x
        for n in range(N):
            t = 1.0 - Ax[n] - v1[n]
            if t > c:
                u[n] = t - c
            elif t < 0.0:
                u[n] = t
            else:
                u[n] = 0.0
        for j in range(M):
            e = x[j] + v2[j]
            if e > kappa:
                z[j] = e - kappa
            elif e < -kappa:
                z[j] = e + kappa
            else:
                z[j] = 0.0
        primal = 0.0
        for n in range(N):
            r = Ax[n] + u[n] - 1.0
            v1[n] += r
            primal += r * r
        for j in range(M):
            r = x[j] - z[j]
            v2[j] += r
            primal += r * r
        if it % check_every == 0 or it == max_iter:
            hinge = 0.0
            for n in range(N):
                g = 0.0
                for j in range(M):
                    g += A[n, j] * z[j]
                g += A[n, M] * x[M]
                if g < 1.0:
                    hinge += 1.0 - g
            obj = hinge / N + lam * np.abs(z).sum()
            if obj < best_obj:
                best_obj = obj
                best_z[:] = z
                best_b = x[M]
            history[n_checks] = best_obj
            n_checks += 1
            if abs(prev - obj) <= tol * max(abs(obj), 1e-12) and np.sqrt(primal / N) < 1e-4:
                converged = True
                break
            prev = obj
    return best_z, best_b, best_obj, it, converged, history[:n_checks]


def fit_l1_maxmargin(inliers, outliers, penalty: float, max_iter: int = 5000, tol: float = 1e-6,
                     check_every: int = 25) -> LinearBoundary:
    """Minimise mean hinge loss + penalty * ||w||_1 with an unpenalized intercept.

    Inliers get label +1, outliers -1. The problem is solved on centred data
    divided by its RMS radius and mapped back, which makes the fit exactly
    covariant under a joint rescaling of data and penalty.
    """
    inliers = np.atleast_2d(np.asarray(inliers, dtype=float))
    outliers = np.atleast_2d(np.asarray(outliers, dtype=float))
    if inliers.shape[0] == 0 or outliers.shape[0] == 0:
        raise ValueError("both classes must be nonempty")
    if inliers.shape[1] != outliers.shape[1]:
        raise ValueError("classes have different dimensions")
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    X = np.vstack([inliers, outliers])
    y = np.concatenate([np.ones(len(inliers)), -np.ones(len(outliers))])
    n, m = X.shape
    center = X.mean(axis=0)
    scale = float(np.sqrt(((X - center) ** 2).sum(axis=1).mean()))
    if scale == 0.0:
        scale = 1.0
    Z = (X - center) / scale
    A = y[:, None] * np.hstack([Z, np.ones((n, 1))])
    K = A.T @ A
    K[:m, :m] += np.eye(m)
    Kinv = np.linalg.inv(K)
    z, b, _, n_iter, converged, history = _admm(
        np.ascontiguousarray(A), np.ascontiguousarray(Kinv), penalty / scale, 1.0 / n,
        max_iter, tol, check_every)
    w = z / scale
    intercept = float(b - w @ center)
    objective = hinge_objective(X, y, w, intercept, penalty)
    if not np.isfinite(objective) or not np.all(np.isfinite(w)):
        raise SolverError("non-finite objective")
    return LinearBoundary(w, intercept, penalty, objective, bool(converged), int(n_iter),
                          tuple(float(h) for h in history))


def holdout_split(n_in: int, n_out: int, holdout_fraction: float, rng):
    """Stratified split; each class keeps at least one point on both sides."""
    def split(n):
        perm = rng.permutation(n)
        h = min(max(1, int(round(holdout_fraction * n))), n - 1)
        return perm[h:], perm[:h]
    return split(n_in), split(n_out)


def accuracy(boundary: LinearBoundary, inliers, outliers) -> float:
    correct = np.sum(boundary.decision(inliers) > 0) + np.sum(boundary.decision(outliers) < 0)
    return float(correct) / (len(inliers) + len(outliers))


def select_penalty(inliers, outliers, grid=DEFAULT_LAMBDA_GRID, holdout_fraction: float = 0.2,
                   seed=0, max_iter: int = 5000, tol: float = 1e-6) -> float:
    """Grid penalty with the best holdout accuracy; ties go to the larger penalty."""
    grid = sorted(set(float(g) for g in grid), reverse=True)
    if not grid:
        raise ValueError("penalty grid is empty")
    if len(grid) == 1:
        return grid[0]
    inliers = np.asarray(inliers, dtype=float)
    outliers = np.asarray(outliers, dtype=float)
    if len(inliers) < 4 or len(outliers) < 4:
        raise ValueError("penalty selection needs at least 4 points per class")
    rng = np.random.default_rng(seed)
    (tr_in, ho_in), (tr_out, ho_out) = holdout_split(len(inliers), len(outliers), holdout_fraction, rng)
    best, best_acc = grid[0], -1.0
    for lam in grid:
        fit = fit_l1_maxmargin(inliers[tr_in], outliers[tr_out], lam, max_iter, tol)
        acc = accuracy(fit, inliers[ho_in], outliers[ho_out])
        if acc > best_acc:
            best, best_acc = lam, acc
    return best


def attribute_resolution(cluster_points) -> ResolutionProfile:
    """Mean per-axis gap between each member and its nearest other member.

    The neighbor is found in the full space; the gap is then taken per axis.
    """
    P = np.atleast_2d(np.asarray(cluster_points, dtype=float))
    if P.shape[0] < 2:
        raise ValueError("resolution needs at least two cluster members")
    d = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    nn = d.argmin(axis=1)  # first index wins ties
    per_axis = np.abs(P - P[nn]).mean(axis=0)
    gamma = float(d[np.arange(P.shape[0]), nn].mean())
    return ResolutionProfile(np.maximum(per_axis, RESOLUTION_FLOOR), max(gamma, RESOLUTION_FLOOR))


def evidence_from_boundary(outlier, boundary: LinearBoundary, resolution: ResolutionProfile,
                           member_ids=(), centroid=None) -> ClusterEvidence:
    outlier = np.asarray(outlier, dtype=float)
    g = float(boundary.decision(outlier))
    norm = float(np.linalg.norm(boundary.w))
    if norm == 0.0:
        scores = np.zeros_like(boundary.w)
        margin = 0.0
    else:
        scores = np.abs(boundary.w) / resolution.per_attribute
        margin = abs(g) / norm
    if centroid is None:
        centroid = np.full_like(boundary.w, np.nan)
    return ClusterEvidence(tuple(member_ids), np.asarray(centroid), boundary, resolution, scores, g, margin)


def explain_against_cluster(outlier, cluster_points, synthetic: SyntheticOutlierClass, lambda_grid=DEFAULT_LAMBDA_GRID,
                            holdout_fraction: float = 0.2, seed=0, max_iter: int = 5000, tol: float = 1e-6,
                            member_ids=()) -> ClusterEvidence:
    cluster_points = np.atleast_2d(np.asarray(cluster_points, dtype=float))
    if len(lambda_grid) == 1 or len(cluster_points) < 4 or len(synthetic) < 4:
        # too few points to hold any out; fall back to the sparsest grid value
        lam = float(max(lambda_grid))
    else:
        lam = select_penalty(cluster_points, synthetic.points, lambda_grid, holdout_fraction, seed, max_iter, tol)
    boundary = fit_l1_maxmargin(cluster_points, synthetic.points, lam, max_iter, tol)
    resolution = attribute_resolution(cluster_points)
    return evidence_from_boundary(outlier, boundary, resolution, member_ids, cluster_points.mean(axis=0))
