"""Independent reference computations used by the tests."""

import numpy as np
from scipy.optimize import linprog


def hinge_objective_many(X, y, W, lam):
    """Objective for every row of W, each with its exactly optimal intercept.

    The mean hinge is piecewise linear and convex in the intercept, so its
    minimum sits on a kink b = y_n - w.x_n; all kinks are evaluated.
    """
    F = W @ X.T  # (n_w, N)
    kinks = y[None, :] - F  # candidate intercepts, (n_w, N)
    # margins for every (w, kink, point)
    m = y[None, None, :] * (F[:, None, :] + kinks[:, :, None])
    hinge = np.maximum(0.0, 1.0 - m).mean(axis=2)
    best = hinge.min(axis=1)
    return best + lam * np.abs(W).sum(axis=1)


def grid_search(X, y, lam, radius=6.0, rounds=14):
    """Exhaustive lattice search over w (1-D or 2-D), zooming around the best cell.

    Returns the smallest objective found.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    m = X.shape[1]
    center = np.zeros(m)
    half = radius
    best = np.inf
    steps = (4001,) + (81,) * rounds if m == 1 else (401,) + (41,) * rounds
    for n in steps:
        axes = [np.linspace(c - half, c + half, n) for c in center]
        W = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
        W = np.vstack([W, np.zeros((1, m))])
        obj = hinge_objective_many(X, y, W, lam)
        i = int(obj.argmin())
        best = min(best, float(obj[i]))
        center = W[i]
        half = 6 * (2 * half / (n - 1))  # keep a six-cell margin around the best point
    return best


def lp_optimum(X, y, lam):
    """Exact minimum of mean hinge + lam*|w|_1 via the standard LP.

    Variables: w+ (M), w- (M), b+ , b-, xi (N), all nonnegative.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    N, M = X.shape
    c = np.concatenate([lam * np.ones(2 * M), [0.0, 0.0], np.ones(N) / N])
    # xi_n >= 1 - y_n (w.x_n + b)  ->  -y x w+ + y x w- - y b+ + y b- - xi <= -1
    A = np.hstack([-(y[:, None] * X), y[:, None] * X, -y[:, None], y[:, None], -np.eye(N)])
    res = linprog(c, A_ub=A, b_ub=-np.ones(N), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def kkt_residual(X, y, w, b, lam, active_tol=1e-3, zero_only=False):
    """Smallest t such that some valid hinge subgradient meets the optimality
    conditions to within t.

    alpha_n = 1 for points inside the margin, 0 outside, free in [0, 1] on it
    (|y f - 1| <= active_tol). With ``zero_only`` only the zero coordinates
    are checked: |dhinge/dw_m| <= lam + t. Otherwise nonzero coordinates must
    balance the penalty and the intercept derivative must vanish, too.
    Returns (t, max over zero coordinates of |dhinge/dw_m| - lam).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    N, M = X.shape
    f = y * (X @ w + b)
    fixed = np.where(f < 1 - active_tol, 1.0, 0.0)
    free = np.flatnonzero(np.abs(f - 1) <= active_tol)
    K = free.size
    # variables: alpha_free (K), t
    # dhinge/dw = -(1/N) sum alpha_n y_n x_n ; dhinge/db = -(1/N) sum alpha_n y_n
    G = -(y[:, None] * np.hstack([X, np.ones((N, 1))])) / N  # (N, M+1)
    base = fixed @ G
    Gf = G[free]  # (K, M+1)
    rows, rhs = [], []

    def bound(coef, const, limit):
        # |coef.alpha + const| <= limit + t
        rows.append(np.append(coef, -1.0))
        rhs.append(limit - const)
        rows.append(np.append(-coef, -1.0))
        rhs.append(limit + const)

    for j in range(M):
        if w[j] == 0.0:
            bound(Gf[:, j], base[j], lam)
        elif not zero_only:
            bound(Gf[:, j], base[j] + lam * np.sign(w[j]), 0.0)
    if not zero_only:
        bound(Gf[:, M], base[M], 0.0)
    if not rows:
        return 0.0, -np.inf
    c = np.zeros(K + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=[(0, 1)] * K + [(0, None)], method="highs")
    assert res.status == 0
    alpha = fixed.copy()
    alpha[free] = res.x[:K]
    grad = alpha @ G
    zero = [abs(grad[j]) - lam for j in range(M) if w[j] == 0.0]
    return float(res.x[-1]), (max(zero) if zero else -np.inf)


def _fixtures():
    rng = np.random.default_rng(2024)
    out = []
    # 1-D, separable, symmetric
    out.append((np.array([[2.0], [3.0], [-2.0], [-3.0]]), np.array([1, 1, -1, -1.0]), 0.01))
    # 1-D, overlapping classes
    out.append((np.array([[0.5], [1.0], [2.0], [-0.3], [-1.0], [0.8]]), np.array([1, 1, 1, -1, -1, -1.0]), 0.05))
    # 1-D, strong penalty drives w to zero
    out.append((np.array([[0.1], [0.2], [-0.1], [-0.2]]), np.array([1, 1, -1, -1.0]), 1.0))
    # 1-D, unbalanced classes
    out.append((np.array([[1.0], [1.5], [2.0], [2.5], [-1.0]]), np.array([1, 1, 1, 1, -1.0]), 0.02))
    # 2-D, only attribute 0 separates
    X = np.vstack([rng.normal([3, 0], [0.5, 1.0], (8, 2)), rng.normal([-3, 0], [0.5, 1.0], (8, 2))])
    out.append((X, np.array([1.0] * 8 + [-1.0] * 8), 0.05))
    # 2-D, diagonal separation
    X = np.vstack([rng.normal([1, 1], 0.4, (7, 2)), rng.normal([-1, -1], 0.4, (7, 2))])
    out.append((X, np.array([1.0] * 7 + [-1.0] * 7), 0.01))
    # 2-D, overlapping Gaussians
    X = np.vstack([rng.normal([0.5, 0], 1.0, (10, 2)), rng.normal([-0.5, 0], 1.0, (10, 2))])
    out.append((X, np.array([1.0] * 10 + [-1.0] * 10), 0.03))
    # 2-D, ball outlier class against a cluster (the shape the pipeline sees)
    X = np.vstack([rng.normal([0, 0], 1.0, (10, 2)), [4, 1] + 0.8 * rng.uniform(-1, 1, (10, 2))])
    out.append((X, np.array([1.0] * 10 + [-1.0] * 10), 0.1))
    # 2-D, anisotropic scales
    X = np.vstack([rng.normal([0, 2], [3.0, 0.3], (9, 2)), rng.normal([0, -2], [3.0, 0.3], (9, 2))])
    out.append((X, np.array([1.0] * 9 + [-1.0] * 9), 0.02))
    # 2-D, tiny penalty, near hard margin
    X = np.array([[1, 2], [2, 1], [2, 2], [-1, -1], [-2, 0], [0, -2.0]])
    out.append((X, np.array([1, 1, 1, -1, -1, -1.0]), 0.001))
    return out


SOLVER_FIXTURES = _fixtures()
