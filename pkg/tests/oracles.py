"""Independent brute-force oracles used across the test suite.

Everything here recomputes quantities from first principles (dense angle
grids, exhaustive SVD-based ray enumeration, interval scans) without using
the library's closed forms, so disagreements point at real bugs.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

TWO_PI = 2.0 * math.pi


def sign01(v):
    return np.where(np.asarray(v) >= 0.0, 1, -1)


# ---------------------------------------------------------------------------
# 2-d linear separators on an angle grid
# ---------------------------------------------------------------------------


def consistent_angles(X, y, step=1e-4):
    """Grid angles whose separators classify (X, y) perfectly."""
    phis = np.arange(-math.pi, math.pi, step)
    W = np.column_stack([np.cos(phis), np.sin(phis)])
    preds = sign01(W @ X.T)  # (n_phi, m)
    ok = np.all(preds == y[None, :], axis=1)
    return phis[ok], W[ok]


def membership_2d(X, y, z, step=1e-4):
    """-1/0/+1 membership of z from the consistent angle grid."""
    _, W = consistent_angles(X, y, step)
    labels = np.unique(sign01(W @ np.asarray(z)))
    if labels.size > 1:
        return 0
    return int(labels[0])


def dis_direction_mask(X, y, step=1e-3):
    """For each grid direction, whether a point on that ray is disputed."""
    phis, W = consistent_angles(X, y, step)
    dirs = np.arange(-math.pi, math.pi, step)
    D = np.column_stack([np.cos(dirs), np.sin(dirs)])
    disputed = np.empty(dirs.size, dtype=bool)
    for lo in range(0, dirs.size, 4096):  # chunked to bound memory
        margins = W @ D[lo : lo + 4096].T
        signs = sign01(margins)
        disputed[lo : lo + 4096] = np.any(signs != signs[:1, :], axis=0)
    return dirs, disputed


def radius_2d_bruteforce(X, y, z, eta_step=1e-4, angle_step=2e-4):
    """Largest grid eta whose ball around z avoids every disputed ray.

    The disputed set is a union of rays through the origin (from the angle
    grid); the ball of radius eta avoids a ray at angle psi iff the
    point-to-ray distance exceeds eta.
    """
    z = np.asarray(z, dtype=float)
    dirs, disputed = dis_direction_mask(X, y, step=angle_step)
    if not np.any(disputed):
        return math.inf
    rho = float(np.linalg.norm(z))
    theta = math.atan2(z[1], z[0])
    delta = np.abs(np.remainder(dirs[disputed] - theta + math.pi, TWO_PI) - math.pi)
    ray_dist = np.where(delta >= math.pi / 2.0, rho, rho * np.sin(delta))
    true_dist = float(np.min(ray_dist))
    etas = np.arange(0.0, true_dist + 2.0 * eta_step, eta_step)
    ok = etas <= true_dist
    return float(etas[ok][-1]) if np.any(ok) else 0.0


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------


def interval_bounds(X, y):
    coords = X[:, 0]
    neg = coords[y < 0]
    pos = coords[y > 0]
    lo = float(np.max(neg)) if neg.size else -math.inf
    hi = float(np.min(pos)) if pos.size else math.inf
    return lo, hi


def membership_threshold(X, y, z):
    lo, hi = interval_bounds(X, y)
    u = float(np.asarray(z).reshape(-1)[0])
    if u < hi and (u > lo or (u == lo)):
        if u == lo:
            return -1
        return 0
    return 1 if u >= hi else -1


def radius_threshold_bruteforce(X, y, z, eta_step=1e-4):
    """Grid search over eta with interval ball-in-agreement checks."""
    lo, hi = interval_bounds(X, y)
    u = float(np.asarray(z).reshape(-1)[0])
    if lo < u < hi:
        return 0.0
    etas = np.arange(0.0, max(abs(u - lo), abs(u - hi)) + 1.0, eta_step)
    ok = (u - etas >= hi) | (u + etas <= lo)
    return float(etas[ok][-1]) if np.any(ok) else 0.0


def lift_threshold_dataset(X, y):
    """Embed 1-d threshold data where cut rules become homogeneous linear."""
    coords = np.asarray(X, dtype=float).reshape(-1, 1)
    return np.hstack([coords, np.ones_like(coords)]), np.asarray(y)


# ---------------------------------------------------------------------------
# cones: exhaustive ray enumeration via SVD (distinct from the package's
# determinant-cofactor route)
# ---------------------------------------------------------------------------


def cone_min_abs_inner_svd(A, z, sign):
    """min <w, sign*z> over unit w with A w >= 0, via all (d-1)-subsets."""
    A = np.asarray(A, dtype=float)
    m, d = A.shape
    v = sign * np.asarray(z, dtype=float)
    best = math.inf
    for combo in combinations(range(m), d - 1):
        sub = A[list(combo)]
        _, _, vt = np.linalg.svd(sub)
        r = vt[-1]
        for rr in (r, -r):
            if float((A @ rr).min()) >= -1e-10:
                best = min(best, float(rr @ v))
    return best
