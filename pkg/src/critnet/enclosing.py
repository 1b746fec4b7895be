"""Smallest enclosing ball of a finite point set in R^k.

For k <= 3 the move-to-front variant of Welzl's algorithm is used, which is
exact up to floating point.  For larger k the ball is found by iterative
refinement of the convex program ``min t  s.t.  |p_i - c|^2 <= t``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

_EPS = 1e-12


def _circumball(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest ball with every support point on its boundary.

    The center is taken in the affine hull of the support.
    """
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    q = np.stack([p - p0 for p in support[1:]], axis=1)
    gram = q.T @ q
    rhs = 0.5 * np.diag(gram)
    alpha, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    c = p0 + q @ alpha
    r = max(float(np.linalg.norm(p - c)) for p in support)
    return c, r


def _inside(c: np.ndarray, r: float, p: np.ndarray) -> bool:
    return float(np.linalg.norm(p - c)) <= r * (1 + _EPS) + _EPS


def _mtf(pts: list[np.ndarray], n: int, support: list[np.ndarray], k: int):
    if support:
        c, r = _circumball(support)
    else:
        c, r = pts[0].copy(), -1.0
    if len(support) == k + 1:
        return c, r
    i = 0
    while i < n:
        p = pts[i]
        if r < 0 or not _inside(c, r, p):
            c, r = _mtf(pts, i, support + [p], k)
            pts.insert(0, pts.pop(i))
        i += 1
    return c, r


def welzl_ball(points: np.ndarray) -> tuple[np.ndarray, float]:
    pts_arr = np.unique(np.asarray(points, dtype=float), axis=0)
    k = pts_arr.shape[1]
    if pts_arr.shape[0] == 1:
        return pts_arr[0].copy(), 0.0
    pts = [p for p in pts_arr]
    c, r = _mtf(pts, len(pts), [], k)
    return c, float(max(np.linalg.norm(pts_arr - c, axis=1)))


def iterative_ball(points: np.ndarray, rel_tol: float = 1e-9) -> tuple[np.ndarray, float]:
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] == 1:
        return pts[0].copy(), 0.0
    # Badoiu-Clarkson warm start
    c = pts.mean(axis=0)
    for it in range(1, 200):
        far = pts[np.argmax(np.linalg.norm(pts - c, axis=1))]
        c = c + (far - c) / (it + 1)
    scale = float(np.max(np.linalg.norm(pts - c, axis=1)))
    x0 = np.concatenate([(c - pts.mean(axis=0)) / scale, [1.0]])
    shifted = (pts - pts.mean(axis=0)) / scale
    cons = {
        "type": "ineq",
        "fun": lambda z: z[-1] - np.sum((shifted - z[:-1]) ** 2, axis=1),
        "jac": lambda z: np.hstack([2 * (shifted - z[:-1]), np.ones((len(shifted), 1))]),
    }
    res = minimize(
        lambda z: z[-1], x0, jac=lambda z: np.eye(len(z))[-1],
        constraints=[cons], method="SLSQP", options={"ftol": rel_tol**2, "maxiter": 500},
    )
    c = res.x[:-1] * scale + pts.mean(axis=0)
    return c, float(np.max(np.linalg.norm(pts - c, axis=1)))


def min_enclosing_ball(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``(center, radius)`` of the smallest ball containing ``points``."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("need a non-empty (n, k) array of points")
    if points.shape[1] <= 3:
        return welzl_ball(points)
    return iterative_ball(points)
