"""Length density of a net about a center, with leaf edges extended to rays.

For r > 0, ``lambda(r) = L(r) / r`` where L(r) is the length of the
extended net inside the closed ball of radius r.  On a critical net it is
non-decreasing, equals the anchor sum ``sum_a xhat_a . lhat_a`` and has
derivative ``(1/r) sum_a (1/t_a - t_a)`` with ``t_a = xhat_a . lhat_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .net import Net, NetError

EXCLUDE_TOL = 1e-9
TANGENT_TOL = 1e-6
FD_STEP = 1e-5
GEOM_TOL = 1e-9


class DensitySampleRejected(ValueError):
    def __init__(self, r: float, reason: str):
        self.r = r
        self.reason = reason
        super().__init__(f"radius {r!r} rejected: {reason}")


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    leaf: str


@dataclass(frozen=True)
class ExtendedNet:
    """A net whose leaf edges are replaced by half-lines.

    ``starts``/``units``/``spans`` describe every piece as ``start + s*unit``
    for ``0 <= s <= span``; rays have ``span = inf``.
    """

    base: Net
    rays: tuple[Ray, ...]
    starts: np.ndarray
    units: np.ndarray
    spans: np.ndarray
    artificial: np.ndarray  # crossing points of rays with other pieces

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @property
    def vertex_points(self) -> np.ndarray:
        return np.vstack([self.base.positions[self.base.interior], self.artificial])


def _closest_params(p1, u1, p2, u2):
    """Parameters of the closest points on two lines; None when parallel."""
    c = float(u1 @ u2)
    den = 1.0 - c * c
    if den < 1e-18:
        return None
    w = p1 - p2
    a, b = float(u1 @ w), float(u2 @ w)
    s = (c * b - a) / den
    t = (b - c * a) / den
    return s, t


def extend_leaves(net: Net) -> ExtendedNet:
    """Replace each leaf edge by the half-line from the leaf's neighbour
    through the leaf, and mark the crossings created by the rays."""
    m = net.interior_edge_mask
    e = net.edges[m]
    starts = [net.positions[e[:, 0]]]
    units = [net.edge_units[m]]
    spans = [net.edge_lengths[m]]
    leaves, nbrs, lv = net.leaf_data
    rays = tuple(
        Ray(net.positions[n].copy(), lv[i].copy(), net.ids[l])
        for i, (l, n) in enumerate(zip(leaves, nbrs))
    )
    starts.append(net.positions[nbrs])
    units.append(lv)
    spans.append(np.full(len(leaves), np.inf))
    P = np.vstack(starts)
    U = np.vstack(units)
    S = np.concatenate(spans)
    n_seg = int(m.sum())

    scale = 1.0 + float(np.abs(net.positions).max(initial=0.0))
    tol = GEOM_TOL * scale
    art = []
    for r in range(len(rays)):
        i = n_seg + r
        for j in range(len(P)):
            if j == i or (j >= n_seg and j < i):
                continue
            par = _closest_params(P[i], U[i], P[j], U[j])
            if par is None:
                w = P[j] - P[i]
                off = w - (w @ U[i]) * U[i]
                if np.linalg.norm(off) > tol:
                    continue
                # colinear: does piece j cover part of the ray beyond its origin?
                a = float(w @ U[i])
                b = a + np.sign(U[j] @ U[i]) * S[j]
                if max(min(a, b), 0.0) < max(a, b) - tol:
                    raise NetError(
                        f"ray from leaf {rays[r].leaf} overlaps another piece of the net"
                    )
                continue
            s, t = par
            if s <= tol or t <= tol or t >= S[j] - tol:
                continue
            x1 = P[i] + s * U[i]
            x2 = P[j] + t * U[j]
            if np.linalg.norm(x1 - x2) <= tol:
                art.append(0.5 * (x1 + x2))
    art_arr = np.array(art, dtype=float).reshape(-1, net.dimension)
    return ExtendedNet(net, rays, P, U, S, art_arr)


def _roots(ext: ExtendedNet, center: np.ndarray, r: float):
    """Per piece: (b, disc) of |w + s u|^2 = r^2 with w = start - center."""
    w = ext.starts - center
    b = np.einsum("ij,ij->i", w, ext.units)
    perp = w - b[:, None] * ext.units  # exact zero for pieces through the center
    disc = r * r - np.einsum("ij,ij->i", perp, perp)
    return b, disc


def clipped_length(ext: ExtendedNet, center, r: float) -> float:
    """Length of the extended net inside the closed ball B(center, r)."""
    center = np.asarray(center, dtype=float)
    b, disc = _roots(ext, center, r)
    ok = disc > 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    lo = np.maximum(-b - sq, 0.0)
    hi = np.minimum(-b + sq, ext.spans)
    return float(np.where(ok, np.maximum(hi - lo, 0.0), 0.0).sum())


def length_density(ext: ExtendedNet, center, r: float) -> float:
    if r <= 0:
        raise ValueError("radius must be positive")
    return clipped_length(ext, center, r) / r


@dataclass(frozen=True)
class Anchors:
    """Crossings of the sphere with the extended net at one radius."""

    r: float
    points: np.ndarray
    t: np.ndarray  # xhat . lhat with lhat the exit direction

    @property
    def density(self) -> float:
        return float(self.t.sum())

    @property
    def derivative(self) -> float:
        return float((1.0 / self.t - self.t).sum() / self.r)


def excluded_radii(ext: ExtendedNet, center) -> np.ndarray:
    """Vertex norms, crossing norms and tangency radii about ``center``."""
    center = np.asarray(center, dtype=float)
    pts = ext.vertex_points
    out = [np.linalg.norm(pts - center, axis=1)]
    w = ext.starts - center
    foot = -np.einsum("ij,ij->i", w, ext.units)
    inside = (foot > 0) & (foot < ext.spans)
    perp = w + foot[:, None] * ext.units
    out.append(np.linalg.norm(perp[inside], axis=1))
    return np.sort(np.concatenate(out))


def _check_radius(ext: ExtendedNet, center: np.ndarray, r: float, excl: np.ndarray | None) -> None:
    if excl is None:
        excl = excluded_radii(ext, center)
    if excl.size and np.min(np.abs(excl - r)) <= EXCLUDE_TOL:
        raise DensitySampleRejected(r, "within 1e-9 of a vertex, crossing or tangency radius")


def anchors(ext: ExtendedNet, center, r: float, excl: np.ndarray | None = None) -> Anchors:
    center = np.asarray(center, dtype=float)
    if r <= 0:
        raise ValueError("radius must be positive")
    _check_radius(ext, center, r, excl)
    b, disc = _roots(ext, center, r)
    pts, ts = [], []
    for i in np.flatnonzero(disc > 0):
        sq = np.sqrt(disc[i])
        for s in (-b[i] - sq, -b[i] + sq):
            if 0.0 < s < ext.spans[i]:
                pts.append(ext.starts[i] + s * ext.units[i])
                ts.append(sq / r)
    t = np.array(ts, dtype=float)
    if t.size and t.min() <= TANGENT_TOL:
        raise DensitySampleRejected(r, "anchor nearly tangent to the sphere")
    return Anchors(r, np.array(pts, dtype=float).reshape(-1, ext.base.dimension), t)


def density_derivative(ext: ExtendedNet, center, r: float) -> float:
    return anchors(ext, center, r).derivative


def finite_difference(ext: ExtendedNet, center, r: float, excl: np.ndarray | None = None) -> float:
    """Central difference of lambda with step 1e-5 r; NaN if a feature
    radius lies inside the stencil."""
    center = np.asarray(center, dtype=float)
    h = FD_STEP * r
    if excl is None:
        excl = excluded_radii(ext, center)
    if excl.size and np.any((excl >= r - h - EXCLUDE_TOL) & (excl <= r + h + EXCLUDE_TOL)):
        return float("nan")
    return (length_density(ext, center, r + h) - length_density(ext, center, r - h)) / (2 * h)


def generalized_degree(ext: ExtendedNet, center) -> int:
    """Number of net directions leaving ``center``: the vertex degree there,
    2 for an edge passing through, 0 if the center is off the net."""
    center = np.asarray(center, dtype=float)
    w = center - ext.starts
    s = np.einsum("ij,ij->i", w, ext.units)
    off = np.linalg.norm(w - s[:, None] * ext.units, axis=1)
    on = off <= GEOM_TOL
    count = 0
    for i in np.flatnonzero(on):
        if -GEOM_TOL <= s[i] <= ext.spans[i] + GEOM_TOL:
            at_end = abs(s[i]) <= GEOM_TOL or abs(s[i] - ext.spans[i]) <= GEOM_TOL
            count += 1 if at_end else 2
    return count


def feature_distance(ext: ExtendedNet, center) -> float:
    """Distance from ``center`` to the nearest vertex, crossing or piece
    not passing through the center."""
    center = np.asarray(center, dtype=float)
    d = np.linalg.norm(ext.vertex_points - center, axis=1)
    d = d[d > GEOM_TOL]
    w = center - ext.starts
    s = np.clip(np.einsum("ij,ij->i", w, ext.units), 0.0, ext.spans)
    dist = np.linalg.norm(w - s[:, None] * ext.units, axis=1)
    dist = dist[dist > GEOM_TOL]
    return float(np.concatenate([d, dist]).min(initial=np.inf))


def extent(ext: ExtendedNet, center) -> float:
    """Radius beyond which only rays cross the sphere."""
    center = np.asarray(center, dtype=float)
    pts = np.vstack([ext.vertex_points, ext.starts])
    return float(np.linalg.norm(pts - center, axis=1).max(initial=0.0))


@dataclass
class DensityProfile:
    center: np.ndarray
    radii: np.ndarray
    density: np.ndarray
    formula: np.ndarray  # anchor sum, should equal density
    derivative: np.ndarray
    derivative_fd: np.ndarray
    n_anchors: np.ndarray
    rejected: list[tuple[float, str]] = field(default_factory=list)
    start: dict = field(default_factory=dict)
    end: dict = field(default_factory=dict)

    def monotone_violation(self) -> float:
        """Largest decrease between consecutive samples (<= 0 if monotone)."""
        if self.density.size < 2:
            return 0.0
        return float(max(0.0, -np.diff(self.density).min()))

    def formula_residual(self) -> float:
        return float(np.abs(self.density - self.formula).max(initial=0.0))

    def derivative_agreement(self, tol: float = 1e-4) -> tuple[int, int]:
        """(agreeing samples, samples where the difference is defined)."""
        ok = np.isfinite(self.derivative_fd)
        good = np.abs(self.derivative[ok] - self.derivative_fd[ok]) <= tol
        return int(good.sum()), int(ok.sum())

    def csv(self) -> str:
        rows = ["r,lambda,dlambda_formula,dlambda_fd,n_anchors,rejected_flag"]
        valid = [
            (float(r), f"{r:.17g},{l:.17g},{d:.17g},{f:.17g},{int(n)},0")
            for r, l, d, f, n in zip(self.radii, self.density, self.derivative,
                                     self.derivative_fd, self.n_anchors)
        ]
        bad = [(float(r), f"{r:.17g},nan,nan,nan,0,1") for r, _ in self.rejected]
        rows += [line for _, line in sorted(valid + bad)]
        return "\n".join(rows) + "\n"


def density_profile(
    ext: ExtendedNet, center, r_min: float, r_max: float, samples: int
) -> DensityProfile:
    """Sample lambda on ``samples`` log-spaced radii in [r_min, r_max]."""
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    if samples < 2:
        raise ValueError("need at least two samples")
    center = np.asarray(center, dtype=float).reshape(ext.base.dimension)
    excl = excluded_radii(ext, center)
    rows, rejected = [], []
    for r in np.geomspace(r_min, r_max, samples):
        r = float(r)
        try:
            a = anchors(ext, center, r, excl)
        except DensitySampleRejected as err:
            rejected.append((r, err.reason))
            continue
        lam = length_density(ext, center, r)
        rows.append((r, lam, a.density, a.derivative, finite_difference(ext, center, r, excl),
                     len(a.t)))
    if not rows:
        raise DensitySampleRejected(r_min, "every sample radius was rejected")
    cols = [np.array(c, dtype=float) for c in zip(*rows)]
    prof = DensityProfile(center, cols[0], cols[1], cols[2], cols[3], cols[4],
                          cols[5].astype(int), rejected)
    degree = generalized_degree(ext, center)
    near = feature_distance(ext, center)
    prof.start = {
        "radius": float(cols[0][0]),
        "lambda": float(cols[1][0]),
        "target": degree,
        "applicable": bool(cols[0][0] < near),
        "residual": abs(float(cols[1][0]) - degree),
    }
    far = extent(ext, center)
    prof.end = {
        "radius": float(cols[0][-1]),
        "lambda": float(cols[1][-1]),
        "target": ext.n_rays,
        "applicable": bool(cols[0][-1] > far),
        "residual": abs(float(cols[1][-1]) - ext.n_rays),
    }
    return prof
