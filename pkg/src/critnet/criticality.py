"""First variation of length, criticality certificates and relaxation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .net import (
    DELTA_MIN,
    WHOLE,
    Ball,
    Domain,
    HalfSpace,
    Net,
    NetError,
    WholeMinusLeaves,
    build_net,
    restrict,
)

log = logging.getLogger(__name__)

SWELL_TOL = 1e-9


class EdgeCollapseError(NetError):
    def __init__(self, pair: tuple[str, str], sweep: int):
        self.pair = pair
        self.sweep = sweep
        super().__init__(
            f"edge {pair[0]}-{pair[1]} collapsed below threshold at sweep {sweep}; "
            "merge the two vertices and relax again"
        )


# -- residuals ---------------------------------------------------------------


def vertex_residuals(net: Net) -> np.ndarray:
    """Sum over neighbours y of (x - y)/|x - y| for every vertex x.

    This is the gradient of total length with respect to each position.
    Leaf rows are filled too; callers drop them.
    """
    res = np.zeros_like(net.positions)
    u = net.edge_units
    np.add.at(res, net.edges[:, 0], -u)
    np.add.at(res, net.edges[:, 1], u)
    return res


def vertex_residual(net: Net, x: str) -> np.ndarray:
    i = net.index[x]
    if net.leaf[i]:
        raise NetError(f"{x} is a leaf; leaves are pinned")
    return vertex_residuals(net)[i]


@dataclass(frozen=True)
class ResidualReport:
    residuals: dict[str, np.ndarray]
    max_norm: float
    worst: str | None


def is_critical(net: Net, tol: float = 1e-10) -> tuple[bool, ResidualReport]:
    res = vertex_residuals(net)
    interior = net.interior
    norms = np.linalg.norm(res[interior], axis=1)
    if interior.size == 0:
        report = ResidualReport({}, 0.0, None)
    else:
        w = int(np.argmax(norms))
        report = ResidualReport(
            {net.ids[i]: res[i] for i in interior}, float(norms[w]), net.ids[interior[w]]
        )
    return report.max_norm <= tol, report


# -- deformations ------------------------------------------------------------


@dataclass(frozen=True)
class Deformation:
    """A displacement field on the vertices.

    ``kind`` is one of scaling, dilation, swelling, chopping, translation,
    rotation or custom.  The field vanishes on leaves and on vertices outside
    ``support``.
    """

    kind: str
    center: np.ndarray | None = None
    vector: np.ndarray | None = None
    offset: float = 0.0
    generator: np.ndarray | None = None
    field: Callable[[str, np.ndarray], np.ndarray] | Mapping[str, Sequence[float]] | None = None
    support: Domain = WHOLE

    def _center(self, k: int) -> np.ndarray:
        return np.zeros(k) if self.center is None else np.asarray(self.center, float)

    def raw(self, ids: Sequence[str], pts: np.ndarray) -> np.ndarray:
        k = pts.shape[1]
        x = pts - self._center(k)
        kind = self.kind
        if kind == "scaling":
            return x.copy()
        if kind == "dilation":
            e = np.asarray(self.vector, float)
            return np.outer(x @ e, e)
        if kind == "translation":
            return np.tile(np.asarray(self.vector, float), (len(pts), 1))
        if kind == "chopping":
            v = np.asarray(self.vector, float)
            return np.outer((x @ v) > self.offset, v).astype(float)
        if kind == "rotation":
            a = np.asarray(self.generator, float)
            return x @ a.T
        if kind == "swelling":
            r = np.linalg.norm(x, axis=1)
            out = np.zeros_like(x)
            nz = r > 0
            out[nz] = x[nz] / r[nz, None]
            return out
        if kind == "custom":
            f = self.field
            if callable(f):
                return np.array([f(i, p) for i, p in zip(ids, pts)], dtype=float).reshape(x.shape)
            return np.array([f.get(i, np.zeros(k)) for i in ids], dtype=float).reshape(x.shape)
        raise ValueError(f"unknown deformation kind {kind!r}")

    def displacement(self, net: Net) -> np.ndarray:
        mask = ~net.leaf & net_support(net, self.support)
        if self.kind == "swelling":
            r = np.linalg.norm(net.positions[mask] - self._center(net.dimension), axis=1)
            bad = (r > 0) & (r < SWELL_TOL)
            if bad.any():
                raise NetError("swelling center lies within 1e-9 of a vertex other than itself")
        d = self.raw(net.ids, net.positions)
        d[~mask] = 0.0
        return d


def net_support(net: Net, domain: Domain) -> np.ndarray:
    if isinstance(domain, WholeMinusLeaves):
        return np.ones(net.n_vertices, dtype=bool)
    return domain.contains(net.positions)


def scaling(center=None, support: Domain = WHOLE) -> Deformation:
    return Deformation("scaling", center=center, support=support)


def dilation(e, center=None, support: Domain = WHOLE) -> Deformation:
    return Deformation("dilation", center=center, vector=np.asarray(e, float), support=support)


def swelling(center=None, support: Domain = WHOLE) -> Deformation:
    return Deformation("swelling", center=center, support=support)


def chopping(v, offset: float = 0.0, center=None, support: Domain = WHOLE) -> Deformation:
    return Deformation("chopping", center=center, vector=np.asarray(v, float), offset=offset,
                       support=support)


def translation(e, support: Domain = WHOLE) -> Deformation:
    return Deformation("translation", vector=np.asarray(e, float), support=support)


def rotation(generator=None, axis=None, center=None, support: Domain = WHOLE) -> Deformation:
    """Infinitesimal rotation x -> A x with A antisymmetric.

    In R^3 an ``axis`` e may be given instead, meaning x -> e cross x.
    """
    if generator is None:
        e = np.asarray(axis, float)
        generator = np.array([[0, -e[2], e[1]], [e[2], 0, -e[0]], [-e[1], e[0], 0]])
    a = np.asarray(generator, float)
    if not np.allclose(a, -a.T, atol=1e-14):
        raise ValueError("rotation generator must be antisymmetric")
    return Deformation("rotation", center=center, generator=a, support=support)


def custom(field, support: Domain = WHOLE) -> Deformation:
    return Deformation("custom", field=field, support=support)


def first_variation(net: Net, deformation: Deformation) -> float:
    """Derivative of total length along ``deformation`` (leaves fixed)."""
    d = deformation.displacement(net)
    w = -net.edge_units  # (x - y)/|x - y| for stored edge (x, y)
    dd = d[net.edges[:, 0]] - d[net.edges[:, 1]]
    return float(np.einsum("ij,ij->", w, dd))


def _restricted(net: Net, deformation: Deformation, domain: Domain) -> tuple[Net, np.ndarray]:
    sub = restrict(net, domain)
    return sub, deformation.displacement(sub)


def anchor_side(net: Net, deformation: Deformation, domain: Domain = WHOLE) -> float:
    """Anchor sum: over anchors a of the leaf vector at a dotted with the
    displacement of the interior vertex x_a attached to a."""
    sub, d = _restricted(net, deformation, domain)
    leaves, nbrs, lv = sub.leaf_data
    return float(np.einsum("ij,ij->", lv, d[nbrs]))


def inside_variation(net: Net, deformation: Deformation, domain: Domain = WHOLE) -> float:
    """Variation summed over the edges lying inside ``domain`` (anchor edges
    excluded).  Equals :func:`anchor_side` on a critical net."""
    sub, d = _restricted(net, deformation, domain)
    m = sub.interior_edge_mask
    w = -sub.edge_units[m]
    e = sub.edges[m]
    return float(np.einsum("ij,ij->", w, d[e[:, 0]] - d[e[:, 1]]))


# -- relaxation --------------------------------------------------------------


@dataclass(frozen=True)
class SolverParams:
    tol: float = 1e-10
    max_sweeps: int = 10000
    damping: float = 1.0
    collapse: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.collapse < DELTA_MIN:
            raise ValueError("collapse threshold must be >= DELTA_MIN")


@dataclass
class RelaxResult:
    net: Net
    converged: bool
    sweeps: int
    trace: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return self.trace[-1][2]

    def trace_csv(self) -> str:
        rows = ["sweep,total_length,max_residual"]
        rows += [f"{s},{l:.17g},{r:.17g}" for s, l, r in self.trace]
        return "\n".join(rows) + "\n"


def _check_components(net: Net) -> None:
    for comp in net.components():
        n_leaves = int(net.leaf[comp].sum())
        if n_leaves < 2:
            names = [net.ids[i] for i in comp[:4]]
            raise NetError(
                f"component containing {names} has {n_leaves} leaf(s); a critical net "
                "needs at least two leaves in every component"
            )


def relax(
    edges: Sequence[tuple[str, str]],
    leaf_positions: Mapping[str, Sequence[float]],
    initial_positions: Mapping[str, Sequence[float]],
    params: SolverParams | None = None,
) -> RelaxResult:
    """Drive a topology with pinned leaves to a length-critical embedding."""
    params = params or SolverParams()
    rng = np.random.default_rng(params.seed)
    start = {i: np.asarray(p, dtype=float) for i, p in initial_positions.items()}
    fixed = {i: np.asarray(p, dtype=float) for i, p in leaf_positions.items()}
    for a, b in edges:
        for x, y in ((a, b), (b, a)):
            if x in start:
                other = start.get(y, fixed.get(y))
                if other is not None and np.linalg.norm(start[x] - other) < params.collapse:
                    u = rng.normal(size=start[x].size)
                    start[x] = start[x] + 1e-6 * u / np.linalg.norm(u)
    verts = [(i, p, False) for i, p in start.items()]
    verts += [(i, p, True) for i, p in fixed.items()]
    k = len(next(iter(fixed.values())))
    return relax_net(build_net(k, verts, edges), params)


def relax_net(net: Net, params: SolverParams | None = None) -> RelaxResult:
    """Gauss-Seidel Weiszfeld sweeps over the interior vertices of ``net``.

    Each interior vertex (ascending index) moves to the reciprocal-distance
    weighted average of its neighbours; if that would increase length the
    step is damped.  Stops when the largest residual is below ``params.tol``.
    """
    params = params or SolverParams()
    _check_components(net)
    rng = np.random.default_rng(params.seed)
    pos = np.array(net.positions, dtype=float)
    nbrs = [np.array(n, dtype=int) for n in net.neighbors]
    order = [int(i) for i in net.interior]
    ids = net.ids

    for i in order:
        d = np.linalg.norm(pos[nbrs[i]] - pos[i], axis=1)
        if d.min() < params.collapse:
            u = rng.normal(size=net.dimension)
            pos[i] += 1e-6 * u / np.linalg.norm(u)

    def local(i: int, x: np.ndarray) -> float:
        return float(np.linalg.norm(pos[nbrs[i]] - x, axis=1).sum())

    def measure() -> tuple[float, float]:
        diff = pos[net.edges[:, 1]] - pos[net.edges[:, 0]]
        lengths = np.linalg.norm(diff, axis=1)
        u = diff / lengths[:, None]
        res = np.zeros_like(pos)
        np.add.at(res, net.edges[:, 0], -u)
        np.add.at(res, net.edges[:, 1], u)
        r = float(np.linalg.norm(res[order], axis=1).max()) if order else 0.0
        return float(lengths.sum()), r

    length, resid = measure()
    trace = [(0, length, resid)]
    sweep = 0
    converged = resid <= params.tol
    while not converged and sweep < params.max_sweeps:
        sweep += 1
        for i in order:
            y = pos[nbrs[i]]
            dist = np.linalg.norm(y - pos[i], axis=1)
            j = int(np.argmin(dist))
            if dist[j] < params.collapse:
                raise EdgeCollapseError((ids[i], ids[nbrs[i][j]]), sweep)
            w = 1.0 / dist
            target = (w @ y) / w.sum()
            before = dist.sum()
            slack = 4e-16 * before  # Weiszfeld descends; reject only real increases
            eta = params.damping
            for _ in range(40):
                cand = pos[i] + eta * (target - pos[i])
                if local(i, cand) <= before + slack:
                    pos[i] = cand
                    break
                eta *= 0.5
        length, resid = measure()
        trace.append((sweep, length, resid))
        converged = resid <= params.tol
    if not converged:
        log.warning("relaxation stopped after %d sweeps, residual %.3g", sweep, resid)
    out = net.with_positions(pos, meta={**net.meta, "relaxed": bool(converged)})
    return RelaxResult(out, converged, sweep, trace)
