"""Finite embedded graphs in R^k with pinned leaves.

A :class:`Net` is immutable: all derived data (degrees, neighbour lists,
unit edge vectors) is computed lazily and cached.  Mutation happens only by
building a new net.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .enclosing import min_enclosing_ball

DELTA_MIN = 1e-12
BOUNDARY_TOL = 1e-9


class NetError(ValueError):
    """A net (or an operation on it) violates a structural invariant."""


@dataclass(frozen=True, eq=False)
class Net:
    dimension: int
    ids: tuple[str, ...]
    positions: np.ndarray
    leaf: np.ndarray
    edges: np.ndarray
    center: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def index(self) -> dict[str, int]:
        return {vid: i for i, vid in enumerate(self.ids)}

    @cached_property
    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        np.add.at(deg, self.edges.ravel(), 1)
        return deg

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges:
            nb[i].append(int(j))
            nb[j].append(int(i))
        return tuple(tuple(x) for x in nb)

    @cached_property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.leaf)

    @cached_property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.leaf)

    @property
    def n_leaves(self) -> int:
        return int(self.leaves.size)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.positions[self.edges[:, 1]] - self.positions[self.edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    @cached_property
    def edge_units(self) -> np.ndarray:
        """Unit vector of every stored edge (i, j), pointing from i to j.

        The reverse orientation is obtained by negation, never recomputed.
        """
        d = self.positions[self.edges[:, 1]] - self.positions[self.edges[:, 0]]
        return d / self.edge_lengths[:, None]

    @cached_property
    def interior_edge_mask(self) -> np.ndarray:
        """Edges whose two endpoints are both interior."""
        return ~self.leaf[self.edges[:, 0]] & ~self.leaf[self.edges[:, 1]]

    @cached_property
    def _edge_lookup(self) -> dict[tuple[int, int], tuple[int, float]]:
        out: dict[tuple[int, int], tuple[int, float]] = {}
        for e, (i, j) in enumerate(self.edges):
            out[(int(i), int(j))] = (e, 1.0)
            out[(int(j), int(i))] = (e, -1.0)
        return out

    def edge_index(self, x: int, y: int) -> tuple[int, float]:
        """Return (edge number, orientation sign) of the oriented pair (x, y)."""
        try:
            return self._edge_lookup[(x, y)]
        except KeyError:
            raise NetError(f"no edge between {self.ids[x]} and {self.ids[y]}") from None

    def unit(self, x: int, y: int) -> np.ndarray:
        e, sign = self.edge_index(x, y)
        return sign * self.edge_units[e]

    @cached_property
    def leaf_data(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(leaf indices, neighbour indices, leaf vectors).

        The leaf vector is the unit vector of the leaf edge pointing toward
        the leaf.
        """
        leaves = self.leaves
        nbrs = np.array([self.neighbors[l][0] for l in leaves], dtype=int)
        if leaves.size == 0:
            return leaves, nbrs, np.zeros((0, self.dimension))
        d = self.positions[leaves] - self.positions[nbrs]
        return leaves, nbrs, d / np.linalg.norm(d, axis=1)[:, None]

    def pos(self, vid: str) -> np.ndarray:
        return self.positions[self.index[vid]]

    def components(self) -> list[np.ndarray]:
        seen = np.zeros(self.n_vertices, dtype=bool)
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self.neighbors[u]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(np.array(sorted(comp)))
        return comps

    def with_positions(self, positions: np.ndarray, meta: Mapping | None = None) -> Net:
        """Same topology, new coordinates (validated like any new net)."""
        verts = [
            (vid, positions[i], bool(self.leaf[i])) for i, vid in enumerate(self.ids)
        ]
        edges = [(self.ids[i], self.ids[j]) for i, j in self.edges]
        return build_net(
            self.dimension, verts, edges, center=self.center,
            meta=self.meta if meta is None else meta,
        )

    def __repr__(self) -> str:
        return (
            f"Net(k={self.dimension}, leaves={self.n_leaves}, "
            f"interior={self.interior.size}, edges={self.n_edges})"
        )


@dataclass(frozen=True)
class EdgeVector:
    x: str
    y: str
    unit: np.ndarray
    length: float

    def reversed(self) -> EdgeVector:
        return EdgeVector(self.y, self.x, -self.unit, self.length)


def edge_vector(net: Net, x: str, y: str) -> EdgeVector:
    i, j = net.index[x], net.index[y]
    e, sign = net.edge_index(i, j)
    return EdgeVector(x, y, sign * net.edge_units[e], float(net.edge_lengths[e]))


def _vertex_record(v: Any) -> tuple[str, Sequence[float], bool | None]:
    if isinstance(v, Mapping):
        return str(v["id"]), v["pos"], v.get("leaf")
    if len(v) == 2:
        return str(v[0]), v[1], None
    return str(v[0]), v[1], v[2]


def build_net(
    k: int,
    vertices: Iterable[Any],
    edges: Iterable[Sequence[str]],
    center: Sequence[float] | None = None,
    meta: Mapping[str, Any] | None = None,
) -> Net:
    """Validate and assemble a net.

    ``vertices`` holds ``(id, pos)``, ``(id, pos, is_leaf)`` or mappings with
    keys ``id``/``pos``/``leaf``.  A missing leaf flag is derived from the
    degree (degree 1 means leaf).
    """
    if k < 1:
        raise NetError("dimension must be >= 1")
    records = [_vertex_record(v) for v in vertices]
    ids = tuple(r[0] for r in records)
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise NetError(f"duplicate vertex ids: {dup}")
    index = {vid: n for n, vid in enumerate(ids)}
    coords = [np.asarray(r[1], dtype=float).ravel() for r in records]
    bad = [r[0] for r, c in zip(records, coords) if c.size != k]
    if bad:
        raise NetError(f"positions must have dimension {k}: {bad[:5]}")
    pos = np.array(coords, dtype=float).reshape(len(ids), k)
    if not np.all(np.isfinite(pos)):
        raise NetError("vertex positions must be finite")

    seen: set[tuple[int, int]] = set()
    edge_list = []
    for a, b in edges:
        a, b = str(a), str(b)
        if a not in index or b not in index:
            raise NetError(f"edge ({a}, {b}) references an unknown vertex")
        i, j = index[a], index[b]
        if i == j:
            raise NetError(f"self-loop at {a}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise NetError(f"duplicate edge ({a}, {b})")
        seen.add(key)
        if np.linalg.norm(pos[i] - pos[j]) < DELTA_MIN:
            raise NetError(f"zero-length edge ({a}, {b})")
        edge_list.append((i, j))
    edge_arr = np.array(edge_list, dtype=int).reshape(-1, 2)

    deg = np.zeros(len(ids), dtype=int)
    np.add.at(deg, edge_arr.ravel(), 1)
    isolated = [ids[i] for i in np.flatnonzero(deg == 0)]
    if isolated:
        raise NetError(f"vertices with degree 0: {isolated}")
    leaf = np.zeros(len(ids), dtype=bool)
    for n, r in enumerate(records):
        if r[2] is None:
            leaf[n] = deg[n] == 1
        else:
            leaf[n] = bool(r[2])
            if leaf[n] and deg[n] != 1:
                raise NetError(f"vertex {r[0]} is flagged leaf but has degree {deg[n]}")

    c = np.zeros(k) if center is None else np.asarray(center, dtype=float).reshape(k)
    for arr in (pos, leaf, edge_arr, c):
        arr.setflags(write=False)
    return Net(k, ids, pos, leaf, edge_arr, c, dict(meta or {}))


# -- domains ---------------------------------------------------------------


@dataclass(frozen=True)
class HalfSpace:
    """Points with ``x . normal > offset``."""

    normal: np.ndarray
    offset: float

    def signed(self, pts: np.ndarray) -> np.ndarray:
        return pts @ np.asarray(self.normal, dtype=float) - self.offset

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return self.signed(pts) > 0


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def signed(self, pts: np.ndarray) -> np.ndarray:
        return self.radius - np.linalg.norm(pts - np.asarray(self.center, dtype=float), axis=-1)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return self.signed(pts) > 0


@dataclass(frozen=True)
class WholeMinusLeaves:
    """All of R^k except small neighbourhoods of the leaves."""

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return np.ones(len(pts), dtype=bool)


WHOLE = WholeMinusLeaves()
Domain = HalfSpace | Ball | WholeMinusLeaves


def _segment_crossings(domain: HalfSpace | Ball, p: np.ndarray, q: np.ndarray) -> list[float]:
    """Parameters t in (0, 1) where p + t(q - p) meets the domain boundary."""
    if isinstance(domain, HalfSpace):
        sp, sq = domain.signed(p[None])[0], domain.signed(q[None])[0]
        if (sp > 0) == (sq > 0):
            return []
        return [sp / (sp - sq)]
    c = np.asarray(domain.center, dtype=float)
    d = q - p
    a = d @ d
    b = (p - c) @ d
    cc = (p - c) @ (p - c) - domain.radius**2
    disc = b * b - a * cc
    if disc <= 0:
        return []
    sq = np.sqrt(disc)
    ts = [(-b - sq) / a, (-b + sq) / a]
    return [t for t in ts if 0.0 < t < 1.0]


def restrict(net: Net, domain: Domain) -> Net:
    """Restriction of ``net`` to ``domain``.

    Vertices inside the domain are kept; every crossing of an edge with the
    domain boundary becomes a new leaf (an anchor).  Anchor ids are fresh and
    the originating edge of each anchor is recorded in ``meta["anchors"]``.
    Restricting to :data:`WHOLE` returns the net itself (its leaves already
    play the role of anchors).
    """
    if isinstance(domain, WholeMinusLeaves):
        return net
    s = domain.signed(net.positions)
    close = np.flatnonzero(np.abs(s) <= BOUNDARY_TOL)
    if close.size:
        names = [net.ids[i] for i in close[:5]]
        raise NetError(
            f"domain boundary passes within {BOUNDARY_TOL:g} of vertices {names}; "
            "nudge the offset or radius"
        )
    inside = s > 0
    verts: list[tuple[str, np.ndarray, bool]] = [
        (net.ids[i], net.positions[i], bool(net.leaf[i])) for i in np.flatnonzero(inside)
    ]
    new_edges: list[tuple[str, str]] = []
    anchors: dict[str, list[str]] = {}
    for i, j in net.edges:
        a, b = net.ids[i], net.ids[j]
        p, q = net.positions[i], net.positions[j]
        if inside[i] and inside[j]:
            ts = _segment_crossings(domain, p, q)
            if ts:
                raise NetError(f"edge ({a}, {b}) leaves and re-enters the domain")
            new_edges.append((a, b))
            continue
        ts = _segment_crossings(domain, p, q)
        if inside[i] != inside[j]:
            if len(ts) != 1:
                raise NetError(f"edge ({a}, {b}) has an ambiguous boundary crossing")
            src, far, t = (a, b, ts[0]) if inside[i] else (b, a, 1.0 - ts[0])
            base, tip = (p, q) if inside[i] else (q, p)
            aid = f"anchor({src},{far})"
            verts.append((aid, base + t * (tip - base), True))
            anchors[aid] = [src, far]
            new_edges.append((src, aid))
        elif len(ts) == 2:
            pts = [p + t * (q - p) for t in ts]
            if np.linalg.norm(pts[1] - pts[0]) <= BOUNDARY_TOL:
                raise NetError(f"edge ({a}, {b}) is tangent to the domain boundary")
            ids2 = [f"anchor({a},{b})#0", f"anchor({a},{b})#1"]
            for aid, pt in zip(ids2, pts):
                verts.append((aid, pt, True))
                anchors[aid] = [a, b]
            new_edges.append((ids2[0], ids2[1]))
    if not verts:
        raise NetError("domain contains no part of the net")
    return build_net(net.dimension, verts, new_edges, center=net.center, meta={"anchors": anchors})


def total_interior_length(net: Net) -> float:
    """Total length of the edges not incident with a leaf."""
    return float(net.edge_lengths[net.interior_edge_mask].sum())


def outer_radius(net: Net, center: Sequence[float] | None = None) -> tuple[float, np.ndarray]:
    """Radius of the smallest ball containing the interior vertices.

    With an explicit ``center`` the radius of the smallest ball around that
    point is returned instead.
    """
    pts = net.positions[net.interior]
    if pts.shape[0] == 0:
        raise NetError("outer radius needs at least one interior vertex")
    if center is not None:
        c = np.asarray(center, dtype=float)
        return float(np.linalg.norm(pts - c, axis=1).max()), c
    c, r = min_enclosing_ball(pts)
    return r, c
