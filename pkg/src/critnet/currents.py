"""Directional edge currents and what can be read off them.

For a unit vector v the current from x to y is ``w_xy . v`` where ``w_xy``
is the unit vector from x to y.  On a critical net it obeys Kirchhoff's
current law at every interior vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .net import Net, NetError

UNIT_TOL = 1e-12
TIE_TOL = 1e-9
PERP_TOL = 1e-9


class PerpendicularEdgeError(NetError):
    def __init__(self, edge: tuple[str, str], v: np.ndarray):
        self.edge = edge
        self.v = v
        super().__init__(
            f"edge {edge[0]}-{edge[1]} is perpendicular to v={v.tolist()}; "
            "retry with a perturbed direction"
        )


def _unit(v, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(k)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise ValueError(f"direction must be a unit vector, got norm {np.linalg.norm(v)!r}")
    return v


def edge_currents(net: Net, v) -> np.ndarray:
    """c_v on every stored edge (i, j), oriented from i to j."""
    return net.edge_units @ _unit(v, net.dimension)


@dataclass(frozen=True)
class CurrentProfile:
    direction: np.ndarray
    currents: np.ndarray  # per stored edge, oriented as net.edges
    leaf_ids: tuple[str, ...]
    leaf_currents: np.ndarray  # c_v(neighbour -> leaf)
    c_in: float

    @property
    def entering(self) -> np.ndarray:
        """Mask of leaf edges in E+ (positive current toward the leaf)."""
        return self.leaf_currents > UNIT_TOL

    @property
    def leaving(self) -> np.ndarray:
        return self.leaf_currents < -UNIT_TOL

    def classes(self) -> dict[str, int]:
        return {
            lid: int(np.sign(c)) if abs(c) > UNIT_TOL else 0
            for lid, c in zip(self.leaf_ids, self.leaf_currents)
        }


def current_profile(net: Net, v) -> CurrentProfile:
    v = _unit(v, net.dimension)
    cur = net.edge_units @ v
    leaves, _, lv = net.leaf_data
    lc = lv @ v
    return CurrentProfile(
        v, cur, tuple(net.ids[i] for i in leaves), lc, 0.5 * float(np.abs(lc).sum())
    )


def current(net: Net, profile: CurrentProfile, x: str, y: str) -> float:
    e, sign = net.edge_index(net.index[x], net.index[y])
    return sign * float(profile.currents[e])


def kirchhoff_residual(net: Net, v) -> float:
    """Largest |sum of outgoing currents| over interior vertices."""
    cur = edge_currents(net, v)
    out = np.zeros(net.n_vertices)
    np.add.at(out, net.edges[:, 0], cur)
    np.add.at(out, net.edges[:, 1], -cur)
    if net.interior.size == 0:
        return 0.0
    return float(np.abs(out[net.interior]).max())


def cin_consistency(net: Net, v) -> tuple[float, float, float]:
    """(sum over E+, minus sum over E-, c_in).  Equal on a critical net."""
    p = current_profile(net, v)
    lc = p.leaf_currents
    return float(lc[lc > 0].sum()), float(-lc[lc < 0].sum()), p.c_in


@dataclass(frozen=True)
class CutScan:
    direction: np.ndarray
    breakpoints: np.ndarray
    breakpoint_is_leaf: np.ndarray
    low: np.ndarray  # slab bounds; -inf / +inf at the ends
    high: np.ndarray
    currents: np.ndarray  # current through a cut inside each slab
    leaf_side: np.ndarray  # signed leaf current in the half-space above the cut
    c_in: float

    def interior_jump(self) -> float:
        """Largest change of the cut current across an interior breakpoint."""
        jumps = np.abs(np.diff(self.currents))
        mask = ~self.breakpoint_is_leaf
        return float(jumps[mask].max()) if mask.any() else 0.0

    def lemma_residual(self) -> float:
        return float(np.abs(self.currents - self.leaf_side).max())

    def excess(self) -> float:
        """How far the largest cut current exceeds c_in (<= 0 expected)."""
        return float(self.currents.max() - self.c_in)

    def rows(self) -> list[tuple[float, float, float, str]]:
        kinds = ["none"] + ["leaf" if b else "interior" for b in self.breakpoint_is_leaf]
        return [
            (float(lo), float(hi), float(c), kind)
            for lo, hi, c, kind in zip(self.low, self.high, self.currents, kinds)
        ]


def _group_breakpoints(proj: np.ndarray, is_leaf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(proj, kind="stable")
    values: list[float] = []
    leafy: list[bool] = []
    start = None
    for i in order:
        if start is None or proj[i] - start > TIE_TOL:
            start = proj[i]
            values.append(float(proj[i]))
            leafy.append(bool(is_leaf[i]))
        else:
            leafy[-1] = leafy[-1] or bool(is_leaf[i])
    return np.array(values), np.array(leafy, dtype=bool)


def cut_currents(net: Net, v, lams: np.ndarray) -> np.ndarray:
    """Current through the cuts ``x . v = lam`` (from the lower side up)."""
    v = _unit(v, net.dimension)
    proj = net.positions @ v
    a, b = proj[net.edges[:, 0]], proj[net.edges[:, 1]]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    c = np.abs(net.edge_units @ v)
    lams = np.asarray(lams, dtype=float)
    crossing = (lo[None, :] < lams[:, None]) & (lams[:, None] < hi[None, :])
    return crossing.astype(float) @ c


def cut_scan(net: Net, v) -> CutScan:
    v = _unit(v, net.dimension)
    proj = net.positions @ v
    bps, leafy = _group_breakpoints(proj, net.leaf)
    low = np.concatenate([[-np.inf], bps])
    high = np.concatenate([bps, [np.inf]])
    mids = np.empty(len(low))
    mids[0] = bps[0] - 1.0
    mids[-1] = bps[-1] + 1.0
    mids[1:-1] = 0.5 * (bps[:-1] + bps[1:])
    cur = cut_currents(net, v, mids)
    leaves, _, lv = net.leaf_data
    lc = lv @ v
    lp = proj[leaves]
    above = (lp[None, :] > mids[:, None]).astype(float)
    side = above @ lc
    c_in = 0.5 * float(np.abs(lc).sum())
    return CutScan(v, bps, leafy, low, high, cur, side, c_in)


def vertex_current(net: Net, v, x: str) -> float:
    """Current through the cut immediately below the projection of ``x``."""
    scan = cut_scan(net, v)
    p = float(net.pos(x) @ scan.direction)
    slot = int(np.argmin(np.abs(scan.breakpoints - p)))
    return float(scan.currents[slot])


def _oriented_dag(net: Net, v: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    mask = net.interior_edge_mask
    cur = net.edge_units @ v
    succ: list[list[int]] = [[] for _ in range(net.n_vertices)]
    for e in np.flatnonzero(mask):
        i, j = (int(t) for t in net.edges[e])
        if abs(cur[e]) <= PERP_TOL:
            raise PerpendicularEdgeError((net.ids[i], net.ids[j]), v)
        if cur[e] > 0:
            succ[i].append(j)
        else:
            succ[j].append(i)
    return net.positions @ v, succ


def _longest(net: Net, v: np.ndarray) -> tuple[int, list[str]]:
    pot, succ = _oriented_dag(net, v)
    nodes = sorted((int(i) for i in net.interior), key=lambda i: pot[i])
    depth = {i: 0 for i in nodes}
    prev: dict[int, int] = {}
    for i in nodes:  # potential increases strictly along kept orientations
        for j in succ[i]:
            if depth[i] + 1 > depth[j]:
                depth[j] = depth[i] + 1
                prev[j] = i
    if not nodes:
        return 0, []
    end = max(nodes, key=lambda i: (depth[i], -pot[i]))
    path = [end]
    while path[-1] in prev:
        path.append(prev[path[-1]])
    return depth[end], [net.ids[i] for i in reversed(path)]


def longest_oriented_path(
    net: Net, v, perturb: bool = False, seed: int = 0, retries: int = 5
) -> tuple[int, list[str], np.ndarray]:
    """Edge count of the longest path in the leafless net oriented by c_v > 0.

    Returns ``(D_v, path, direction used)``.  An edge perpendicular to v is
    an error unless ``perturb`` is set, in which case v is rotated by 1e-4
    rad in a seeded random plane, up to ``retries`` times.
    """
    v = _unit(v, net.dimension)
    rng = np.random.default_rng(seed)
    attempt = v
    for n in range(retries + 1):
        try:
            d, path = _longest(net, attempt)
            return d, path, attempt
        except PerpendicularEdgeError:
            if not perturb or n == retries:
                raise
            attempt = _rotate(v, rng, 1e-4 * (n + 1))
    raise AssertionError("unreachable")


def _rotate(v: np.ndarray, rng: np.random.Generator, angle: float) -> np.ndarray:
    if v.size == 1:
        return v
    w = rng.normal(size=v.size)
    w -= (w @ v) * v
    w /= np.linalg.norm(w)
    out = np.cos(angle) * v + np.sin(angle) * w
    return out / np.linalg.norm(out)


def discrete_gradient(net: Net, h: np.ndarray) -> np.ndarray:
    """(grad h)(i, j) = h(j) - h(i) on every stored edge."""
    h = np.asarray(h, dtype=float)
    return h[net.edges[:, 1]] - h[net.edges[:, 0]]


def discrete_divergence(net: Net, g: np.ndarray | Mapping[tuple[str, str], float]) -> np.ndarray:
    """Adjoint of the gradient: div g(x) = sum_y g(y, x) - g(x, y).

    ``g`` is either an array over stored edges (antisymmetric by
    construction) or a mapping on oriented id pairs; in the latter case a
    pair given in both orientations must carry opposite values.
    """
    if isinstance(g, Mapping):
        arr = np.zeros(net.n_edges)
        seen: dict[int, float] = {}
        for (x, y), val in g.items():
            e, sign = net.edge_index(net.index[x], net.index[y])
            oriented = sign * float(val)
            if e in seen and abs(seen[e] - oriented) > 1e-12:
                raise ValueError(f"edge function is not antisymmetric on ({x}, {y})")
            seen[e] = oriented
            arr[e] = oriented
        g = arr
    g = np.asarray(g, dtype=float)
    div = np.zeros(net.n_vertices)
    np.add.at(div, net.edges[:, 1], 2 * g)
    np.add.at(div, net.edges[:, 0], -2 * g)
    return div


@dataclass(frozen=True)
class Rectangle:
    edge: tuple[str, str]
    width: float
    height: float
    bottom: float
    area: float
    kind: str  # "interior" or "leaf"
    left: float = 0.0


@dataclass(frozen=True)
class RectanglePacking:
    direction: np.ndarray
    rectangles: tuple[Rectangle, ...]
    c_in: float
    spread: float  # potential spread of the leafless net
    total_area: float

    @property
    def slack(self) -> float:
        """c_in * spread minus the total interior area (>= 0 expected)."""
        return self.c_in * self.spread - self.total_area

    def csv(self) -> str:
        rows = ["edge_from,edge_to,kind,left,bottom,width,height,area"]
        for r in self.rectangles:
            rows.append(
                f"{r.edge[0]},{r.edge[1]},{r.kind},{r.left:.17g},{r.bottom:.17g},"
                f"{r.width:.17g},{r.height:.17g},{r.area:.17g}"
            )
        return "\n".join(rows) + "\n"


def _layout(rects: list[Rectangle]) -> list[Rectangle]:
    """Greedy left-to-right placement within potential bands (cosmetic)."""
    placed: list[Rectangle] = []
    for r in sorted(rects, key=lambda r: (r.bottom, -r.height, r.edge)):
        top = r.bottom + r.height
        blockers = [
            p for p in placed if p.bottom < top - 1e-12 and r.bottom < p.bottom + p.height - 1e-12
        ]
        left = 0.0
        for cand in sorted({0.0} | {p.left + p.width for p in blockers}):
            if all(cand + r.width <= p.left + 1e-12 or cand >= p.left + p.width - 1e-12
                   for p in blockers):
                left = cand
                break
        placed.append(Rectangle(r.edge, r.width, r.height, r.bottom, r.area, r.kind, left))
    return placed


def rectangle_packing(net: Net, v) -> RectanglePacking:
    """Realise c_v as rectangles: width |c_v(e)|, height |potential drop|.

    Interior edges use their true length as resistance; leaf edges are
    normalised to resistance 1 and kept apart (kind "leaf"), outside the
    area bound.
    """
    if net.dimension != 2:
        raise ValueError("rectangle packing is defined for planar nets (k = 2)")
    v = _unit(v, 2)
    pot = net.positions @ v
    cur = net.edge_units @ v
    rects = []
    for e, (i, j) in enumerate(net.edges):
        w = abs(float(cur[e]))
        if net.interior_edge_mask[e]:
            h = abs(float(pot[j] - pot[i]))
            rects.append(Rectangle((net.ids[i], net.ids[j]), w, h, float(min(pot[i], pot[j])),
                                   float(net.edge_lengths[e]) * w * w, "interior"))
        else:
            inner = j if net.leaf[i] else i
            rects.append(Rectangle((net.ids[i], net.ids[j]), w, w, float(pot[inner]) - w,
                                   w * w, "leaf"))
    inner_rects = [r for r in rects if r.kind == "interior"]
    interior = net.interior
    spread = float(pot[interior].max() - pot[interior].min()) if interior.size else 0.0
    c_in = current_profile(net, v).c_in
    total = float(sum(r.area for r in inner_rects))
    laid = _layout(inner_rects) + [r for r in rects if r.kind == "leaf"]
    return RectanglePacking(v, tuple(laid), c_in, spread, total)


def packing_svg(packing: RectanglePacking, scale: float = 100.0) -> str:
    """SVG of the interior rectangles; horizontal placement is presentational."""
    rects = [r for r in packing.rectangles if r.kind == "interior"]
    width = max([r.left + r.width for r in rects] + [packing.c_in, 1e-9])
    lo = min([r.bottom for r in rects], default=0.0)
    height = max(packing.spread, 1e-9)
    pad = 10
    w_px, h_px = width * scale + 2 * pad, height * scale + 2 * pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px:.3f}" height="{h_px + 20:.3f}">',
        f'<text x="{pad}" y="{h_px + 14:.3f}" font-size="10">rectangle packing along '
        f'v=({", ".join(f"{c:.4g}" for c in packing.direction)}); '
        f"heights exact, horizontal placement presentational</text>",
        f'<rect x="{pad}" y="{pad}" width="{packing.c_in * scale:.6f}" '
        f'height="{packing.spread * scale:.6f}" fill="none" stroke="black" stroke-dasharray="4"/>',
    ]
    for r in rects:
        x = pad + r.left * scale
        y = pad + (height - (r.bottom - lo) - r.height) * scale
        out.append(
            f'<rect x="{x:.6f}" y="{y:.6f}" width="{r.width * scale:.6f}" '
            f'height="{r.height * scale:.6f}" fill="#9cc3e6" stroke="#1f4e79">'
            f"<title>{r.edge[0]}-{r.edge[1]}</title></rect>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
