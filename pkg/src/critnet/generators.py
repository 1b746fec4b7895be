"""Canonical critical nets, exactly balanced by construction."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .net import Net, NetError, build_net

VERTEX_BUDGET = 200_000
S4 = 1.0 - 3.0**-0.5  # Steiner point abscissa of the unit-square fixture

FIXTURES = ("CROSS", "FERMAT3", "STEINER4", "SEGMENT")


def _budget(n: int, budget: int) -> None:
    if n > budget:
        raise NetError(f"net would have {n} vertices, over the budget of {budget}")


def _lattice_id(p: Sequence[int]) -> str:
    return "p(" + ",".join(str(c) for c in p) + ")"


def _grid_parts(d: int, n: int, budget: int):
    if d < 1 or n < 1:
        raise NetError("grid needs d >= 1 and n >= 1")
    _budget((n + 1) ** d + 2 * d * (n + 1) ** (d - 1), budget)
    verts: list[tuple[str, tuple[float, ...], bool]] = []
    edges: list[tuple[str, str]] = []
    leaves: list[tuple[str, tuple[float, ...], bool]] = []
    for p in itertools.product(range(n + 1), repeat=d):
        pid = _lattice_id(p)
        verts.append((pid, tuple(float(c) for c in p), False))
        for a in range(d):
            if p[a] < n:
                q = list(p)
                q[a] += 1
                edges.append((pid, _lattice_id(q)))
            for side, at in ((-1, 0), (1, n)):
                if p[a] == at:
                    q = [float(c) for c in p]
                    q[a] += side
                    lid = f"leaf{pid}{'-+'[side > 0]}x{a}"
                    leaves.append((lid, tuple(q), True))
                    edges.append((pid, lid))
    return verts + leaves, edges


def grid_net(d: int, n: int, budget: int = VERTEX_BUDGET) -> Net:
    """Packing of the cube [0, n]^d by unit cubes.

    Every boundary lattice point gets one unit leaf ray per missing axis
    direction, so each lattice point has one segment in each of the 2d axis
    directions.  Exact counts go into ``meta``; the classical counts
    (``2 d n^(d-1)`` leaves, ``2 d n^d`` total interior degree) are leading
    order only.
    """
    verts, edges = _grid_parts(d, n, budget)
    meta = {
        "family": "GRID",
        "params": {"d": d, "n": n},
        "n_leaves": 2 * d * (n + 1) ** (d - 1),
        "n_interior": (n + 1) ** d,
        "interior_degree_sum": 2 * d * (n + 1) ** d,
        "interior_length": d * n * (n + 1) ** (d - 1),
        "leading_n_leaves": 2 * d * n ** (d - 1),
        "leading_degree_sum": 2 * d * n**d,
        "longest_path_target": d * n,
    }
    return build_net(d, verts, edges, meta=meta)


# Flat-top honeycomb.  A vertex key (a, b) sits at (a / 2, b * sqrt(3) / 2);
# the six unit directions in key units are below.
_HEX_DIRS = ((2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1))
_R3 = math.sqrt(3.0)


def _hex_pos(a: float, b: float) -> tuple[float, float]:
    return (a / 2.0, b * _R3 / 2.0)


def hexagon_net(rows: int, cols: int, budget: int = VERTEX_BUDGET) -> Net:
    """Honeycomb of unit regular hexagons, ``rows`` x ``cols`` in offset layout.

    Degree-2 boundary vertices receive a leaf ray of length 1/2 along the
    missing third direction (half length keeps leaves of neighbouring
    boundary vertices apart).
    """
    if rows < 1 or cols < 1:
        raise NetError("hexagon_net needs rows, cols >= 1")
    _budget(6 * rows * cols * 2, budget)
    nbrs: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for r in range(rows):
        for c in range(cols):
            ca, cb = 3 * c, 2 * r + (c % 2)
            ring = [(ca + da, cb + db) for da, db in _HEX_DIRS]
            for u, v in zip(ring, ring[1:] + ring[:1]):
                nbrs.setdefault(u, set()).add(v)
                nbrs.setdefault(v, set()).add(u)
    keys = sorted(nbrs, key=lambda t: (t[1], t[0]))
    name = {k: f"h({k[0]},{k[1]})" for k in keys}
    verts: list[tuple[str, tuple[float, float], bool]] = [
        (name[k], _hex_pos(*k), False) for k in keys
    ]
    edges = sorted({tuple(sorted((name[u], name[v]))) for u in keys for v in nbrs[u]})
    for k in keys:
        if len(nbrs[k]) == 2:
            (a1, b1), (a2, b2) = [(v[0] - k[0], v[1] - k[1]) for v in sorted(nbrs[k])]
            da, db = -(a1 + a2), -(b1 + b2)
            lid = f"leaf{name[k]}"
            verts.append((lid, _hex_pos(k[0] + da / 2, k[1] + db / 2), True))
            edges.append((name[k], lid))
    n_leaves = sum(1 for v in verts if v[2])
    meta = {
        "family": "HEX",
        "params": {"rows": rows, "cols": cols},
        "n_leaves": n_leaves,
        "n_interior": len(keys),
        "interior_length": float(sum(1 for u in keys for v in nbrs[u]) // 2),
    }
    return build_net(2, verts, edges, meta=meta)


def _line_crossing(p1, u1, p2, u2) -> tuple[float, float] | None:
    """Parameters (t, s) with p1 + t u1 = p2 + s u2, or None if parallel."""
    m = np.array([[u1[0], -u2[0]], [u1[1], -u2[1]]], dtype=float)
    det = np.linalg.det(m)
    if abs(det) < 1e-15:
        return None
    t, s = np.linalg.solve(m, np.asarray(p2, float) - np.asarray(p1, float))
    return float(t), float(s)


def line_arrangement_net(lines: Sequence[tuple[Sequence[float], Sequence[float]]], R: float) -> Net:
    """Arrangement of lines clipped to the disk of radius ``R``.

    Each line is ``(point, direction)``.  Pairwise crossings become degree-4
    vertices (two collinear pairs, hence balanced); the points where the
    lines leave the disk are the leaves.
    """
    if not lines:
        raise NetError("need at least one line")
    pts = [np.asarray(p, float) for p, _ in lines]
    dirs = []
    for _, u in lines:
        u = np.asarray(u, float)
        dirs.append(u / np.linalg.norm(u))
    n = len(lines)
    cuts: list[list[tuple[float, str]]] = [[] for _ in range(n)]
    verts: list[tuple[str, np.ndarray, bool]] = []
    for i in range(n):
        b = pts[i] @ dirs[i]
        disc = b * b - (pts[i] @ pts[i] - R * R)
        if disc <= 0:
            raise NetError(f"line {i} misses the disk of radius {R}")
        sq = math.sqrt(disc)
        for t, tag in ((-b - sq, "-"), (-b + sq, "+")):
            lid = f"L{i}{tag}"
            verts.append((lid, pts[i] + t * dirs[i], True))
            cuts[i].append((t, lid))
    for i, j in itertools.combinations(range(n), 2):
        cross = abs(dirs[i][0] * dirs[j][1] - dirs[i][1] * dirs[j][0])
        if cross < math.sin(1e-6):
            raise NetError(f"lines {i} and {j} are parallel")
        t, s = _line_crossing(pts[i], dirs[i], pts[j], dirs[j])
        x = pts[i] + t * dirs[i]
        if np.linalg.norm(x) >= R - 1e-9:
            raise NetError(f"lines {i} and {j} cross outside the disk")
        vid = f"x{i},{j}"
        verts.append((vid, x, False))
        cuts[i].append((t, vid))
        cuts[j].append((s, vid))
    edges = []
    for i in range(n):
        chain = sorted(cuts[i])
        for (t0, a), (t1, b) in zip(chain, chain[1:]):
            if t1 - t0 <= 1e-9:
                raise NetError(f"triple point on line {i} near {a}/{b}")
            edges.append((a, b))
    meta = {
        "family": "LINES",
        "params": {"lines": [[list(map(float, p)), list(map(float, u))] for p, u in lines], "R": R},
        "n_leaves": 2 * n,
        "n_interior": n * (n - 1) // 2,
    }
    return build_net(2, verts, edges, meta=meta)


def _split_segments(
    verts: dict[str, np.ndarray],
    fixed: list[tuple[str, str]],
    added: list[tuple[str, str]],
) -> tuple[dict[str, np.ndarray], list[tuple[str, str]]]:
    """Insert crossing vertices where ``added`` segments cross any segment."""
    segs = fixed + added
    cuts: list[list[tuple[float, str]]] = [[] for _ in segs]
    verts = dict(verts)
    for ia in range(len(fixed), len(segs)):
        a0, a1 = segs[ia]
        pa, qa = verts[a0], verts[a1]
        for ib in range(ia):
            b0, b1 = segs[ib]
            pb, qb = verts[b0], verts[b1]
            hit = _line_crossing(pa, qa - pa, pb, qb - pb)
            if hit is None:
                continue
            t, s = hit
            lo, hi = -1e-9, 1 + 1e-9
            if not (lo < t < hi and lo < s < hi):
                continue
            if min(t, 1 - t, s, 1 - s) <= 1e-9:
                raise NetError(f"segment {a0}-{a1} passes through an endpoint of {b0}-{b1}")
            vid = f"c[{a0}|{b0}]"
            verts[vid] = pa + t * (qa - pa)
            cuts[ia].append((t, vid))
            cuts[ib].append((s, vid))
    edges = []
    for (a, b), cs in zip(segs, cuts):
        chain = [(0.0, a)] + sorted(cs) + [(1.0, b)]
        for (t0, u), (t1, v) in zip(chain, chain[1:]):
            if t1 - t0 <= 1e-9:
                raise NetError(f"triple point on segment {a}-{b}")
            edges.append((u, v))
    return verts, edges


def _staircase_ok(n: int, m: float, b: float, margin: float) -> bool:
    for i in range(n):
        x = (i - b) / m  # crossing of y = i
        if not (i + margin < x < i + 1 - margin):
            return False
        y = m * (i + 1) + b  # crossing of x = i + 1
        if not (i + margin < y < i + 1 - margin):
            return False
    return True


def exadiam_net(n: int, k: int, eps: float = 1e-3, budget: int = VERTEX_BUDGET) -> Net:
    """Unit-square packing of side n plus k near-parallel lines.

    Line ``i`` (1-based) has slope ``1 + i * eps`` and an offset found by a
    deterministic search so that it crosses all 2n edges of the staircase
    (0,0) -> (1,0) -> (1,1) -> ... -> (n,n).  Each line is a segment whose
    two ends are leaves placed just beyond the first and last staircase
    crossings.
    """
    if n < 1 or k < 0:
        raise NetError("exadiam_net needs n >= 1 and k >= 0")
    if k == 0:
        return grid_net(2, n, budget)
    verts3, edges = _grid_parts(2, n, budget)
    leaf_ids = {v[0] for v in verts3 if v[2]}
    pos = {v[0]: np.asarray(v[1], float) for v in verts3}
    all_pts = np.array(list(pos.values()))
    offsets: list[float] = []
    line_segs: list[tuple[str, str]] = []
    for i in range(1, k + 1):
        m = 1.0 + i * eps
        base = -i / (k + 1)
        for step in range(0, 200):
            delta = (step + 1) // 2 * 1e-3 * (1 if step % 2 else -1)
            b = base + delta
            if not -1 < b < 0 or not _staircase_ok(n, m, b, 1e-6):
                continue
            dist = np.abs(m * all_pts[:, 0] - all_pts[:, 1] + b) / math.hypot(m, 1)
            if dist.min() > 1e-6 and all(abs(b - o) > 1e-6 for o in offsets):
                break
        else:
            raise NetError(
                f"cannot place line {i} (slope {m}) across all {2 * n} staircase edges"
            )
        offsets.append(b)
        x_first = -b / m
        x_last_hit = (n - b) / m
        xs = (0.5 * x_first, 0.5 * (n + x_last_hit))
        a_id, b_id = f"line{i}-", f"line{i}+"
        pos[a_id] = np.array([xs[0], m * xs[0] + b])
        pos[b_id] = np.array([xs[1], m * xs[1] + b])
        leaf_ids.update((a_id, b_id))
        line_segs.append((a_id, b_id))
    pos, edges = _split_segments(pos, edges, line_segs)
    verts = [(vid, p, vid in leaf_ids) for vid, p in pos.items()]
    meta = {
        "family": "EXADIAM",
        "params": {"n": n, "k": k, "eps": eps},
        "offsets": offsets,
        "n_leaves": 4 * (n + 1) + 2 * k,
        "leading_n_leaves": 4 * n + 2 * k,
        "corner_correction": 4,
        "longest_path_target": 2 * (k + 1) * n,
    }
    return build_net(2, verts, edges, meta=meta)


def fixture(tag: str) -> Net:
    """Small named nets: CROSS, FERMAT3, STEINER4 and SEGMENT."""
    tag = tag.upper()
    if tag == "CROSS":
        verts = [("o", (0.0, 0.0)), ("e", (1.0, 0.0)), ("n", (0.0, 1.0)),
                 ("w", (-1.0, 0.0)), ("s", (0.0, -1.0))]
        edges = [("o", x) for x in "enws"]
    elif tag == "FERMAT3":
        verts = [("o", (0.0, 0.0))]
        edges = []
        for i, deg in enumerate((90.0, 210.0, 330.0)):
            a = math.radians(deg)
            verts.append((f"l{i}", (math.cos(a), math.sin(a))))
            edges.append(("o", f"l{i}"))
    elif tag == "STEINER4":
        verts = [("s-", (-S4, 0.0)), ("s+", (S4, 0.0)),
                 ("l--", (-1.0, -1.0)), ("l-+", (-1.0, 1.0)),
                 ("l+-", (1.0, -1.0)), ("l++", (1.0, 1.0))]
        edges = [("s-", "s+"), ("s-", "l--"), ("s-", "l-+"), ("s+", "l+-"), ("s+", "l++")]
    elif tag == "SEGMENT":
        verts = [("a", (-1.0, 0.0)), ("m", (0.0, 0.0)), ("b", (1.0, 0.0))]
        edges = [("a", "m"), ("m", "b")]
    else:
        raise NetError(f"unknown fixture {tag!r}; choose from {FIXTURES}")
    return build_net(2, verts, edges, meta={"family": tag})


def random_star_topology(n_leaves: int, seed: int) -> tuple[list[tuple[str, str]], dict, dict]:
    """Random planar two-level tree: leaves on a jittered circle, grouped in
    runs of 2 or 3 consecutive leaves around a hub, hubs joined to a center.

    Returns ``(edges, leaf_positions, initial_interior_positions)`` ready for
    relaxation.
    """
    if n_leaves < 4:
        raise NetError("need at least 4 leaves")
    rng = np.random.default_rng(seed)
    step = 2 * math.pi / n_leaves
    ang = np.arange(n_leaves) * step + rng.uniform(-0.2, 0.2, n_leaves) * step
    rad = rng.uniform(0.8, 1.2, n_leaves)
    leaves = {f"l{i}": (rad[i] * math.cos(ang[i]), rad[i] * math.sin(ang[i])) for i in range(n_leaves)}
    groups: list[list[int]] = []
    i = 0
    while i < n_leaves:
        left = n_leaves - i
        size = 2 if left in (2, 4) else 3 if left == 3 else int(rng.integers(2, 4))
        groups.append(list(range(i, i + size)))
        i += size
    edges: list[tuple[str, str]] = []
    init: dict[str, tuple[float, float]] = {"c": tuple(rng.normal(0, 0.05, 2))}
    for g, members in enumerate(groups):
        hub = f"h{g}"
        mean = np.mean([leaves[f"l{m}"] for m in members], axis=0)
        init[hub] = tuple(0.5 * mean + rng.normal(0, 0.02, 2))
        edges.append(("c", hub))
        edges.extend((hub, f"l{m}") for m in members)
    return edges, leaves, init
