"""Executable catalog of the identities and bounds satisfied by critical nets.

Every check returns a :class:`CheckReport`; ``pass`` holds exactly when the
residual is at most the tolerance.  Inequalities ``a <= b`` use the residual
``a - b`` (so a negative residual is slack).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .criticality import (
    anchor_side,
    chopping,
    dilation,
    inside_variation,
    rotation,
    scaling,
    swelling,
    translation,
    vertex_residuals,
)
from .currents import (
    PerpendicularEdgeError,
    cin_consistency,
    cut_scan,
    longest_oriented_path,
)
from .net import WHOLE, Ball, HalfSpace, Net, NetError, outer_radius, total_interior_length

IDENTITY_TOL = 1e-8
INEQ_TOL = 1e-9
STRUCT_TOL = 1e-9
SWELL_MIDDLE_TOL = 1e-12

CHECKS = (
    "leaf_count_min",
    "vertex_balance",
    "length_identity",
    "outer_radius_bound",
    "leaf_sum_zero",
    "torque_zero",
    "degree_bound_swelling",
    "swelling_identity",
    "further_relation",
    "cin_bound",
    "cut_lemma",
    "degree_bound_current",
    "isoperimetric",
    "combinatorial",
    "convex_hull",
    "face_convexity",
    "lemma_1_2",
)
# Checks that remain meaningful on nets that are not critical.
UNCONDITIONAL = ("leaf_count_min", "vertex_balance", "lemma_1_2")


@dataclass(frozen=True)
class Options:
    seed: int = 0
    n_directions: int = 20
    n_origins: int = 10
    n_domains: int = 5
    perturb: bool = False
    tol: float | None = None  # overrides the identity tolerance

    def identity_tol(self) -> float:
        return IDENTITY_TOL if self.tol is None else self.tol

    def rng(self, salt: str) -> np.random.Generator:
        # independent, reproducible stream per check
        return np.random.default_rng([self.seed, sum(ord(c) * 31**i for i, c in enumerate(salt)) % 2**32])


@dataclass
class CheckReport:
    check: str
    status: str  # pass, fail, skipped, not_asserted
    measured: float | None = None
    target: float | None = None
    residual: float | None = None
    tolerance: float | None = None
    reason: str = ""
    details: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "status": self.status,
            "measured": _num(self.measured),
            "target": _num(self.target),
            "residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "reason": self.reason,
            "details": [{k: _num(v) for k, v in d.items()} for d in self.details],
        }


def _num(x):
    if x is None or isinstance(x, (str, bool)):
        return x
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in np.asarray(x, dtype=float).tolist()]
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _report(check: str, measured, target, residual, tol, reason="", details=None) -> CheckReport:
    status = "pass" if residual <= tol else "fail"
    return CheckReport(check, status, float(measured), float(target), float(residual), tol,
                       reason, details or [])


# -- helpers -----------------------------------------------------------------


def random_unit(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.normal(size=k)
    return v / np.linalg.norm(v)


def random_basis(rng: np.random.Generator, k: int) -> np.ndarray:
    """Rows form a random orthonormal basis of R^k."""
    q, r = np.linalg.qr(rng.normal(size=(k, k)))
    return (q * np.sign(np.diag(r))).T


def spread(net: Net, v: np.ndarray) -> float:
    """Extent of the projection of the interior vertices onto v."""
    p = net.positions[net.interior] @ v
    return float(p.max() - p.min()) if p.size else 0.0


def _scale(net: Net) -> float:
    return 1.0 + float(np.abs(net.positions).max(initial=0.0))


def _random_point(net: Net, rng: np.random.Generator) -> np.ndarray:
    lo, hi = net.positions.min(axis=0), net.positions.max(axis=0)
    return lo + rng.random(net.dimension) * (hi - lo + 1e-3) - 5e-4


def _avoiding(values: np.ndarray, target: float, gap: float = 1e-6) -> float:
    """``target`` moved off any of ``values`` by at least ``gap``."""
    while values.size and np.min(np.abs(values - target)) < gap:
        target += 3 * gap
    return target


# -- checks ------------------------------------------------------------------


def check_leaf_count_min(net: Net, opt: Options) -> CheckReport:
    worst = math.inf
    rows = []
    for comp in net.components():
        n_leaves = int(net.leaf[comp].sum())
        branching = bool((net.degree[comp] >= 3).any())
        need = 3 if branching else 2
        rows.append({"component": float(comp[0]), "leaves": float(n_leaves), "required": float(need)})
        worst = min(worst, n_leaves - need)
    rep = _report("leaf_count_min", net.n_leaves, 2, -worst, 0.0, details=rows)
    if not rep.passed:
        rep.reason = "a component has too few leaves to be critical"
    return rep


def check_vertex_balance(net: Net, opt: Options) -> CheckReport:
    res = vertex_residuals(net)[net.interior]
    norms = np.linalg.norm(res, axis=1)
    m = float(norms.max(initial=0.0))
    rep = _report("vertex_balance", m, 0.0, m, opt.identity_tol())
    if norms.size:
        rep.reason = f"worst vertex {net.ids[net.interior[int(np.argmax(norms))]]}"
    return rep


def _leaf_terms(net: Net) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(leaf positions, interior neighbour positions, leaf vectors) for
    leaves attached to an interior vertex."""
    leaves, nbrs, lv = net.leaf_data
    keep = ~net.leaf[nbrs]
    return net.positions[leaves[keep]], net.positions[nbrs[keep]], lv[keep]


def check_length_identity(net: Net, opt: Options) -> CheckReport:
    L = total_interior_length(net)
    _, xn, lv = _leaf_terms(net)
    rng = opt.rng("length_identity")
    origins = [net.center] + [_random_point(net, rng) for _ in range(opt.n_origins)]
    rows = []
    for o in origins:
        rhs = float(np.einsum("ij,ij->", xn - o, lv))
        rows.append({"origin": o, "rhs": rhs, "residual": abs(L - rhs)})
    res = max(r["residual"] for r in rows)
    return _report("length_identity", L, rows[0]["rhs"], res, opt.identity_tol(), details=rows)


def check_outer_radius_bound(net: Net, opt: Options) -> CheckReport:
    if net.interior.size == 0:
        return CheckReport("outer_radius_bound", "skipped", reason="no interior vertex")
    L = total_interior_length(net)
    r, c = outer_radius(net)
    bound = r * net.n_leaves
    rep = _report("outer_radius_bound", L, bound, L - bound, INEQ_TOL,
                  details=[{"radius": r, "center": c, "ratio": L / bound if bound > 0 else 0.0}])
    return rep


def check_leaf_sum_zero(net: Net, opt: Options) -> CheckReport:
    s = net.leaf_data[2].sum(axis=0)
    n = float(np.linalg.norm(s))
    return _report("leaf_sum_zero", n, 0.0, n, STRUCT_TOL, details=[{"sum": s}])


def torque_matrix(net: Net) -> np.ndarray:
    leaves, _, lv = net.leaf_data
    x = net.positions[leaves]
    m = lv.T @ x
    return m - m.T


def check_torque_zero(net: Net, opt: Options) -> CheckReport:
    n = float(np.linalg.norm(torque_matrix(net)))
    return _report("torque_zero", n, 0.0, n, STRUCT_TOL)


def check_degree_bound_swelling(net: Net, opt: Options) -> CheckReport:
    nu = int(net.degree[net.interior].max(initial=0))
    return _report("degree_bound_swelling", nu, net.n_leaves, nu - net.n_leaves, 0.0)


def swelling_terms(net: Net, c: np.ndarray) -> tuple[int, float, float]:
    """(degree at c, middle sum over edges not incident with c, leaf sum).

    The swelling field is applied to every vertex, leaves included, so the
    leaf sum is over the leaf vectors dotted with the unit position of the
    leaf about c.  An edge passing through c contributes 2 to the middle sum.
    """
    d = net.positions - c
    r = np.linalg.norm(d, axis=1)
    at = r <= STRUCT_TOL * _scale(net)
    hat = np.zeros_like(d)
    hat[~at] = d[~at] / r[~at, None]
    nu = int(net.degree[at].sum())
    e = net.edges
    keep = ~at[e[:, 0]] & ~at[e[:, 1]]
    w = -net.edge_units[keep]  # (x - y)/|x - y|
    middle = float(np.einsum("ij,ij->", w, hat[e[keep, 0]] - hat[e[keep, 1]]))
    leaves, _, lv = net.leaf_data
    rhs = float(np.einsum("ij,ij->", lv, hat[leaves]))
    return nu, middle, rhs


def check_swelling_identity(net: Net, opt: Options) -> CheckReport:
    rng = opt.rng("swelling_identity")
    centers = [net.positions[i] for i in net.interior]
    centers += [_random_point(net, rng) for _ in range(opt.n_origins)]
    rows = []
    for c in centers:
        nu, mid, rhs = swelling_terms(net, c)
        rows.append({"center": c, "degree": nu, "middle": mid, "rhs": rhs,
                     "residual": abs(nu + mid - rhs)})
    res = max(r["residual"] for r in rows)
    low = min(r["middle"] for r in rows)
    tol = opt.identity_tol()
    rep = _report("swelling_identity", rows[0]["degree"] + rows[0]["middle"], rows[0]["rhs"],
                  res, tol, details=rows)
    if low < -SWELL_MIDDLE_TOL:
        rep.status = "fail"
        rep.reason = f"middle term {low:.3g} is negative"
    return rep


def stress_sides(net: Net) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of sum_int |xy| w w^T = sum_leaves lhat x_N^T (k x k)."""
    m = net.interior_edge_mask
    w = net.edge_units[m]
    lhs = (w * net.edge_lengths[m, None]).T @ w
    _, xn, lv = _leaf_terms(net)
    return lhs, lv.T @ xn


def check_further_relation(net: Net, opt: Options) -> CheckReport:
    rng = opt.rng("further_relation")
    lhs, rhs = stress_sides(net)
    rows = []
    for _ in range(opt.n_origins):
        e = random_unit(rng, net.dimension)
        a = 2 * lhs @ e
        b = rhs @ e + rhs.T @ e
        rows.append({"e": e, "residual": float(np.linalg.norm(a - b))})
    res = max(r["residual"] for r in rows)
    return _report("further_relation", res, 0.0, res, opt.identity_tol(), details=rows)


def _directions(net: Net, opt: Options, salt: str) -> list[np.ndarray]:
    rng = opt.rng(salt)
    return [random_unit(rng, net.dimension) for _ in range(opt.n_directions)]


def check_cin_bound(net: Net, opt: Options) -> CheckReport:
    rows = []
    for v in _directions(net, opt, "cin_bound"):
        plus, minus, c_in = cin_consistency(net, v)
        agree = max(abs(plus - c_in), abs(minus - c_in))
        rows.append({"v": v, "c_in": c_in, "bound": net.n_leaves / 2,
                     "residual": max(c_in - net.n_leaves / 2, agree)})
    res = max(r["residual"] for r in rows)
    top = max(r["c_in"] for r in rows)
    return _report("cin_bound", top, net.n_leaves / 2, res, INEQ_TOL, details=rows)


def check_cut_lemma(net: Net, opt: Options) -> CheckReport:
    rows = []
    for v in _directions(net, opt, "cut_lemma"):
        scan = cut_scan(net, v)
        rows.append({
            "v": v,
            "max_cut": float(scan.currents.max()),
            "c_in": scan.c_in,
            "lemma": scan.lemma_residual(),
            "jump": scan.interior_jump(),
            "excess": scan.excess(),
            "residual": max(scan.lemma_residual(), scan.interior_jump(), scan.excess()),
        })
    res = max(r["residual"] for r in rows)
    return _report("cut_lemma", max(r["lemma"] for r in rows), 0.0, res, INEQ_TOL, details=rows)


def check_degree_bound_current(net: Net, opt: Options) -> CheckReport:
    nu = int(net.degree[net.interior].max(initial=0))
    bound = math.sqrt(net.dimension) * net.n_leaves
    return _report("degree_bound_current", nu, bound, nu - bound, 0.0)


def _bases(net: Net, opt: Options, salt: str) -> list[np.ndarray]:
    rng = opt.rng(salt)
    return [random_basis(rng, net.dimension) for _ in range(opt.n_directions)]


def isoperimetric_ratio(net: Net, basis: np.ndarray) -> tuple[float, float]:
    """(2L, (sum_i spread_i^2)^(1/2) |leaves|) for the rows of ``basis``."""
    L = total_interior_length(net)
    s = math.sqrt(sum(spread(net, v) ** 2 for v in basis))
    return 2 * L, s * net.n_leaves


def check_isoperimetric(net: Net, opt: Options) -> CheckReport:
    L = total_interior_length(net)
    axis = np.eye(net.dimension)
    rows = []
    for i, basis in enumerate([axis] + _bases(net, opt, "isoperimetric")):
        lhs, rhs = isoperimetric_ratio(net, basis)
        row = {"basis": "axis" if i == 0 else float(i), "lhs": lhs, "rhs": rhs,
               "ratio": lhs / rhs if rhs > 0 else 0.0, "residual": lhs - rhs}
        if net.dimension == 2:
            mx = max(spread(net, basis[0]), spread(net, basis[1]))
            bound = math.sqrt(2) / 2 * net.n_leaves * mx
            row["max_form_residual"] = L - bound
            row["residual"] = max(row["residual"], L - bound)
        rows.append(row)
    res = max(r["residual"] for r in rows)
    return _report("isoperimetric", rows[0]["lhs"], rows[0]["rhs"], res, INEQ_TOL, details=rows)


def check_combinatorial(net: Net, opt: Options) -> CheckReport:
    nu = float(net.degree[net.interior].sum())
    rows = []
    for i, basis in enumerate(_bases(net, opt, "combinatorial")):
        ds = []
        for j, v in enumerate(basis):
            try:
                d, _, _ = longest_oriented_path(net, v, perturb=opt.perturb,
                                                seed=opt.seed + 7919 * i + j)
            except PerpendicularEdgeError as err:
                return CheckReport("combinatorial", "skipped", reason=str(err))
            ds.append(d)
        bound = 2 * net.n_leaves + math.sqrt(sum(d * d for d in ds)) * net.n_leaves
        rows.append({"basis": float(i), "D": [float(d) for d in ds], "bound": bound,
                     "residual": nu - bound})
    res = max(r["residual"] for r in rows)
    return _report("combinatorial", nu, min(r["bound"] for r in rows), res, INEQ_TOL,
                   details=rows)


def hull_violation(points: np.ndarray, hull_pts: np.ndarray) -> float:
    """Largest distance by which ``points`` stick out of conv(hull_pts)."""
    base = hull_pts.mean(axis=0)
    q = hull_pts - base
    p = points - base
    scale = 1.0 + float(np.abs(q).max(initial=0.0))
    _, sv, vt = np.linalg.svd(q, full_matrices=False)
    rank = int((sv > 1e-9 * scale).sum())
    basis = vt[:rank]
    off = float(np.linalg.norm(p - (p @ basis.T) @ basis, axis=1).max(initial=0.0))
    if rank == 0:
        return off
    pq, pp = q @ basis.T, p @ basis.T
    if rank == 1:
        lo, hi = pq.min(), pq.max()
        inside = float(np.maximum(pp[:, 0] - hi, lo - pp[:, 0]).max())
    else:
        eq = ConvexHull(pq).equations
        inside = float((pp @ eq[:, :-1].T + eq[:, -1]).max())
    return max(off, inside)


def check_convex_hull(net: Net, opt: Options) -> CheckReport:
    if net.n_leaves == 0:
        return CheckReport("convex_hull", "skipped", reason="net has no leaves")
    v = hull_violation(net.positions, net.positions[net.leaves])
    return _report("convex_hull", v, 0.0, v, STRUCT_TOL)


def planar_faces(net: Net) -> list[list[int]]:
    """Boundary walks of all faces of a planar straight-line net."""
    pos = net.positions
    order: list[list[int]] = []
    for i, nb in enumerate(net.neighbors):
        ang = [math.atan2(pos[j, 1] - pos[i, 1], pos[j, 0] - pos[i, 0]) for j in nb]
        order.append([nb[t] for t in np.argsort(ang, kind="stable")])
    rank = [{j: t for t, j in enumerate(o)} for o in order]
    seen: set[tuple[int, int]] = set()
    faces = []
    for i, j in net.edges:
        for start in ((int(i), int(j)), (int(j), int(i))):
            if start in seen:
                continue
            walk = []
            u, v = start
            while (u, v) not in seen:
                seen.add((u, v))
                walk.append(u)
                o = order[v]
                # next edge clockwise from (v -> u) keeps the face on the left
                w = o[(rank[v][u] - 1) % len(o)]
                u, v = v, w
            faces.append(walk)
    return faces


def _area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def check_face_convexity(net: Net, opt: Options) -> CheckReport:
    if net.dimension != 2:
        return CheckReport("face_convexity", "skipped", reason="defined for planar nets only")
    scale = _scale(net)
    tol = STRUCT_TOL * scale
    leaf_pts = net.positions[net.leaves]
    rows = []
    for walk in planar_faces(net):
        poly = net.positions[walk]
        area = _area(poly)
        if area <= tol:  # outer face of a component, or degenerate
            continue
        if any(net.leaf[i] for i in walk):
            continue
        verts = np.unique(poly, axis=0)
        try:
            hull = ConvexHull(verts)
        except QhullError:
            continue
        eq = hull.equations
        if leaf_pts.size and ((leaf_pts @ eq[:, :2].T + eq[:, 2]).max(axis=1) < -tol).any():
            continue  # a leaf lies inside this face
        gap = max(0.0, float((-(verts @ eq[:, :2].T + eq[:, 2]).max(axis=1)).max()))
        mismatch = abs(hull.volume - area)
        rows.append({"face": ",".join(net.ids[i] for i in walk), "area": area,
                     "hull_area": float(hull.volume), "residual": max(gap, mismatch)})
    if not rows:
        return CheckReport("face_convexity", "pass", 0.0, 0.0, 0.0, tol,
                           reason="no bounded leafless faces")
    res = max(r["residual"] for r in rows)
    return _report("face_convexity", float(len(rows)), 0.0, res, tol, details=rows)


def catalog_deformations(net: Net, rng: np.random.Generator) -> list[tuple[str, Any]]:
    k = net.dimension
    pts = net.positions
    g = rng.normal(size=(k, k))
    v = random_unit(rng, k)
    proj = pts @ v
    off = _avoiding(proj, float(rng.uniform(proj.min(), proj.max())))
    return [
        ("scaling", scaling(center=_random_point(net, rng))),
        ("dilation", dilation(random_unit(rng, k), center=_random_point(net, rng))),
        ("swelling", swelling(center=_random_point(net, rng))),
        ("chopping", chopping(v, offset=off)),
        ("translation", translation(random_unit(rng, k))),
        ("rotation", rotation(generator=(g - g.T) / max(np.linalg.norm(g - g.T), 1e-12),
                              center=_random_point(net, rng))),
    ]


def random_domains(net: Net, rng: np.random.Generator, count: int) -> list:
    """Half-spaces and balls whose boundaries avoid every vertex."""
    out = []
    inner = net.positions[net.interior] if net.interior.size else net.positions
    for n in range(count):
        if n % 2 == 0:
            v = random_unit(rng, net.dimension)
            proj = net.positions @ v
            ip = inner @ v
            off = float(rng.uniform(ip.min(), ip.max())) if np.ptp(ip) > 0 else float(ip[0]) - 0.5
            out.append(HalfSpace(v, _avoiding(proj, off)))
        else:
            c = inner[rng.integers(len(inner))] + 0.1 * rng.normal(size=net.dimension)
            dist = np.linalg.norm(net.positions - c, axis=1)
            rad = float(rng.uniform(0.2, 1.0)) * float(dist.max())
            out.append(Ball(c, _avoiding(dist, max(rad, 1e-3))))
    return out


def check_lemma_1_2(net: Net, opt: Options) -> CheckReport:
    """Restriction identity: on each domain, the first variation of the
    restricted interior equals the sum of l-hat . dx over its anchors."""
    rng = opt.rng("lemma_1_2")
    defs = catalog_deformations(net, rng)
    domains = [("whole", WHOLE)] + [
        (f"domain{i}", d) for i, d in enumerate(random_domains(net, rng, opt.n_domains))
    ]
    rows = []
    for dname, dom in domains:
        for name, d in defs:
            try:
                lhs = inside_variation(net, d, dom)
                rhs = anchor_side(net, d, dom)
            except NetError as err:
                rows.append({"domain": dname, "deformation": name, "skipped": str(err)})
                continue
            rows.append({"domain": dname, "deformation": name, "lhs": lhs, "rhs": rhs,
                         "residual": abs(lhs - rhs)})
    done = [r for r in rows if "residual" in r]
    if not done:
        return CheckReport("lemma_1_2", "skipped", reason="no admissible domain", details=rows)
    tol = opt.identity_tol() * (1 + net.n_edges)
    res = max(r["residual"] for r in done)
    return _report("lemma_1_2", res, 0.0, res, tol, details=rows)


RUNNERS: dict[str, Callable[[Net, Options], CheckReport]] = {
    name: globals()[f"check_{name}"] for name in CHECKS
}


def run_check(net: Net, check: str, options: Options | None = None) -> CheckReport:
    if check not in RUNNERS:
        raise KeyError(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
    return RUNNERS[check](net, options or Options())


@dataclass
class SuiteResult:
    reports: list[CheckReport]

    @property
    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0, "not_asserted": 0}
        for r in self.reports:
            out[r.status] += 1
        return out

    @property
    def all_passed(self) -> bool:
        return not any(r.status == "fail" for r in self.reports)

    def first_failure(self) -> CheckReport | None:
        return next((r for r in self.reports if r.status == "fail"), None)


def run_suite(net: Net, options: Options | None = None,
              checks: tuple[str, ...] | list[str] | None = None) -> SuiteResult:
    """Run checks in catalog order.

    When the net fails vertex balance, bound checks are reported as
    ``not_asserted``: they presuppose a critical net.
    """
    options = options or Options()
    wanted = CHECKS if checks is None else tuple(c for c in CHECKS if c in checks)
    unknown = set(checks or ()) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown checks: {sorted(unknown)}")
    balance = run_check(net, "vertex_balance", options)
    critical = balance.passed
    reports = []
    for c in wanted:
        if c == "vertex_balance":
            reports.append(balance)
        elif critical or c in UNCONDITIONAL:
            reports.append(run_check(net, c, options))
        else:
            reports.append(CheckReport(c, "not_asserted",
                                       reason="net is not critical (vertex_balance failed)"))
    return SuiteResult(reports)


def net_summary(net: Net) -> dict[str, Any]:
    return {
        "dimension": net.dimension,
        "leaves": net.n_leaves,
        "interior": int(net.interior.size),
        "edges": net.n_edges,
        "interior_length": total_interior_length(net),
    }


def report_json(net: Net, result: SuiteResult, options: Options) -> str:
    doc = {
        "net": net_summary(net),
        "options": {
            "seed": options.seed,
            "n_directions": options.n_directions,
            "n_origins": options.n_origins,
            "n_domains": options.n_domains,
            "perturb": options.perturb,
            "tol": options.tol,
        },
        "summary": result.counts,
        "checks": [r.as_dict() for r in result.reports],
    }
    return json.dumps(doc, indent=2) + "\n"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (list, tuple, np.ndarray)):
        return ";".join(f"{float(t):.17g}" for t in np.ravel(x))
    return f"{float(x):.17g}"


def report_csv(result: SuiteResult) -> str:
    rows = ["check,status,measured,target,residual,tolerance,reason"]
    for r in result.reports:
        reason = r.reason.replace(",", ";").replace("\n", " ")
        rows.append(",".join([r.check, r.status, _cell(r.measured), _cell(r.target),
                              _cell(r.residual), _cell(r.tolerance), reason]))
    return "\n".join(rows) + "\n"


def details_csv(result: SuiteResult) -> str:
    """One row per direction, basis, origin or domain evaluated by each check."""
    rows = ["check,index,key,value"]
    for r in result.reports:
        for i, d in enumerate(r.details):
            for key, val in d.items():
                rows.append(f"{r.check},{i},{key},{_cell(val).replace(',', ';')}")
    return "\n".join(rows) + "\n"
