"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from critnet.criticality import SolverParams, is_critical, relax  # noqa: E402
from critnet.currents import (  # noqa: E402
    cut_scan,
    current_profile,
    kirchhoff_residual,
    longest_oriented_path,
    rectangle_packing,
)
from critnet.density import density_profile, extend_leaves  # noqa: E402
from critnet.fileio import write_net  # noqa: E402
from critnet.generators import exadiam_net, fixture, grid_net  # noqa: E402
from critnet.net import HalfSpace, build_net, restrict  # noqa: E402
from critnet.verify import Options, run_check  # noqa: E402
from netbank import (  # noqa: E402
    S,
    critical_fixtures,
    fermat_grid_search,
    halfspace_anchor_points,
    longest_path_bruteforce,
    relaxed_random_nets,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover - direct script run without pytest
    ACCEPTANCE_LINES = []


def record(n: int, ok: bool, summary: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {summary}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def unit(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.normal(size=k)
    return v / np.linalg.norm(v)


_BANK: dict = {}


def bank() -> dict:
    if not _BANK:
        _BANK.update(critical_fixtures())
        _BANK.update(relaxed_random_nets(10))
    return _BANK


def test_criterion_1_solver_oracle():
    angles = [math.radians(a) for a in (90, 210, 330)]
    leaves = {f"l{i}": (math.cos(a), math.sin(a)) for i, a in enumerate(angles)}
    edges = [("o", f"l{i}") for i in range(3)]
    worst_pos = worst_angle = 0.0
    for seed in range(20):
        start = np.random.default_rng(seed).uniform(-0.6, 0.6, 2)
        res = relax(edges, leaves, {"o": start}, SolverParams(tol=1e-12, seed=seed))
        o = res.net.pos("o")
        worst_pos = max(worst_pos, float(np.linalg.norm(o)))
        dirs = [(np.asarray(p) - o) / np.linalg.norm(np.asarray(p) - o) for p in leaves.values()]
        for i in range(3):
            for j in range(i + 1, 3):
                ang = math.degrees(math.acos(np.clip(dirs[i] @ dirs[j], -1, 1)))
                worst_angle = max(worst_angle, abs(ang - 120))
    sq = {"l--": (-1, -1), "l-+": (-1, 1), "l+-": (1, -1), "l++": (1, 1)}
    sedges = [("s-", "s+"), ("s-", "l--"), ("s-", "l-+"), ("s+", "l+-"), ("s+", "l++")]
    res = relax(sedges, sq, {"s-": (-0.2, 0.1), "s+": (0.3, -0.1)}, SolverParams(tol=1e-12))
    steiner = max(float(np.linalg.norm(res.net.pos("s+") - [S, 0])),
                  float(np.linalg.norm(res.net.pos("s-") + [S, 0])))
    rng = np.random.default_rng(11)
    worst_oracle, done = 0.0, 0
    while done < 5:
        pts = rng.uniform(-3, 3, size=(3, 2))
        ok = True
        for i in range(3):
            a, b = pts[(i + 1) % 3] - pts[i], pts[(i + 2) % 3] - pts[i]
            cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
            ok &= math.degrees(math.acos(np.clip(cos, -1, 1))) < 110
        if not ok:
            continue
        lv = {f"p{i}": pts[i] for i in range(3)}
        res = relax([("x", f"p{i}") for i in range(3)], lv, {"x": pts.mean(axis=0) + 0.1},
                    SolverParams(tol=1e-12))
        worst_oracle = max(worst_oracle,
                           float(np.linalg.norm(res.net.pos("x") - fermat_grid_search(pts))))
        done += 1
    ok = worst_pos <= 1e-8 and worst_angle <= 1e-6 and steiner <= 1e-8 and worst_oracle <= 1e-6
    record(1, ok, f"fermat |o|={worst_pos:.1e} angle_dev={worst_angle:.1e} "
                  f"steiner_dev={steiner:.1e} oracle_dev={worst_oracle:.1e}")


def test_criterion_2_scaling_bounds():
    worst = {"length_identity": 0.0, "outer_radius_bound": -math.inf,
             "degree_bound_swelling": -math.inf}
    ok = True
    for net in bank().values():
        for check in worst:
            r = run_check(net, check)
            ok &= r.passed
            worst[check] = max(worst[check], r.residual)
    ratios = []
    for n in range(1, 5):
        r = run_check(grid_net(2, n), "outer_radius_bound")
        ratios.append(r.measured / r.target)
    ok &= worst["length_identity"] <= 1e-8 and min(ratios) >= 0.7
    record(2, ok, f"{len(bank())} nets, identity_res={worst['length_identity']:.1e} "
                  f"radius_res={worst['outer_radius_bound']:.3g} "
                  f"grid_ratio_min={min(ratios):.4f}")


def test_criterion_3_isoperimetric():
    ok, worst = True, -math.inf
    for net in bank().values():
        r = run_check(net, "isoperimetric", Options(n_directions=20))
        ok &= r.passed and len(r.details) >= 20
        worst = max(worst, r.residual)
    pack = rectangle_packing(fixture("STEINER4"), np.array([1.0, 0.0]))
    ok &= abs(pack.slack) <= 1e-12
    record(3, ok, f"max(2L - bound)={worst:.3g} steiner_packing_slack={pack.slack:.1e}")


def test_criterion_4_combinatorial():
    ok = True
    found = []
    for n, k in ((2, 1), (3, 3)):
        net = exadiam_net(n, k)
        rng = np.random.default_rng(n * 10 + k)
        for _ in range(5):
            v = np.abs(unit(rng, 2)) + 0.05
            v /= np.linalg.norm(v)
            d = longest_oriented_path(net, v)[0]
            found.append(d)
            ok &= d == 2 * (k + 1) * n
    rows = []
    for d in (1, 2, 3):
        for n in (1, 2):
            net = grid_net(d, n)
            r = run_check(net, "combinatorial", Options(perturb=True))
            v = np.ones(d) + 0.01 * np.arange(d)
            dv = longest_oriented_path(net, v / np.linalg.norm(v))[0]
            nu = float(net.degree[net.interior].sum())
            ratio = nu / (n * net.n_leaves)
            asym = 2 / n + d * math.sqrt(d)
            ok &= r.passed and dv == d * n and ratio <= asym and 1 <= asym
            rows.append(f"d{d}n{n}:{ratio:.2f}<={asym:.2f}")
    record(4, ok, f"exadiam D_v={sorted(set(found))} hypercube {' '.join(rows)}")


def test_criterion_5_currents():
    rng = np.random.default_rng(5)
    ok, kir, jump = True, 0.0, 0.0
    for net in critical_fixtures().values():
        for _ in range(20):
            v = unit(rng, net.dimension)
            kir = max(kir, kirchhoff_residual(net, v))
            prof = current_profile(net, v)
            ok &= prof.c_in <= net.n_leaves / 2 + 1e-12
            scan = cut_scan(net, v)
            jump = max(jump, scan.interior_jump(), scan.lemma_residual())
    seg = fixture("SEGMENT")
    c_seg = current_profile(seg, np.array([1.0, 0.0])).c_in
    ok &= kir <= 1e-10 and jump <= 1e-9 and c_seg == seg.n_leaves / 2
    record(5, ok, f"kirchhoff={kir:.1e} cut_jump={jump:.1e} segment_c_in={c_seg}")


def test_criterion_6_structural():
    checks = ("leaf_sum_zero", "torque_zero", "convex_hull", "face_convexity",
              "further_relation", "swelling_identity")
    ok, worst = True, dict.fromkeys(checks, 0.0)
    for net in bank().values():
        for check in checks:
            r = run_check(net, check, Options(n_directions=10))
            if r.status == "skipped":
                continue
            ok &= r.passed
            worst[check] = max(worst[check], r.residual or 0.0)
    record(6, ok, " ".join(f"{c}={v:.1e}" for c, v in worst.items()))


def test_criterion_7_density():
    ok, parts = True, []
    for name, net, center in (("steiner", fixture("STEINER4"), (0.0, 0.0)),
                              ("grid", grid_net(2, 2), (1.0, 1.0))):
        prof = density_profile(extend_leaves(net), np.array(center), 1e-3, 1e7, 200)
        agree, defined = prof.derivative_agreement(1e-4)
        valid = prof.radii.size
        end_res = abs(prof.end["lambda"] - net.n_leaves)
        ok &= (valid >= 190 and prof.monotone_violation() <= 1e-12
               and prof.start["applicable"] and prof.start["residual"] <= 1e-9
               and end_res <= 1e-9 and agree >= 0.95 * defined)
        parts.append(f"{name}: valid={valid} start={prof.start['lambda']:.6g}"
                     f"/{prof.start['target']} end_res={end_res:.1e} fd={agree}/{defined}")
    record(7, ok, "; ".join(parts))


def test_criterion_8_bruteforce():
    ok, n_paths = True, 0
    rng = np.random.default_rng(8)
    for net in critical_fixtures().values():
        if net.n_edges > 12:
            continue
        for _ in range(5):
            v = unit(rng, net.dimension)
            ok &= longest_oriented_path(net, v)[0] == longest_path_bruteforce(net, v)
            n_paths += 1
    net = grid_net(2, 3)
    for _ in range(50):
        v = unit(rng, 2)
        proj = net.positions @ v
        off = float(rng.uniform(proj.min(), proj.max()))
        sub = restrict(net, HalfSpace(v, off))
        got = sorted(tuple(np.round(sub.pos(a), 9)) for a in sub.meta["anchors"])
        ok &= got == halfspace_anchor_points(net, v, off)
    record(8, ok, f"{n_paths} path comparisons, 50 half-spaces")


def test_criterion_9_negative_controls():
    net = fixture("STEINER4")
    pos = np.array(net.positions)
    pos[net.index["s+"]] += [1e-3, 0]
    bent = net.with_positions(pos)
    flips = [not run_check(bent, c).passed for c in ("vertex_balance", "lemma_1_2")]
    one = build_net(2, [("l", (0, 0)), ("a", (1, 0)), ("b", (2, 0)), ("c", (1.5, 1))],
                    [("l", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
    one_fails = not run_check(one, "leaf_count_min").passed
    two = build_net(2, [("l1", (-1, 0)), ("l2", (1, 0)), ("o", (0, 0)), ("t", (0, 1)),
                        ("u", (0.5, 1))],
                    [("l1", "o"), ("o", "l2"), ("o", "t"), ("t", "u"), ("u", "o")])
    critical, rep = is_critical(two)
    ok = all(flips) and one_fails and not critical and rep.max_norm > 1e-3
    record(9, ok, f"perturbed flips={flips} one_leaf_fails={one_fails} "
                  f"two_leaf_residual={rep.max_norm:.3g}")


def test_criterion_10_determinism(tmp_path):
    f = tmp_path / "hex.json"
    from critnet.generators import hexagon_net

    write_net(hexagon_net(2, 2), f)
    outs = []
    for i in range(2):
        rep, csv = tmp_path / f"r{i}.json", tmp_path / f"r{i}.csv"
        proc = subprocess.run([sys.executable, "-m", "critnet", "verify", str(f), "--seed", "5",
                               "-o", str(rep), "--details-csv", str(csv)],
                              capture_output=True, text=True)
        outs.append((proc.returncode, proc.stdout, rep.read_bytes(), csv.read_bytes()))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    record(10, ok, f"report bytes={len(outs[0][2])} identical={outs[0] == outs[1]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
