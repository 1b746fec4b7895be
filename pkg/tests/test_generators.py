from __future__ import annotations

import math

import numpy as np
import pytest

from critnet.criticality import is_critical
from critnet.generators import (
    VERTEX_BUDGET,
    exadiam_net,
    fixture,
    grid_net,
    hexagon_net,
    line_arrangement_net,
    random_star_topology,
)
from critnet.net import NetError, total_interior_length
from netbank import GENERIC_LINES, S, critical_fixtures, lattice_points


@pytest.mark.parametrize("name", list(critical_fixtures()))
def test_every_generated_net_is_critical(name):
    ok, rep = is_critical(critical_fixtures()[name], 1e-10)
    assert ok, rep.max_norm


@pytest.mark.parametrize("d,n", [(1, 1), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)])
def test_grid_counts_against_enumeration(d, n):
    net = grid_net(d, n)
    pts = lattice_points(d, n)
    assert net.interior.size == len(pts)
    # unit lattice edges between neighbours
    interior_edges = sum(1 for p in pts for a in range(d) if p[a] < n)
    assert int(net.interior_edge_mask.sum()) == interior_edges
    # one ray per missing axis direction at each boundary point
    rays = sum((p[a] == 0) + (p[a] == n) for p in pts for a in range(d))
    assert net.n_leaves == rays == net.meta["n_leaves"]
    assert net.meta["n_leaves"] == 2 * d * (n + 1) ** (d - 1)
    assert int(net.degree[net.interior].sum()) == 2 * d * len(pts)
    assert total_interior_length(net) == pytest.approx(interior_edges)


def test_grid_every_vertex_has_all_axis_directions():
    net = grid_net(3, 1)
    for i in net.interior:
        dirs = {tuple(np.round(net.unit(i, j), 12)) for j in net.neighbors[i]}
        assert len(dirs) == 6


def test_grid_leading_order_counts_recorded():
    # leading-order leaf count 2 d n^(d-1)
    assert grid_net(2, 1).meta["leading_n_leaves"] == 4
    assert grid_net(2, 1).n_leaves == 8
    assert grid_net(2, 2).meta["leading_degree_sum"] == 16


def test_grid_one_dimensional_is_segment():
    net = grid_net(1, 3)
    assert net.n_leaves == 2 and total_interior_length(net) == 3


def test_grid_budget_guard():
    with pytest.raises(NetError):
        grid_net(3, 100, budget=1000)
    assert VERTEX_BUDGET > 0


def test_hexagon_single_cell():
    net = hexagon_net(1, 1)
    assert net.interior.size == 6 and net.n_leaves == 6
    assert total_interior_length(net) == pytest.approx(6.0, abs=1e-12)
    assert is_critical(net, 1e-12)[0]


def test_hexagon_interior_degree_three():
    net = hexagon_net(2, 2)
    assert set(net.degree[net.interior].tolist()) == {3}
    for i in net.interior:
        units = [net.unit(i, j) for j in net.neighbors[i]]
        for a in range(3):
            for b in range(a + 1, 3):
                assert units[a] @ units[b] == pytest.approx(-0.5, abs=1e-12)


def test_hexagon_bad_params():
    with pytest.raises(NetError):
        hexagon_net(0, 1)


def test_lines_two_perpendicular_is_cross():
    net = line_arrangement_net([((0, 0), (1, 0)), ((0, 0), (0, 1))], 1.0)
    assert net.interior.size == 1 and net.n_leaves == 4
    assert np.allclose(np.sort(np.linalg.norm(net.positions[net.leaves], axis=1)), 1.0)


@pytest.mark.parametrize("m", [3, 4])
def test_lines_counts(m):
    # n(n-1)/2 crossings and 2n leaves
    net = line_arrangement_net(GENERIC_LINES[:m], 8.0)
    assert net.interior.size == m * (m - 1) // 2
    assert net.n_leaves == 2 * m
    assert int(net.degree[net.interior].sum()) == 4 * net.interior.size


def test_lines_colinear_pairs_cancel():
    net = line_arrangement_net(GENERIC_LINES, 8.0)
    for i in net.interior:
        units = [net.unit(i, j) for j in net.neighbors[i]]
        pairs = sum(1 for a in range(4) for b in range(a + 1, 4)
                    if np.linalg.norm(units[a] + units[b]) <= 1e-12)
        assert pairs == 2


@pytest.mark.parametrize(
    "lines, R, msg",
    [
        ([((0, 0), (1, 0)), ((0, 1), (1, 0))], 5, "parallel"),
        ([((0, 0), (1, 0)), ((0, 0), (0, 1)), ((0, 0), (1, 1))], 5, "triple"),
        ([((0, 0), (1, 0)), ((0, 1.5), (1, 0.1))], 2, "outside"),
        ([((0, 9), (1, 0))], 2, "miss"),
    ],
)
def test_lines_errors(lines, R, msg):
    with pytest.raises(NetError, match=msg):
        line_arrangement_net(lines, R)


def test_exadiam_k0_is_grid():
    a, b = exadiam_net(1, 0), grid_net(2, 1)
    assert a.ids == b.ids
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.edges, b.edges)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 3), (4, 2)])
def test_exadiam_counts(n, k):
    net = exadiam_net(n, k)
    assert net.n_leaves == net.meta["n_leaves"] == 4 * n + 2 * k + net.meta["corner_correction"]
    assert net.meta["leading_n_leaves"] == 4 * n + 2 * k
    assert net.meta["longest_path_target"] == 2 * (k + 1) * n
    added = net.interior.size - (n + 1) ** 2
    # each added line crosses the 2n staircase edges at least
    assert added >= 2 * n * k
    assert is_critical(net, 1e-10)[0]


def test_fixture_fermat3_balanced():
    net = fixture("FERMAT3")
    ok, rep = is_critical(net, 1e-12)
    assert ok


def test_fixture_steiner4_angles():
    net = fixture("STEINER4")
    for sid in ("s-", "s+"):
        i = net.index[sid]
        units = [net.unit(i, j) for j in net.neighbors[i]]
        for a in range(3):
            for b in range(a + 1, 3):
                ang = math.degrees(math.acos(units[a] @ units[b]))
                assert ang == pytest.approx(120.0, abs=1e-9)
    assert net.pos("s+")[0] == pytest.approx(S, abs=1e-15)


def test_fixture_cross_degree():
    net = fixture("CROSS")
    assert net.degree[net.index["o"]] == 4


def test_unknown_fixture():
    with pytest.raises(NetError):
        fixture("PENTAGRAM")


def test_random_star_topology_is_deterministic():
    a = random_star_topology(7, 3)
    b = random_star_topology(7, 3)
    assert a == b
    edges, leaves, init = a
    assert len(leaves) == 7
    assert {x for e in edges for x in e} == set(leaves) | set(init)
