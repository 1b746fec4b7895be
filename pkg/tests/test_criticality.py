from __future__ import annotations

import math

import numpy as np
import pytest

from critnet.criticality import (
    EdgeCollapseError,
    SolverParams,
    anchor_side,
    chopping,
    custom,
    dilation,
    first_variation,
    inside_variation,
    is_critical,
    relax,
    relax_net,
    rotation,
    scaling,
    swelling,
    translation,
    vertex_residual,
    vertex_residuals,
)
from critnet.generators import fixture, grid_net, hexagon_net, random_star_topology
from critnet.net import WHOLE, Ball, HalfSpace, NetError, build_net, total_interior_length
from netbank import S, fermat_grid_search, total_length_of


def moved(net, vid, delta):
    pos = np.array(net.positions)
    pos[net.index[vid]] += delta
    return net.with_positions(pos)


def fd_gradient(net, i, h=1e-6):
    g = np.zeros(net.dimension)
    for a in range(net.dimension):
        p, m = np.array(net.positions), np.array(net.positions)
        p[i, a] += h
        m[i, a] -= h
        g[a] = (total_length_of(p, net.edges) - total_length_of(m, net.edges)) / (2 * h)
    return g


def test_residual_cross_origin_zero():
    assert np.allclose(vertex_residual(fixture("CROSS"), "o"), 0)


def test_residual_of_leaf_is_error():
    with pytest.raises(NetError):
        vertex_residual(fixture("CROSS"), "e")


def test_residual_matches_finite_difference_fermat():
    net = moved(fixture("FERMAT3"), "o", [0.3, 0.2])
    r = vertex_residual(net, "o")
    assert np.linalg.norm(r) > 0.1
    assert np.allclose(r, fd_gradient(net, net.index["o"]), atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_residual_is_length_gradient_on_random_nets(seed):
    rng = np.random.default_rng(seed)
    net = hexagon_net(1, 2)
    net = net.with_positions(net.positions + 0.1 * rng.normal(size=net.positions.shape))
    for i in rng.choice(net.interior, 3, replace=False):
        assert np.allclose(vertex_residuals(net)[i], fd_gradient(net, i), atol=1e-5)


def test_residual_bend():
    straight = build_net(2, [("a", (-1, 0)), ("m", (0, 0)), ("b", (1, 0))], [("a", "m"), ("m", "b")])
    assert np.allclose(vertex_residual(straight, "m"), 0, atol=1e-15)
    half = math.radians(85)
    bent = build_net(2, [("a", (-math.sin(half), math.cos(half))), ("m", (0, 0)),
                         ("b", (math.sin(half), math.cos(half)))], [("a", "m"), ("m", "b")])
    assert np.linalg.norm(vertex_residual(bent, "m")) == pytest.approx(2 * math.cos(half), abs=1e-12)
    assert 2 * math.cos(half) == pytest.approx(0.174311, abs=1e-6)


def test_is_critical_examples():
    assert is_critical(fixture("STEINER4"), 1e-9)[0]
    ok, rep = is_critical(moved(fixture("STEINER4"), "s+", [0.01, 0]), 1e-9)
    assert not ok and rep.worst == "s+"
    assert is_critical(grid_net(3, 2), 1e-12)[0]


def test_first_variation_translation_zero():
    assert abs(first_variation(fixture("STEINER4"), translation([1.0, 0.0]))) <= 1e-12


def test_first_variation_matches_finite_difference():
    net = moved(fixture("STEINER4"), "s+", [0.05, 0.02])
    eps = 1e-6
    d = custom({"s+": [1.0, 0.0]})
    pert = moved(net, "s+", [eps, 0.0])
    fd = (total_length_of(pert.positions, pert.edges) - total_length_of(net.positions, net.edges)) / eps
    assert first_variation(net, d) == pytest.approx(fd, abs=1e-5)


def test_custom_field_callable_and_mapping_agree():
    net = fixture("STEINER4")
    f = {"s+": [0.3, 0.1], "s-": [0.0, 1.0]}
    a = custom(f)
    b = custom(lambda vid, p: np.asarray(f.get(vid, [0.0, 0.0])))
    assert first_variation(net, a) == pytest.approx(first_variation(net, b), abs=1e-15)


def test_first_variation_zero_on_critical_nets():
    rng = np.random.default_rng(0)
    for net in (fixture("STEINER4"), grid_net(2, 2), hexagon_net(2, 2)):
        for d in (scaling(rng.normal(size=2)), dilation([0.6, 0.8]), translation([0.0, 1.0]),
                  rotation(generator=[[0, 1], [-1, 0]]), chopping([0.6, 0.8], 0.3)):
            assert abs(first_variation(net, d)) <= 1e-8 * (1 + net.n_edges)


def test_anchor_side_scaling_grid():
    net = grid_net(2, 2)
    assert anchor_side(net, scaling(), WHOLE) == pytest.approx(12.0, abs=1e-9)
    assert inside_variation(net, scaling(), WHOLE) == pytest.approx(12.0, abs=1e-9)


def test_anchor_side_scaling_steiner():
    assert anchor_side(fixture("STEINER4"), scaling(), WHOLE) == pytest.approx(2 * S, abs=1e-12)


@pytest.mark.parametrize("domain", [HalfSpace(np.array([0.6, 0.8]), 0.37),
                                    Ball(np.array([0.9, 1.2]), 1.13)])
def test_lemma_identity_on_restrictions(domain):
    net = grid_net(2, 3)
    for d in (scaling([0.2, 0.1]), swelling([1.05, 0.97]), dilation([0.8, -0.6]),
              chopping([1.0, 0.0], 1.5)):
        assert inside_variation(net, d, domain) == pytest.approx(anchor_side(net, d, domain),
                                                                 abs=1e-10)


def test_swelling_center_too_close_rejected():
    with pytest.raises(NetError):
        swelling([1e-10, 0]).displacement(fixture("CROSS"))


def test_swelling_at_vertex_is_allowed():
    d = swelling([0.0, 0.0]).displacement(fixture("CROSS"))
    assert np.all(d == 0)


def test_rotation_requires_antisymmetric():
    with pytest.raises(ValueError):
        rotation(generator=[[1, 0], [0, 1]])
    r = rotation(axis=[0, 0, 1])
    assert np.allclose(r.raw(["a"], np.array([[1.0, 0.0, 0.0]])), [[0, 1, 0]])


@pytest.mark.parametrize("origin_seed", range(10))
def test_length_identity_independent_of_origin(origin_seed):
    o = np.random.default_rng(origin_seed).normal(size=2) * 3
    for net in (fixture("STEINER4"), hexagon_net(2, 2), grid_net(2, 2)):
        leaves, nbrs, lv = net.leaf_data
        rhs = float(np.einsum("ij,ij->", net.positions[nbrs] - o, lv))
        assert abs(total_interior_length(net) - rhs) <= 1e-8


# -- relaxation ---------------------------------------------------------------


FERMAT_LEAVES = {f"l{i}": (math.cos(math.radians(a)), math.sin(math.radians(a)))
                 for i, a in enumerate((90, 210, 330))}
FERMAT_EDGES = [("o", f"l{i}") for i in range(3)]


@pytest.mark.parametrize("seed", range(5))
def test_relax_fermat(seed):
    start = np.random.default_rng(seed).uniform(-0.5, 0.5, 2)
    res = relax(FERMAT_EDGES, FERMAT_LEAVES, {"o": start})
    assert res.converged
    assert np.linalg.norm(res.net.pos("o")) <= 1e-8


def test_relax_steiner():
    leaves = {"l--": (-1, -1), "l-+": (-1, 1), "l+-": (1, -1), "l++": (1, 1)}
    edges = [("s-", "s+"), ("s-", "l--"), ("s-", "l-+"), ("s+", "l+-"), ("s+", "l++")]
    res = relax(edges, leaves, {"s-": (-0.1, 0.05), "s+": (0.1, 0.05)})
    assert res.converged
    assert np.allclose(res.net.pos("s+"), [S, 0], atol=1e-8)
    assert np.allclose(res.net.pos("s-"), [-S, 0], atol=1e-8)


def test_relax_matches_grid_search_oracle():
    leaves = {"a": (0, 0), "b": (4, 0), "c": (2, 3.9)}
    res = relax([("x", "a"), ("x", "b"), ("x", "c")], leaves, {"x": (1.0, 1.0)})
    oracle = fermat_grid_search(np.array(list(leaves.values()), dtype=float))
    assert np.allclose(res.net.pos("x"), oracle, atol=1e-6)


def test_relax_leaves_stay_pinned_and_length_monotone():
    edges, leaves, init = random_star_topology(7, 4)
    res = relax(edges, leaves, init)
    for lid, p in leaves.items():
        assert np.array_equal(res.net.pos(lid), np.asarray(p, dtype=float))
    lengths = [t[1] for t in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(lengths, lengths[1:]))
    assert is_critical(res.net, SolverParams().tol)[0]


def test_relax_trace_csv_format():
    res = relax(FERMAT_EDGES, FERMAT_LEAVES, {"o": (0.2, 0.1)})
    lines = res.trace_csv().splitlines()
    assert lines[0] == "sweep,total_length,max_residual"
    assert len(lines) == res.sweeps + 2


def test_relax_coincident_start_is_jittered():
    res = relax(FERMAT_EDGES, FERMAT_LEAVES, {"o": FERMAT_LEAVES["l0"]})
    assert res.converged and np.linalg.norm(res.net.pos("o")) <= 1e-8


def test_relax_reports_non_convergence():
    res = relax(FERMAT_EDGES, FERMAT_LEAVES, {"o": (0.3, 0.2)}, SolverParams(max_sweeps=2))
    assert not res.converged and res.sweeps == 2
    assert res.net.meta["relaxed"] is False


def test_relax_edge_collapse():
    # obtuse triangle: the minimiser sits on the leaf at the obtuse corner
    leaves = {"a": (0, 0), "b": (10, 0), "c": (5, 0.5)}
    with pytest.raises(EdgeCollapseError) as err:
        relax([("x", "a"), ("x", "b"), ("x", "c")], leaves, {"x": (5, 2)})
    assert "c" in err.value.pair


def test_relax_rejects_component_with_one_leaf():
    net = build_net(2, [("l", (0, 0)), ("a", (1, 0)), ("b", (2, 0)), ("c", (1.5, 1))],
                    [("l", "a"), ("a", "b"), ("b", "c"), ("c", "a")])
    with pytest.raises(NetError, match="at least two leaves"):
        relax_net(net)


@pytest.mark.parametrize("kw", [{"tol": 0}, {"damping": 0}, {"damping": 1.5}, {"collapse": 1e-14}])
def test_solver_params_validation(kw):
    with pytest.raises(ValueError):
        SolverParams(**kw)
