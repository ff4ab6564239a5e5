"""Crossings, annuli, three-node identities, duality bound, inequality suites."""

import math

import numpy as np
import pytest

from gfflab import rng as rngmod
from gfflab.geometry import Rect, centered_box
from gfflab.fieldlab import sample_box_field, sample_pinned_window, synthetic_field
from gfflab.enet import (
    annulus_resistance,
    crossing_resistance,
    duality_gap,
    effective_conductance,
    effective_resistance,
    enumerate_simple_paths,
    field_shift_bound_check,
    harmonic_potential,
    network_from_edges,
    network_from_field,
    origin_to_boundary_sets,
    rectangle_cross_terminals,
    resistance_difference,
    restricted_crossing,
    restricted_resistance,
    three_node_voltage,
    voltage_from_resistances,
)
from gfflab.enet.network import Network, lattice_edges


def random_grid_network(n, seed, gamma=1.0):
    field = sample_box_field(n, seed)
    return network_from_field(field, gamma)


def test_unit_grid_crossing_symmetry():
    net = network_from_field(synthetic_field(centered_box(5), 0.0), 0.3)
    box = centered_box(5)
    r_lr = crossing_resistance(net, box, "LR").value
    r_ud = crossing_resistance(net, box, "UD").value
    assert r_lr == pytest.approx(r_ud, rel=1e-10)
    assert r_lr == pytest.approx(10.0 / 11.0, rel=1e-10)  # 11 rows of 10 series gaps


def test_restricted_crossing_full_segment_is_lr():
    net = random_grid_network(6, 3)
    full = restricted_crossing(net, 6, -6, 6)
    lr = crossing_resistance(net, centered_box(6), "LR")
    assert full.stored == pytest.approx(lr.stored, rel=1e-12)


def test_restricted_crossing_monotone_in_segment():
    for seed in range(5):
        net = random_grid_network(8, 100 + seed)
        vals = [restricted_crossing(net, 8, 0, hi).stored for hi in (1, 3, 5, 8)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_annulus_unit_network():
    net = network_from_field(synthetic_field(centered_box(8), 0.0), 1.0)
    across = annulus_resistance(net, 4, 8, "across")
    around = annulus_resistance(net, 4, 8, "around")
    assert across.value > 0
    # unit symmetry: around = 4x one rectangle's long-way value (16 gaps / 5 cols)
    assert around.value == pytest.approx(4 * 16.0 / 5.0, rel=1e-9)
    # overall conductance scale: doubling conductances halves the across value
    box = centered_box(8)
    eu, ev = lattice_edges(box)
    x, y = box.all_coords()
    net2 = Network(box.nvertices, eu, ev, np.full(len(eu), math.log(2.0)), coords=np.column_stack([x, y]))
    assert annulus_resistance(net2, 4, 8, "across").value == pytest.approx(across.value / 2, rel=1e-9)


def test_annulus_across_below_single_longway():
    for seed in (0, 1):
        net = random_grid_network(8, 500 + seed, gamma=0.8)
        across = annulus_resistance(net, 4, 8, "across").log_value
        for rect, orient in [
            (Rect(4, 8, -8, 8), "LR"),
            (Rect(-8, 8, 4, 8), "UD"),
        ]:
            sides = "UD" if orient == "LR" else "LR"  # long way joins the short sides
            longway = crossing_resistance(net, rect, sides).log_value
            assert across <= longway


def test_three_node_identities():
    # symmetric chain 0 - v - boundary of unit resistors
    assert three_node_voltage(1.0, 1.0, 2.0) == pytest.approx(0.5)
    # unit-conductance triangle: all R = 2/3
    tri = network_from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    r = effective_resistance(tri, [0], [1]).value
    assert r == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert three_node_voltage(r, r, r) == pytest.approx(0.5)
    with pytest.raises(ZeroDivisionError):
        three_node_voltage(1.0, 1.0, 0.0)


def test_voltage_formula_matches_direct_solve():
    # three-node identity: 2 R(0,dB) phi(v) = R(0,dB) + R(v,dB) - R(0,v)
    n = 3
    worst = 0.0
    for seed in range(50):
        field = sample_pinned_window(centered_box(n + 1), 7000 + seed)
        net = network_from_field(field, 0.8, centered_box(n + 1))
        origin, ring = origin_to_boundary_sets(net, n)
        pot = harmonic_potential(net, origin, ring)
        for v in [(1, 0), (2, 2), (-3, 1)]:
            direct = pot.values[net.vertex_at(*v)]
            via_r = voltage_from_resistances(net, v, n)
            worst = max(worst, abs(direct - via_r))
    assert worst <= 1e-8


def test_resistance_difference_positive():
    net = random_grid_network(5, 77, gamma=0.5)
    d = resistance_difference(net, (2, 1), 4)
    assert d > 0


def test_duality_gap_unit_and_random():
    net = network_from_field(synthetic_field(centered_box(1), 0.0), 1.0)
    gap = duality_gap(net, *rectangle_cross_terminals(net, centered_box(1)))
    assert gap >= -1e-9

    for seed in range(100):
        netr = random_grid_network(2, 9000 + seed, gamma=1.0)
        gap = duality_gap(netr, *rectangle_cross_terminals(netr, centered_box(2)))
        assert gap >= -1e-9


def test_duality_degenerate_rejected():
    net = network_from_edges(2, [(0, 1, 1.0)])
    net.coords = np.array([[0, 0], [1, 0]])
    with pytest.raises(ValueError, match="degenerate"):
        rectangle_cross_terminals(net, Rect(0, 1, 0, 0))


def test_field_shift_bound():
    box = centered_box(6)
    gamma = 0.9
    base = sample_box_field(6, 1)
    net1 = network_from_field(base, gamma)
    pairs = [((0, 0), (3, 2)), ((-4, -4), (4, 4))]

    # zero shift: equality, margin 0
    ok, margin = field_shift_bound_check(net1, net1, np.zeros(box.nvertices), pairs)
    assert ok and abs(margin) < 1e-12

    # constant shift: exact ratio e^{-2 gamma s}
    s = 0.7
    shifted = base.shifted_values(s)
    net2 = network_from_field(shifted, gamma)
    ok, margin = field_shift_bound_check(net1, net2, np.full(box.nvertices, s), pairs)
    assert ok and abs(margin) < 1e-9

    # random second field: the bound holds across seeds
    for seed in range(100):
        other = sample_box_field(6, 50_000 + seed)
        summed = base.shifted_values(0.0)
        summed.values = base.values + other.values
        net3 = network_from_field(summed, gamma)
        ok, margin = field_shift_bound_check(net1, net3, other.values, pairs)
        assert ok, f"seed {seed} margin {margin}"


def test_field_shift_mismatched_domains():
    f1 = sample_box_field(4, 1)
    f2 = sample_box_field(5, 1)
    n1 = network_from_field(f1, 1.0)
    n2 = network_from_field(f2, 1.0)
    with pytest.raises(ValueError, match="mismatched"):
        field_shift_bound_check(n1, n2, f2.values, [((0, 0), (1, 0))])


# -- inequality suites over families ------------------------------------------


def glued_blocks_network(seed):
    """Two 2x3 grid blocks sharing a single articulation vertex."""
    gen = rngmod.stream(seed, "blocks")
    pts = {}

    def vid(p):
        return pts.setdefault(p, len(pts))

    edges = []
    for x0 in (0, 2):
        for x in range(x0, x0 + 3):
            for y in range(2):
                if x + 1 <= x0 + 2:
                    edges.append((vid((x, y)), vid((x + 1, y))))
                if y == 0:
                    edges.append((vid((x, 0)), vid((x, 1))))
    conds = np.exp(gen.uniform(-1.5, 1.5, size=len(edges)))
    net = network_from_edges(len(pts), [(u, v, c) for (u, v), c in zip(edges, conds)])
    return net, pts


def test_series_law_over_families():
    # series bound over families: through an articulation vertex w, any P1
    # (u to w paths) and P2 (w to v) unite into a u-v path
    for seed in range(60):
        net, pts = glued_blocks_network(seed)
        u, w, v = pts[(0, 0)], pts[(2, 0)], pts[(4, 0)]
        fam1 = enumerate_simple_paths(net, [u], [w])
        fam2 = enumerate_simple_paths(net, [w], [v])
        # restrict each family to paths inside its block so the union hypothesis holds
        r = effective_resistance(net, [u], [v]).stored
        bound = restricted_resistance(net, fam1).stored + restricted_resistance(net, fam2).stored
        assert r <= bound * (1 + 1e-9)


def test_parallel_law_over_families():
    # exhaustive path enumeration on small graphs: partition into k families
    for seed in range(40):
        net = _small_random_net(seed)
        paths = enumerate_simple_paths(net, [0], [1])
        if not paths:
            continue
        k = min(3, len(paths))
        fams = [paths[i::k] for i in range(k)]
        c = effective_conductance(net, [0], [1]).stored
        bound = sum(1.0 / restricted_resistance(net, fam).stored for fam in fams)
        assert c <= bound * (1 + 1e-9)


def _small_random_net(seed):
    gen = rngmod.stream(seed, "small-net")
    n = int(gen.integers(4, 9))
    edges = []
    for i in range(1, n):
        edges.append((i, int(gen.integers(0, i))))
    for _ in range(int(gen.integers(1, n))):
        u, v = gen.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    conds = np.exp(gen.uniform(-2, 2, size=len(edges)))
    return network_from_edges(n, [(u, v, c) for (u, v), c in zip(edges, conds)])


def test_nash_williams_direction():
    # disjoint column cutsets of a rectangle: sum of inverse cut conductances <= R
    for seed in range(40):
        field = sample_box_field(4, 3000 + seed)
        net = network_from_field(field, 0.9)
        left, right = rectangle_cross_terminals(net, centered_box(4))[0]
        r = effective_resistance(net, left, right).stored
        c = net.conductances()
        x = net.coords[:, 0]
        bound = 0.0
        for col in range(-4, 4):
            cut = (np.minimum(x[net.edge_u], x[net.edge_v]) == col) & (
                np.maximum(x[net.edge_u], x[net.edge_v]) == col + 1
            )
            bound += 1.0 / float(c[cut].sum())
        assert bound <= r * (1 + 1e-9)
