"""Crossing, annulus, and point-to-boundary resistances on lattice networks."""

from __future__ import annotations

import numpy as np

from ..geometry import LatticeBox, Rect
from .network import Network
from .solve import ResistanceValue, effective_resistance

__all__ = [
    "side_vertices",
    "crossing_resistance",
    "restricted_crossing",
    "annulus_resistance",
    "three_node_voltage",
    "resistance_difference",
    "origin_to_boundary_sets",
    "voltage_from_resistances",
]


def _require_coords(net: Network) -> np.ndarray:
    if net.coords is None:
        raise ValueError("operation requires a geometric network")
    return net.coords


def side_vertices(net: Network, rect, side: str) -> np.ndarray:
    """Vertices of `rect` whose neighbor just beyond the named side leaves it."""
    coords = _require_coords(net)
    x, y = coords[:, 0], coords[:, 1]
    inside = (x >= rect.xmin) & (x <= rect.xmax) & (y >= rect.ymin) & (y <= rect.ymax)
    if side == "left":
        sel = inside & (x == rect.xmin)
    elif side == "right":
        sel = inside & (x == rect.xmax)
    elif side == "up":
        sel = inside & (y == rect.ymax)
    elif side == "down":
        sel = inside & (y == rect.ymin)
    else:
        raise ValueError(f"unknown side {side!r}")
    out = np.nonzero(sel)[0]
    if len(out) == 0:
        raise ValueError("empty boundary segment")
    return out


def _induced_rect(net: Network, rect) -> tuple[Network, np.ndarray]:
    coords = _require_coords(net)
    x, y = coords[:, 0], coords[:, 1]
    keep = (x >= rect.xmin) & (x <= rect.xmax) & (y >= rect.ymin) & (y <= rect.ymax)
    if not keep.any():
        raise ValueError("rectangle outside the network")
    return net.induced(keep)


def crossing_resistance(net: Network, rect, orientation: str, method: str = "auto") -> ResistanceValue:
    """R_LR or R_UD of the subnetwork induced by a rectangle."""
    sub, _ = _induced_rect(net, rect)
    if orientation == "LR":
        a = side_vertices(sub, rect, "left")
        b = side_vertices(sub, rect, "right")
    elif orientation == "UD":
        a = side_vertices(sub, rect, "up")
        b = side_vertices(sub, rect, "down")
    else:
        raise ValueError("orientation must be 'LR' or 'UD'")
    return effective_resistance(sub, a, b, method=method)


def restricted_crossing(
    net: Network, n: int, alpha_lo: int, alpha_hi: int, method: str = "auto"
) -> ResistanceValue:
    """Resistance from the left side of B(n) to the segment {n} x [alpha_lo, alpha_hi]."""
    if not (-n <= alpha_lo <= alpha_hi <= n):
        raise ValueError("need -n <= alpha_lo <= alpha_hi <= n")
    rect = LatticeBox(0, 0, n, n)
    sub, _ = _induced_rect(net, rect)
    a = side_vertices(sub, rect, "left")
    coords = sub.coords
    seg = np.nonzero(
        (coords[:, 0] == n) & (coords[:, 1] >= alpha_lo) & (coords[:, 1] <= alpha_hi)
    )[0]
    if len(seg) == 0:
        raise ValueError("empty boundary segment")
    return effective_resistance(sub, a, seg, method=method)


def _annulus_rects(n_in: int, n_out: int) -> list[Rect]:
    """The four maximal rectangles of the annulus, right/top/left/bottom."""
    return [
        Rect(n_in, n_out, -n_out, n_out),
        Rect(-n_out, n_out, n_in, n_out),
        Rect(-n_out, -n_in, -n_out, n_out),
        Rect(-n_out, n_out, -n_out, -n_in),
    ]


def annulus_resistance(net: Network, n_in: int, n_out: int, direction: str, method: str = "auto"):
    """Across: R(inner ring, outer ring) of the induced annulus.

    Around: the sum over the four maximal rectangles of the resistance between
    their two short sides (the long-way crossings whose series realizes a loop
    around the annulus).
    """
    if not 0 < n_in < n_out:
        raise ValueError("need 0 < n_in < n_out")
    coords = _require_coords(net)
    cheb = np.maximum(np.abs(coords[:, 0]), np.abs(coords[:, 1]))
    if direction == "across":
        keep = (cheb >= n_in) & (cheb <= n_out)
        sub, _ = net.induced(keep)
        sc = sub.coords
        scheb = np.maximum(np.abs(sc[:, 0]), np.abs(sc[:, 1]))
        a = np.nonzero(scheb == n_in)[0]
        b = np.nonzero(scheb == n_out)[0]
        return effective_resistance(sub, a, b, method=method)
    if direction == "around":
        total_stored = 0.0
        worst = None
        for i, rect in enumerate(_annulus_rects(n_in, n_out)):
            sides = ("down", "up") if rect.nx <= rect.ny else ("left", "right")
            sub, _ = _induced_rect(net, rect)
            a = side_vertices(sub, rect, sides[0])
            b = side_vertices(sub, rect, sides[1])
            val = effective_resistance(sub, a, b, method=method)
            if not val.connected:
                return val
            total_stored += val.stored
            worst = val if worst is None or val.residual > worst.residual else worst
        return ResistanceValue(
            total_stored, net.log_offset, "resistance", worst.residual, worst.iterations, worst.method
        )
    raise ValueError("direction must be 'across' or 'around'")


def three_node_voltage(r12: float, r13: float, r23: float) -> float:
    """c12 / (c12 + c13) of the three-node reduction, from effective resistances."""
    if r23 <= 0:
        raise ZeroDivisionError("R23 must be positive")
    return (r13 + r23 - r12) / (2.0 * r23)


def origin_to_boundary_sets(net: Network, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(origin index, external boundary of B(n)) in a network covering B(n+1).

    The external boundary is the ring at Chebyshev radius n+1 minus its four
    corners (the vertices with a neighbor in B(n)).
    """
    coords = _require_coords(net)
    x, y = coords[:, 0], coords[:, 1]
    cheb = np.maximum(np.abs(x), np.abs(y))
    ring = np.nonzero((cheb == n + 1) & ((np.abs(x) <= n) | (np.abs(y) <= n)))[0]
    if len(ring) == 0:
        raise ValueError("network does not cover the boundary of B(n)")
    origin = np.array([net.vertex_at(0, 0)], dtype=np.int64)
    return origin, ring


def _ring_glued(net: Network, n: int):
    """Network with the boundary ring of B(n) identified as one terminal node.

    The three-node voltage identity lives on the network where the boundary is
    a single (possibly floating) node; in particular R(0, v) must be computed
    with the ring shorted.
    """
    origin, ring = origin_to_boundary_sets(net, n)
    ring_set = set(int(r) for r in ring)
    remap = np.full(net.n_vertices, -1, dtype=np.int64)
    nxt = 0
    for u in range(net.n_vertices):
        if u not in ring_set:
            remap[u] = nxt
            nxt += 1
    b_node = nxt
    gu = np.where(remap[net.edge_u] >= 0, remap[net.edge_u], b_node)
    gv = np.where(remap[net.edge_v] >= 0, remap[net.edge_v], b_node)
    keep = gu != gv
    glued = Network(
        b_node + 1, gu[keep], gv[keep], net.log_c[keep], log_offset=net.log_offset
    )
    return glued, remap, b_node, int(origin[0])


def resistance_difference(net: Network, v: tuple[int, int], n: int, method: str = "auto") -> float:
    """D(v) = R(0, dB(n)) + R(v, dB(n)) - R(0, v), stored units, ring glued."""
    glued, remap, b_node, origin = _ring_glued(net, n)
    o = int(remap[origin])
    vid = int(remap[net.vertex_at(*v)])
    r0b = effective_resistance(glued, [o], [b_node], method=method).stored
    rvb = effective_resistance(glued, [vid], [b_node], method=method).stored
    r0v = effective_resistance(glued, [o], [vid], method=method).stored
    return r0b + rvb - r0v


def voltage_from_resistances(net: Network, v: tuple[int, int], n: int, method: str = "auto") -> float:
    """phi(v) = D(v) / (2 R(0, dB(n))): the three-node reduction of the voltage."""
    glued, remap, b_node, origin = _ring_glued(net, n)
    o = int(remap[origin])
    r0b = effective_resistance(glued, [o], [b_node], method=method).stored
    return resistance_difference(net, v, n, method=method) / (2.0 * r0b)
