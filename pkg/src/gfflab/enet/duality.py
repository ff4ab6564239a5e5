"""Reciprocal-network duality bound and field-shift comparison checks."""

from __future__ import annotations

import math

import numpy as np

from .network import Network
from .solve import effective_resistance

__all__ = ["duality_gap", "rectangle_cross_terminals", "field_shift_bound_check"]


def rectangle_cross_terminals(net: Network, rect) -> tuple:
    """((left, right), (up, down)) terminal pairs for a rectangle.

    This is the certified geometry for the duality bound: in a rectangle of at
    least 2 x 2 vertices, every left-right path shares a vertex with every
    up-down path. Degenerate (single-row or single-column) rectangles are
    rejected: they carry no crossing structure.
    """
    from .crossings import side_vertices

    if rect.nx < 2 or rect.ny < 2:
        raise ValueError("degenerate rectangle: no crossing structure")
    left = side_vertices(net, rect, "left")
    right = side_vertices(net, rect, "right")
    up = side_vertices(net, rect, "up")
    down = side_vertices(net, rect, "down")
    return (left, right), (up, down)


def duality_gap(net: Network, pair_ab, pair_cd, method: str = "auto") -> float:
    """R(A,B) * 4 D^2 rho_max * R*(C,D) - 1; nonnegative when the pairs cross.

    Caller asserts the geometric hypothesis (every (A,B)-path meets every
    (C,D)-path); use rectangle_cross_terminals for certified rectangles.
    Computed in log scale so extreme offsets cannot overflow.
    """
    a, b = pair_ab
    c, d = pair_cd
    r_ab = effective_resistance(net, a, b, method=method)
    r_star = effective_resistance(net.reciprocal(), c, d, method=method)
    if not (r_ab.connected and r_star.connected):
        return math.inf
    deg, rho = net.degree_and_rho()
    log_bound = r_ab.log_value + r_star.log_value + math.log(4.0 * deg * deg * rho)
    return math.expm1(log_bound)


def field_shift_bound_check(
    net1: Network,
    net2: Network,
    shift_values: np.ndarray,
    pairs,
    method: str = "auto",
) -> tuple[bool, float]:
    """Check R_{chi1+chi2}(u,v) <= R_{chi1}(u,v) * max_e exp(-gamma * (chi2_u' + chi2_v')).

    net1 and net2 must be the networks of chi1 and chi1 + chi2 on the same
    box with the same gamma; `shift_values` is chi2 on that box, `pairs` a
    list of ((x,y), (x,y)) vertex pairs to test. Returns (all hold, worst
    margin), margin = log(rhs) - log(lhs) >= 0 when the bound holds.
    """
    if net1.coords is None or net2.coords is None:
        raise ValueError("field networks required")
    if net1.n_vertices != net2.n_vertices or net1.gamma != net2.gamma:
        raise ValueError("mismatched domains")
    gamma = net1.gamma
    shift_values = np.asarray(shift_values, dtype=float).ravel()
    edge_sum = shift_values[net1.edge_u] + shift_values[net1.edge_v]
    log_factor = float(np.max(-gamma * edge_sum))
    worst = math.inf
    ok = True
    for (u, v) in pairs:
        ui = np.array([net1.vertex_at(*u)])
        vi = np.array([net1.vertex_at(*v)])
        lhs = effective_resistance(net2, ui, vi, method=method).log_value
        rhs = effective_resistance(net1, ui, vi, method=method).log_value + log_factor
        margin = rhs - lhs
        worst = min(worst, margin)
        if margin < -1e-9:
            ok = False
    return ok, worst
