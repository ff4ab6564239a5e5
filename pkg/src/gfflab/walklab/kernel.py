"""Transition kernels, stationary measure, and the continuous-time generators.

The discrete walk moves to neighbor v with probability proportional to the
edge conductance exp(gamma * (eta_u + eta_v)); equivalently (and bit-for-bit
here) proportional to exp(gamma * (eta_v - eta_u)). Offsets cancel in every
row, so kernels are exact regardless of the network's log_offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..geometry import LatticeBox
from ..fieldlab.fields import FieldSample
from ..enet.network import lattice_edges

__all__ = [
    "WalkKernel",
    "transition_kernel",
    "transition_kernel_from_gradients",
    "stationary_measure",
    "lrw_generator",
    "interpolated_generator",
    "stationarity_residual",
]


@dataclass
class WalkKernel:
    """Row-stochastic transition matrix over a box's vertices."""

    box: LatticeBox
    gamma: float
    boundary: str  # "absorb" | "reflect"
    P: sp.csr_matrix
    pi_stored: np.ndarray  # reversing measure in stored conductance units
    log_offset: float
    absorbing_idx: np.ndarray

    def start_index(self, x: int = 0, y: int = 0) -> int:
        return int(self.box.index(x, y))

    def row_sums_residual(self) -> float:
        s = np.asarray(self.P.sum(axis=1)).ravel()
        return float(np.abs(s - 1.0).max())

    def detailed_balance_residual(self) -> float:
        """max relative |pi_u p(u,v) - pi_v p(v,u)| over non-absorbing pairs."""
        coo = self.P.tocoo()
        mask = np.ones(len(coo.row), dtype=bool)
        absorbing = np.zeros(self.box.nvertices, dtype=bool)
        absorbing[self.absorbing_idx] = True
        mask &= ~absorbing[coo.row]
        mask &= ~absorbing[coo.col]
        lhs = self.pi_stored[coo.row[mask]] * coo.data[mask]
        # gather p(v,u)
        pt = self.P.tocsr()
        rhs = self.pi_stored[coo.col[mask]] * np.asarray(
            pt[coo.col[mask], coo.row[mask]]
        ).ravel()
        scale = np.maximum(np.abs(lhs), np.abs(rhs))
        scale[scale == 0] = 1.0
        return float(np.abs(lhs - rhs).max(initial=0.0) / scale.max())


def _box_conductances(field: FieldSample, gamma: float):
    box = field.domain
    eu, ev = lattice_edges(box)
    vmax = float(field.values.max())
    log_offset = 2.0 * gamma * vmax
    c = np.exp(gamma * (field.values[eu] + field.values[ev]) - log_offset)
    return box, eu, ev, c, log_offset


def transition_kernel(field: FieldSample, gamma: float, boundary: str = "absorb") -> WalkKernel:
    """The conductance walk's kernel on the field's box.

    absorb: the box-edge ring is absorbing (the law of the walk killed there
    is exact for the full-plane walk up to that hitting time). reflect:
    transition mass is renormalized over in-box neighbors.
    """
    if boundary not in ("absorb", "reflect"):
        raise ValueError("boundary must be 'absorb' or 'reflect'")
    box, eu, ev, c, log_offset = _box_conductances(field, gamma)
    n = box.nvertices
    pi = np.zeros(n)
    np.add.at(pi, eu, c)
    np.add.at(pi, ev, c)
    x, y = box.all_coords()
    on_edge = (x == box.xmin) | (x == box.xmax) | (y == box.ymin) | (y == box.ymax)
    rows = np.concatenate([eu, ev])
    cols = np.concatenate([ev, eu])
    vals = np.concatenate([c, c]) / pi[rows]
    if boundary == "absorb":
        keep = ~on_edge[rows]
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        absorbing = np.nonzero(on_edge)[0]
        rows = np.concatenate([rows, absorbing])
        cols = np.concatenate([cols, absorbing])
        vals = np.concatenate([vals, np.ones(len(absorbing))])
    else:
        absorbing = np.empty(0, dtype=np.int64)
    P = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return WalkKernel(box, gamma, boundary, P, pi, log_offset, absorbing)


def transition_kernel_from_gradients(field: FieldSample, gamma: float) -> sp.csr_matrix:
    """Interior kernel rows computed from field differences (gradient form).

    Independent construction used to validate the conductance form; rows are
    built for vertices whose four neighbors lie in the box.
    """
    box = field.domain
    n = box.nvertices
    x, y = box.all_coords()
    interior = (
        (x > box.xmin) & (x < box.xmax) & (y > box.ymin) & (y < box.ymax)
    )
    rows, cols, vals = [], [], []
    vv = field.values
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = box.index(x[interior] + dx, y[interior] + dy)
        rows.append(np.nonzero(interior)[0])
        cols.append(nb)
        vals.append(np.exp(gamma * (vv[nb] - vv[interior])))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    denom = np.zeros(n)
    np.add.at(denom, rows, vals)
    vals = vals / denom[rows]
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def stationary_measure(
    field: FieldSample, gamma: float, region: LatticeBox | None = None
) -> tuple[np.ndarray, float]:
    """pi(u) = sum over the four lattice neighbors of exp(gamma (eta_u + eta_v)).

    Returned in stored units with the log offset 2 gamma max(eta); the region
    (default: the box shrunk by one) must keep all four neighbors inside the
    field's window so the sum is the exact full-lattice one.
    """
    box = field.domain
    if region is None:
        if box.hx < 1 or box.hy < 1:
            raise ValueError("window too small to shrink")
        region = LatticeBox(box.cx, box.cy, box.hx - 1, box.hy - 1)
    if (
        region.xmin - 1 < box.xmin
        or region.xmax + 1 > box.xmax
        or region.ymin - 1 < box.ymin
        or region.ymax + 1 > box.ymax
    ):
        raise ValueError("region touches the window edge; neighbor values missing")
    x, y = region.all_coords()
    vmax = float(field.values.max())
    log_offset = 2.0 * gamma * vmax
    center = field.values[box.index(x, y)]
    pi = np.zeros(region.nvertices)
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = field.values[box.index(x + dx, y + dy)]
        pi += np.exp(gamma * (center + nb) - log_offset)
    return pi, log_offset


# ---------------------------------------------------------------------------
# continuous-time generators
# ---------------------------------------------------------------------------


def _reflect_kernel_parts(field: FieldSample, gamma: float):
    box, eu, ev, c, log_offset = _box_conductances(field, gamma)
    n = box.nvertices
    pi = np.zeros(n)
    np.add.at(pi, eu, c)
    np.add.at(pi, ev, c)
    return box, eu, ev, c, pi, log_offset


def lrw_generator(field: FieldSample, gamma: float) -> tuple[sp.csr_matrix, np.ndarray]:
    """Constant-speed walk: rate 1/(4 pi(x)) to each in-box neighbor.

    Returns (Q, pi_stored); pi is reversing for Q (in fact pi(x) q(x,y) = 1/4
    on every edge), with the reflecting modification at the box edge.
    """
    box, eu, ev, c, pi, _ = _reflect_kernel_parts(field, gamma)
    n = box.nvertices
    rows = np.concatenate([eu, ev])
    cols = np.concatenate([ev, eu])
    rates = 1.0 / (4.0 * pi[rows])
    return _generator_from_rates(n, rows, cols, rates), pi


def jump_chain_generator(field: FieldSample, gamma: float) -> tuple[sp.csr_matrix, np.ndarray]:
    """Rate-1 embedding of the conductance walk: q(x, y) = p(x, y)."""
    box, eu, ev, c, pi, _ = _reflect_kernel_parts(field, gamma)
    n = box.nvertices
    rows = np.concatenate([eu, ev])
    cols = np.concatenate([ev, eu])
    rates = np.concatenate([c, c]) / pi[rows]
    return _generator_from_rates(n, rows, cols, rates), pi


def _generator_from_rates(n, rows, cols, rates) -> sp.csr_matrix:
    q = sp.coo_matrix((rates, (rows, cols)), shape=(n, n)).tocsr()
    out = np.asarray(q.sum(axis=1)).ravel()
    return (q - sp.diags(out)).tocsr()


def interpolated_generator(
    field: FieldSample, gamma: float, theta: float
) -> tuple[sp.csr_matrix, np.ndarray]:
    """theta * LRW generator + (1 - theta) * conductance jump generator."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    q_lrw, pi = lrw_generator(field, gamma)
    q_jump, _ = jump_chain_generator(field, gamma)
    return (theta * q_lrw + (1.0 - theta) * q_jump).tocsr(), pi


def stationarity_residual(q: sp.csr_matrix, pi: np.ndarray) -> float:
    """max |pi^T Q| relative to the generator's scale; 0 for a stationary pi."""
    flow = np.asarray(q.T @ pi).ravel()
    scale = float(np.abs(q.diagonal() * pi).max()) or 1.0
    return float(np.abs(flow).max() / scale)
