"""Exact (linear-algebra) walk quantities: heat kernel, exit times, moderate sets.

Everything here is computed by kernel iteration or a Dirichlet solve; Monte
Carlo is used elsewhere only for phenomenology and cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NumericError
from ..geometry import centered_box
from ..fieldlab.fields import FieldSample
from ..enet.network import Network, network_from_field
from ..enet.solve import ResistanceValue
from .kernel import WalkKernel

__all__ = [
    "return_probability_exact",
    "heat_kernel_sequence",
    "HittingReport",
    "expected_exit_time_exact",
    "moderate_set",
]


def return_probability_exact(kernel: WalkKernel, T: int, start=(0, 0)) -> tuple[float, float]:
    """(P^start(X_{2T} = start), absorbed mass) by 2T sparse kernel applications."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    n = kernel.box.nvertices
    if 8 * n > 2**31:
        raise NumericError("kernel iteration exceeds the memory guard")
    s = kernel.start_index(*start)
    w = np.zeros(n)
    w[s] = 1.0
    pt = kernel.P.T.tocsr()
    for _ in range(2 * T):
        w = pt @ w
    lost = 1.0 - float(w.sum())
    return float(w[s]), max(lost, 0.0)


def heat_kernel_sequence(kernel: WalkKernel, T: int, start=(0, 0)) -> np.ndarray:
    """[P(X_0 = start), P(X_2 = start), ..., P(X_{2T} = start)]."""
    n = kernel.box.nvertices
    s = kernel.start_index(*start)
    w = np.zeros(n)
    w[s] = 1.0
    pt = kernel.P.T.tocsr()
    out = [1.0]
    for t in range(1, 2 * T + 1):
        w = pt @ w
        if t % 2 == 0:
            out.append(float(w[s]))
    return np.array(out)


@dataclass
class HittingReport:
    n: int
    expected_exit_time: float
    r_origin_boundary: ResistanceValue
    phi: np.ndarray  # voltage over B(n), row-major
    pi_mass_stored: float
    log_offset: float
    residual_hitting_identity: float
    residual_commute: float


def _interior_laplacian(net: Network, n: int):
    """Weighted Laplacian rows/cols restricted to B(n), degrees from all edges."""
    coords = net.coords
    cheb = np.maximum(np.abs(coords[:, 0]), np.abs(coords[:, 1]))
    inner = cheb <= n
    pos = -np.ones(net.n_vertices, dtype=np.int64)
    pos[inner] = np.arange(inner.sum())
    c = net.conductances()
    deg = np.zeros(net.n_vertices)
    np.add.at(deg, net.edge_u, c)
    np.add.at(deg, net.edge_v, c)
    keep = inner[net.edge_u] & inner[net.edge_v]
    rows = pos[net.edge_u[keep]]
    cols = pos[net.edge_v[keep]]
    vals = c[keep]
    m = int(inner.sum())
    adj = sp.coo_matrix(
        (np.concatenate([vals, vals]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(m, m),
    ).tocsr()
    lap = sp.diags(deg[inner]) - adj
    return lap.tocsc(), inner, pos, deg


def expected_exit_time_exact(field: FieldSample, gamma: float, n: int) -> HittingReport:
    """E^0 of the exit time from B(n), with the voltage and identity residuals.

    One factorization of the conductance Laplacian over B(n) (boundary ring
    absorbing) yields the exit time, the voltage phi(v) = P^v(hit 0 before
    leaving), and R(0, boundary); the hitting-time identity and the
    commute-time identity are then verified and their residuals reported.
    """
    box = field.domain
    if not box.contains_box(centered_box(n + 1)):
        raise ValueError("field window must contain B(n+1)")
    net = network_from_field(field, gamma, centered_box(n + 1))
    lap, inner, pos, deg = _interior_laplacian(net, n)
    try:
        lu = spla.splu(lap)
    except RuntimeError as exc:
        raise NumericError(f"exit-time factorization failed: {exc}") from exc

    m = lap.shape[0]
    origin_local = pos[net.vertex_at(0, 0)]
    e0 = np.zeros(m)
    e0[origin_local] = 1.0
    y = lu.solve(e0)
    y += lu.solve(e0 - lap @ y)
    if y[origin_local] <= 0:
        raise NumericError("non-positive Green value at the origin")
    r0b = ResistanceValue(float(y[origin_local]), net.log_offset, "resistance", method="splu")
    phi = y / y[origin_local]

    pi_inner = deg[inner]  # sum of incident conductances = stored pi on B(n)
    h = lu.solve(pi_inner)
    h += lu.solve(pi_inner - lap @ h)
    exit_time = float(h[origin_local])

    pi_mass = float(pi_inner.sum())
    lhs = r0b.stored * float(np.sum(pi_inner * phi))
    residual_hitting = abs(lhs - exit_time) / max(abs(exit_time), 1e-300)

    # commute time on the glued network: boundary ring collapsed to one node
    residual_commute = _commute_residual(net, n, exit_time, r0b.stored, pi_mass, deg, inner)

    return HittingReport(
        n=n,
        expected_exit_time=exit_time,
        r_origin_boundary=r0b,
        phi=phi,
        pi_mass_stored=pi_mass,
        log_offset=net.log_offset,
        residual_hitting_identity=residual_hitting,
        residual_commute=residual_commute,
    )


def _commute_residual(net, n, exit_time, r_stored, pi_mass, deg, inner) -> float:
    """|E^0 tau_b + E^b tau_0 - R * total mass| / (R * total mass), glued boundary."""
    coords = net.coords
    cheb = np.maximum(np.abs(coords[:, 0]), np.abs(coords[:, 1]))
    c = net.conductances()
    # glued vertex order: [B(n) vertices minus origin..., <boundary>]; absorb at 0
    is_inner = cheb <= n
    origin = net.vertex_at(0, 0)
    unknown = is_inner.copy()
    unknown[origin] = False
    pos = -np.ones(net.n_vertices, dtype=np.int64)
    pos[unknown] = np.arange(unknown.sum())
    b_node = int(unknown.sum())
    m = b_node + 1

    def gpos(v):
        if is_inner[v]:
            return pos[v] if v != origin else -1
        return b_node

    rows, cols, vals = [], [], []
    diag = np.zeros(m)
    pi_glued = np.zeros(m)
    for e in range(net.n_edges):
        u, v, ce = int(net.edge_u[e]), int(net.edge_v[e]), c[e]
        gu, gv = gpos(u), gpos(v)
        if gu == gv == b_node:
            continue  # intra-boundary edges dropped by the gluing
        for a, b in ((gu, gv), (gv, gu)):
            if a >= 0:
                pi_glued[a] += ce
                diag[a] += ce
                if b >= 0:
                    rows.append(a)
                    cols.append(b)
                    vals.append(ce)
    lap = sp.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsr()
    lap = sp.diags(diag) - lap
    h = spla.spsolve(lap.tocsc(), pi_glued)
    e_b_to_0 = float(h[b_node])
    total_mass = pi_mass + pi_glued[b_node]
    commute = r_stored * total_mass
    return abs(exit_time + e_b_to_0 - commute) / max(abs(commute), 1e-300)


def moderate_set(
    net: Network, n: int, threshold_log: float, variant: str = "xi"
) -> list[tuple[int, int]]:
    """Vertices of the annulus A(n, 2n) with moderate resistance to the origin.

    variant "xi": {0} u {v : log R(0, v) <= threshold_log};
    variant "xi_star": additionally requires log R(v, boundary of B(n)) below
    the threshold and includes that boundary ring. Batched: one factorization
    per condition, one solve per annulus vertex.
    """
    if variant not in ("xi", "xi_star"):
        raise ValueError("variant must be 'xi' or 'xi_star'")
    coords = net.coords
    cheb = np.maximum(np.abs(coords[:, 0]), np.abs(coords[:, 1]))
    annulus = np.nonzero((cheb >= n) & (cheb <= 2 * n))[0]
    origin = net.vertex_at(0, 0)

    lap = net.laplacian().tocsr()
    keep = np.ones(net.n_vertices, dtype=bool)
    keep[origin] = False
    l0 = lap[np.nonzero(keep)[0]][:, np.nonzero(keep)[0]].tocsc()
    lu0 = spla.splu(l0)
    pos0 = -np.ones(net.n_vertices, dtype=np.int64)
    pos0[keep] = np.arange(keep.sum())

    members = [tuple(map(int, coords[origin]))]
    log_r0 = {}
    for v in annulus:
        e = np.zeros(l0.shape[0])
        e[pos0[v]] = 1.0
        r = float(lu0.solve(e)[pos0[v]])
        log_r0[int(v)] = math.log(r) - net.log_offset

    if variant == "xi":
        members += [tuple(map(int, coords[v])) for v in annulus if log_r0[int(v)] <= threshold_log]
        return members

    ring = np.nonzero(cheb == n + 1)[0]
    keep_b = np.ones(net.n_vertices, dtype=bool)
    keep_b[ring] = False
    sel = np.nonzero(keep_b)[0]
    lb = net.laplacian().tocsr()[sel][:, sel].tocsc()
    lub = spla.splu(lb)
    posb = -np.ones(net.n_vertices, dtype=np.int64)
    posb[sel] = np.arange(len(sel))
    for v in annulus:
        if posb[v] < 0:
            continue
        e = np.zeros(lb.shape[0])
        e[posb[v]] = 1.0
        rb = float(lub.solve(e)[posb[v]])
        if log_r0[int(v)] <= threshold_log and math.log(rb) - net.log_offset <= threshold_log:
            members.append(tuple(map(int, coords[v])))
    members += [tuple(map(int, coords[v])) for v in ring]
    return members
