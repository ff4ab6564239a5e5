"""Dirichlet solves: effective resistance/conductance, harmonic flows and potentials.

Set-to-set quantities glue the terminal sets (edges inside a terminal set are
dropped), solve the grounded Laplacian system, and read the current through
the cut. The default solver is direct (dense Cholesky below the dense limit,
sparse LU above, one iterative-refinement step); a Jacobi-preconditioned CG
is available as method="pcg" and both report residual and iteration count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NumericError
from .network import Network

__all__ = [
    "ResistanceValue",
    "Flow",
    "Potential",
    "effective_resistance",
    "effective_conductance",
    "harmonic_potential",
    "optimal_flow",
    "thomson_energy",
    "dirichlet_energy",
    "pairwise_resistance_dense",
]

DENSE_SOLVE_LIMIT = 2500
PCG_TOL = 1e-10


@dataclass(frozen=True)
class ResistanceValue:
    """A resistance- or conductance-like value in a network's stored scale."""

    stored: float
    log_offset: float
    kind: str = "resistance"  # "resistance" | "conductance"
    residual: float = 0.0
    iterations: int = 0
    method: str = "direct"
    connected: bool = True

    @property
    def log_value(self) -> float:
        """True log value, offset restored."""
        if self.stored == 0.0:
            return -math.inf
        base = math.log(self.stored)
        return base - self.log_offset if self.kind == "resistance" else base + self.log_offset

    @property
    def value(self) -> float:
        """True value; may overflow to inf for extreme offsets (use log_value)."""
        if not self.connected:
            return math.inf if self.kind == "resistance" else 0.0
        return math.exp(self.log_value)

    def reciprocal(self) -> "ResistanceValue":
        other = "conductance" if self.kind == "resistance" else "resistance"
        return ResistanceValue(
            stored=math.inf if self.stored == 0 else 1.0 / self.stored,
            log_offset=self.log_offset,
            kind=other,
            residual=self.residual,
            iterations=self.iterations,
            method=self.method,
            connected=self.connected,
        )

    def report(self) -> dict:
        return {
            "value_log": self.log_value if self.connected else "inf",
            "value": self.value if self.connected and np.isfinite(self.value) else "inf",
            "residual": self.residual,
            "iterations": self.iterations,
            "method": self.method,
        }


@dataclass
class Flow:
    """Antisymmetric edge flow, stored on the network's edge orientation u -> v."""

    net: Network
    theta: np.ndarray
    source_idx: np.ndarray
    sink_idx: np.ndarray

    def value(self) -> float:
        out = np.zeros(self.net.n_vertices)
        np.add.at(out, self.net.edge_u, self.theta)
        np.add.at(out, self.net.edge_v, -self.theta)
        return float(out[self.source_idx].sum())

    def divergence_residual(self) -> float:
        out = np.zeros(self.net.n_vertices)
        np.add.at(out, self.net.edge_u, self.theta)
        np.add.at(out, self.net.edge_v, -self.theta)
        interior = np.ones(self.net.n_vertices, dtype=bool)
        interior[self.source_idx] = False
        interior[self.sink_idx] = False
        return float(np.abs(out[interior]).max(initial=0.0))


@dataclass
class Potential:
    """Vertex potential with designated unit set A and zero set B."""

    net: Network
    values: np.ndarray
    a_idx: np.ndarray
    b_idx: np.ndarray
    residual: float = 0.0

    def harmonic_residual(self) -> float:
        """Max |L x| over non-terminal vertices, in stored conductance units."""
        lap = self.net.laplacian() @ self.values
        mask = np.ones(self.net.n_vertices, dtype=bool)
        mask[self.a_idx] = False
        mask[self.b_idx] = False
        return float(np.abs(lap[mask]).max(initial=0.0))


@dataclass
class _Glued:
    n: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    cond: np.ndarray
    glue_of: np.ndarray  # original vertex -> glued vertex (A=0, B=1)


def _glue(net: Network, a_idx: np.ndarray, b_idx: np.ndarray) -> _Glued:
    a_idx = np.unique(np.asarray(a_idx, dtype=np.int64))
    b_idx = np.unique(np.asarray(b_idx, dtype=np.int64))
    if len(a_idx) == 0 or len(b_idx) == 0:
        raise ValueError("terminal sets must be nonempty")
    if np.intersect1d(a_idx, b_idx).size:
        raise ValueError("terminal sets must be disjoint")
    glue_of = np.full(net.n_vertices, -1, dtype=np.int64)
    glue_of[a_idx] = 0
    glue_of[b_idx] = 1
    rest = glue_of < 0
    glue_of[rest] = 2 + np.arange(rest.sum())
    gu = glue_of[net.edge_u]
    gv = glue_of[net.edge_v]
    keep = gu != gv  # drops intra-A and intra-B edges
    return _Glued(
        2 + int(rest.sum()), gu[keep], gv[keep], net.conductances()[keep], glue_of
    )


def _terminals_connected(g: _Glued) -> bool:
    from scipy.sparse.csgraph import connected_components

    adj = sp.coo_matrix(
        (np.ones(2 * len(g.edge_u)), (np.concatenate([g.edge_u, g.edge_v]), np.concatenate([g.edge_v, g.edge_u]))),
        shape=(g.n, g.n),
    )
    _, labels = connected_components(adj, directed=False)
    return labels[0] == labels[1]


def _jacobi_pcg(A: sp.csr_matrix, b: np.ndarray, tol: float) -> tuple[np.ndarray, int, float]:
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise NumericError("non-positive diagonal in PCG")
    inv_d = 1.0 / diag
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_d * r
    p = z.copy()
    rz = float(r @ z)
    bnorm = float(np.linalg.norm(b)) or 1.0
    it = 0
    max_it = max(200, 10 * len(b))
    while it < max_it:
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol:
            break
        Ap = A @ p
        denom = float(p @ Ap)
        if denom <= 0:
            raise NumericError("PCG breakdown: non-positive curvature")
        alpha = rz / denom
        x += alpha * p
        r -= alpha * Ap
        z = inv_d * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    res = float(np.linalg.norm(b - A @ x)) / bnorm
    return x, it, res


def _solve_grounded(
    g: _Glued, method: str
) -> tuple[np.ndarray, float, int, str]:
    """Solve for potentials on glued vertices with x[0] = 1, x[1] = 0."""
    n_unknown = g.n - 2
    # assemble Laplacian over glued graph
    adj = sp.coo_matrix(
        (
            np.concatenate([g.cond, g.cond]),
            (np.concatenate([g.edge_u, g.edge_v]), np.concatenate([g.edge_v, g.edge_u])),
        ),
        shape=(g.n, g.n),
    ).tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    lap = sp.diags(deg) - adj
    x = np.zeros(g.n)
    x[0] = 1.0
    if n_unknown == 0:
        return x, 0.0, 0, "trivial"
    lap_csr = lap.tocsr()
    free = np.arange(2, g.n)
    A = lap_csr[free][:, free].tocsc()
    b = -np.asarray(lap_csr[free][:, [0]].todense()).ravel()
    if method == "auto":
        method = "dense" if n_unknown <= DENSE_SOLVE_LIMIT else "splu"
    if method == "dense":
        Ad = A.toarray()
        try:
            sol = np.linalg.solve(Ad, b)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"dense solve failed: {exc}") from exc
        # one refinement step tightens the residual to machine level
        sol += np.linalg.solve(Ad, b - Ad @ sol)
        res = float(np.linalg.norm(b - Ad @ sol)) / (float(np.linalg.norm(b)) or 1.0)
        used = "dense"
        iters = 1
    elif method == "splu":
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise NumericError(f"sparse factorization failed: {exc}") from exc
        sol = lu.solve(b)
        sol += lu.solve(b - A @ sol)
        res = float(np.linalg.norm(b - A @ sol)) / (float(np.linalg.norm(b)) or 1.0)
        used = "splu"
        iters = 1
    elif method == "pcg":
        sol, iters, res = _jacobi_pcg(A.tocsr(), b, PCG_TOL)
        used = "pcg"
    else:
        raise ValueError(f"unknown solve method {method!r}")
    if not np.all(np.isfinite(sol)):
        raise NumericError("solver produced non-finite potentials")
    x[free] = sol
    return x, res, iters, used


def _boundary_current(g: _Glued, x: np.ndarray) -> float:
    at_a = g.edge_u == 0
    cur = float(np.sum(g.cond[at_a] * (x[0] - x[g.edge_v[at_a]])))
    at_a = g.edge_v == 0
    cur += float(np.sum(g.cond[at_a] * (x[0] - x[g.edge_u[at_a]])))
    return cur


def _solve_pair(net: Network, a_idx, b_idx, method: str = "auto"):
    g = _glue(net, a_idx, b_idx)
    if not _terminals_connected(g):
        return g, None, None
    x, res, iters, used = _solve_grounded(g, method)
    return g, x, (res, iters, used)


def effective_resistance(net: Network, a_idx, b_idx, method: str = "auto") -> ResistanceValue:
    """R(A, B) with the terminal sets glued; infinite sentinel when disconnected."""
    g, x, info = _solve_pair(net, a_idx, b_idx, method)
    if x is None:
        return ResistanceValue(math.inf, net.log_offset, "resistance", connected=False)
    current = _boundary_current(g, x)
    if current <= 0:
        raise NumericError("non-positive boundary current")
    res, iters, used = info
    return ResistanceValue(1.0 / current, net.log_offset, "resistance", res, iters, used)


def effective_conductance(net: Network, a_idx, b_idx, method: str = "auto") -> ResistanceValue:
    """C(A, B) as the Dirichlet energy of the solved unit-boundary potential."""
    g, x, info = _solve_pair(net, a_idx, b_idx, method)
    if x is None:
        return ResistanceValue(0.0, net.log_offset, "conductance", connected=False)
    d = x[g.edge_u] - x[g.edge_v]
    energy = float(np.sum(g.cond * d * d))
    res, iters, used = info
    return ResistanceValue(energy, net.log_offset, "conductance", res, iters, used)


def harmonic_potential(net: Network, a_idx, b_idx, method: str = "auto") -> Potential:
    """Potential with value 1 on A, 0 on B, harmonic elsewhere."""
    g, x, info = _solve_pair(net, a_idx, b_idx, method)
    if x is None:
        raise NumericError("terminal sets are disconnected; no potential")
    vals = x[g.glue_of]
    return Potential(net, vals, np.unique(np.asarray(a_idx, np.int64)), np.unique(np.asarray(b_idx, np.int64)), residual=info[0])


def optimal_flow(net: Network, a_idx, b_idx, method: str = "auto") -> Flow:
    """The energy-minimizing (harmonic) unit flow from A to B."""
    g, x, info = _solve_pair(net, a_idx, b_idx, method)
    if x is None:
        raise NumericError("terminal sets are disconnected; no flow")
    current = _boundary_current(g, x)
    vals = x[g.glue_of]
    c = net.conductances()
    theta = c * (vals[net.edge_u] - vals[net.edge_v]) / current
    # edges inside a glued terminal carry no current
    gu = g.glue_of[net.edge_u]
    gv = g.glue_of[net.edge_v]
    theta[gu == gv] = 0.0
    return Flow(net, theta, np.unique(np.asarray(a_idx, np.int64)), np.unique(np.asarray(b_idx, np.int64)))


def thomson_energy(net: Network, flow: Flow) -> ResistanceValue:
    """sum_e r_e theta_e^2; for a unit flow this is a resistance-scale value."""
    val = float(np.sum(net.resistances() * flow.theta**2))
    return ResistanceValue(val, net.log_offset, "resistance", method="thomson")


def dirichlet_energy(net: Network, potential: Potential) -> ResistanceValue:
    """sum_e c_e (dF_e)^2; for unit boundary values this is a conductance."""
    d = potential.values[net.edge_u] - potential.values[net.edge_v]
    val = float(np.sum(net.conductances() * d * d))
    return ResistanceValue(val, net.log_offset, "conductance", method="dirichlet")


def pairwise_resistance_dense(net: Network) -> np.ndarray:
    """All-pairs point-to-point resistances via the dense pseudoinverse (fixtures)."""
    if net.n_vertices > DENSE_SOLVE_LIMIT:
        raise NumericError("pairwise dense resistance beyond limit")
    lap = net.laplacian().toarray()
    plus = np.linalg.pinv(lap)
    d = np.diag(plus)
    return d[:, None] + d[None, :] - 2 * plus
