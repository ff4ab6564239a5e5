"""Constructive path/cutset decompositions and restricted resistance.

The two decompositions mirror the variational characterizations of effective
resistance (parallel-of-series over a path multiset with admissible edge
splittings) and conductance (series-of-parallels over cutsets): applied to the
harmonic flow/potential they recompose the effective value exactly, and for
any admissible splitting they give the upper-bound direction.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..errors import InvariantViolation, NumericError
from .network import Network
from .solve import Flow, Potential, ResistanceValue

__all__ = [
    "Path",
    "PathFamily",
    "CutsetFamily",
    "Splitting",
    "flow_path_decomposition",
    "parallel_series_value",
    "potential_cutset_decomposition",
    "series_parallel_value",
    "restricted_resistance",
    "enumerate_simple_paths",
]

_ADMISSIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class Path:
    """A simple path as a vertex sequence plus the edge indices realizing it."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError("path edge/vertex count mismatch")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("path is not simple")


PathFamily = list  # list[Path]: a multiset, duplicates allowed


@dataclass
class CutsetFamily:
    """Edge-index sets, each separating the designated terminal pair."""

    cutsets: list

    def verify_separates(self, net: Network, a_idx, b_idx) -> bool:
        from scipy.sparse.csgraph import connected_components
        import scipy.sparse as sp

        a0 = int(np.atleast_1d(a_idx)[0])
        b0 = int(np.atleast_1d(b_idx)[0])
        for cut in self.cutsets:
            drop = np.zeros(net.n_edges, dtype=bool)
            drop[np.asarray(cut, dtype=np.int64)] = True
            keep = ~drop
            # also identify terminal sets so multi-vertex terminals stay whole
            labels_src = np.arange(net.n_vertices)
            eu = net.edge_u[keep]
            ev = net.edge_v[keep]
            extra_u = []
            extra_v = []
            for group in (np.atleast_1d(a_idx), np.atleast_1d(b_idx)):
                for v in group[1:]:
                    extra_u.append(int(group[0]))
                    extra_v.append(int(v))
            adj = sp.coo_matrix(
                (
                    np.ones(len(eu) + len(extra_u)),
                    (
                        np.concatenate([eu, np.array(extra_u, dtype=np.int64)]),
                        np.concatenate([ev, np.array(extra_v, dtype=np.int64)]),
                    ),
                ),
                shape=(net.n_vertices, net.n_vertices),
            )
            _, labels = connected_components(adj, directed=False)
            if labels[a0] == labels[b0]:
                return False
        return True


@dataclass
class Splitting:
    """Per-(member, position) positive values r_{e,P} or c_{e,pi}."""

    values: list  # list of arrays, aligned with each member's edge sequence


def _check_path_admissibility(net: Network, paths, splitting: Splitting) -> None:
    """Admissibility: sum_P 1/r_{e,P} <= 1/r_e, with a tiny slack for roundoff."""
    acc = defaultdict(float)
    for path, rvals in zip(paths, splitting.values):
        if np.any(np.asarray(rvals) <= 0):
            raise InvariantViolation("splitting values must be positive")
        for e, r in zip(path.edges, rvals):
            acc[e] += 1.0 / r
    r_e = net.resistances()
    for e, total in acc.items():
        if total > 1.0 / r_e[e] * (1.0 + _ADMISSIBILITY_SLACK) + _ADMISSIBILITY_SLACK:
            raise InvariantViolation(
                f"inadmissible splitting on edge {e}: {total} > {1.0 / r_e[e]}"
            )


def _check_cutset_admissibility(net: Network, cutsets, splitting: Splitting) -> None:
    acc = defaultdict(float)
    for cut, cvals in zip(cutsets, splitting.values):
        if np.any(np.asarray(cvals) <= 0):
            raise InvariantViolation("splitting values must be positive")
        for e, c in zip(cut, cvals):
            acc[e] += 1.0 / c
    c_e = net.conductances()
    for e, total in acc.items():
        if total > 1.0 / c_e[e] * (1.0 + _ADMISSIBILITY_SLACK) + _ADMISSIBILITY_SLACK:
            raise InvariantViolation(
                f"inadmissible cutset splitting on edge {e}: {total} > {1.0 / c_e[e]}"
            )


# ---------------------------------------------------------------------------
# flow -> path family
# ---------------------------------------------------------------------------


def _directed_view(net: Network, theta: np.ndarray, eps: float):
    """Outgoing (edge, head) lists per vertex for edges with flow above eps."""
    out = defaultdict(list)
    for e in np.nonzero(np.abs(theta) > eps)[0]:
        if theta[e] > 0:
            out[net.edge_u[e]].append((int(e), int(net.edge_v[e]), 1.0))
        else:
            out[net.edge_v[e]].append((int(e), int(net.edge_u[e]), -1.0))
    return out


def _find_cycle(out: dict) -> list | None:
    """One directed cycle as [(edge, sign), ...], or None; iterative DFS."""
    color = {}
    for root in list(out.keys()):
        if color.get(root, 0):
            continue
        stack = [(root, iter(out.get(root, ())))]
        trail = []  # (edge, from_vertex, sign) along the current DFS path
        color[root] = 1
        while stack:
            v, it = stack[-1]
            advanced = False
            for e, w, sgn in it:
                cw = color.get(w, 0)
                if cw == 1:
                    cycle = [(e, sgn)]
                    for pe, pv, psgn in reversed(trail):
                        cycle.append((pe, psgn))
                        if pv == w:
                            break
                    return cycle
                if cw == 0:
                    color[w] = 1
                    trail.append((e, v, sgn))
                    stack.append((w, iter(out.get(w, ()))))
                    advanced = True
                    break
            if not advanced:
                color[v] = 2
                stack.pop()
                if trail:
                    trail.pop()
    return None


def _cancel_cycles(net: Network, theta: np.ndarray, eps: float) -> None:
    """Remove positive cycles in place (harmonic flows have none beyond roundoff)."""
    for _ in range(net.n_edges + 1):
        out = _directed_view(net, theta, eps)
        cycle = _find_cycle(out)
        if cycle is None:
            return
        amount = min(abs(theta[e]) for e, _ in cycle)
        for e, sgn in cycle:
            theta[e] -= sgn * amount
    raise NumericError("cycle cancellation failed to terminate")


def flow_path_decomposition(
    net: Network, flow: Flow, value_tol: float = 1e-9
) -> tuple[list, np.ndarray, Splitting]:
    """Peel a unit flow into weighted simple paths with an admissible splitting.

    Returns (paths, alphas, splitting) with sum(alphas) = 1 and
    r_{e,P_j} = (theta_e / alpha_j) r_e for the decomposed flow theta; plugged
    into the parallel-of-series formula this reproduces the flow's energy
    value, which for the harmonic flow is the effective resistance.
    """
    value = flow.value()
    if abs(value - 1.0) > value_tol:
        raise InvariantViolation(f"flow value {value} is not 1")
    theta = flow.theta.copy()
    _cancel_cycles(net, theta, 1e-12)
    theta_star = np.abs(theta)  # the flow actually decomposed
    sources = set(int(v) for v in flow.source_idx)
    sinks = set(int(v) for v in flow.sink_idx)
    r_e = net.resistances()

    paths = []
    alphas = []
    split_vals = []
    eps = 1e-12
    for _ in range(net.n_edges + 1):
        out = _directed_view(net, theta, eps)
        start = next((s for s in sources if out.get(s)), None)
        if start is None:
            break
        # walk the positive-flow digraph from a source to a sink; acyclicity
        # guarantees simplicity and termination
        verts = [start]
        edges = []
        seen = {start}
        v = start
        while v not in sinks:
            step = None
            for e, w, sgn in out.get(v, ()):
                if w not in seen:
                    step = (e, w)
                    break
            if step is None:
                raise NumericError("path extraction stalled (flow not decomposable)")
            e, w = step
            edges.append(e)
            verts.append(w)
            seen.add(w)
            v = w
        alpha = float(min(abs(theta[e]) for e in edges))
        paths.append(Path(tuple(verts), tuple(edges)))
        alphas.append(alpha)
        split_vals.append(np.array([theta_star[e] / alpha * r_e[e] for e in edges]))
        for e in edges:
            theta[e] -= alpha * np.sign(theta[e])
    else:
        raise NumericError("path peeling exceeded the edge-count bound")

    alphas = np.array(alphas)
    if abs(alphas.sum() - 1.0) > 1e-6:
        raise NumericError(f"peeled weights sum to {alphas.sum()}, not 1")
    return paths, alphas, Splitting(split_vals)


def parallel_series_value(net: Network, paths, splitting: Splitting) -> ResistanceValue:
    """( sum_P 1 / sum_{e in P} r_{e,P} )^-1 for an admissible splitting."""
    if not paths:
        raise ValueError("empty path family")
    _check_path_admissibility(net, paths, splitting)
    inv = 0.0
    for rvals in splitting.values:
        inv += 1.0 / float(np.sum(rvals))
    return ResistanceValue(1.0 / inv, net.log_offset, "resistance", method="parallel-series")


# ---------------------------------------------------------------------------
# potential -> cutset family
# ---------------------------------------------------------------------------


def potential_cutset_decomposition(
    net: Network, potential: Potential, harmonic_tol: float = 1e-7
) -> tuple[CutsetFamily, np.ndarray, Splitting]:
    """Peel level cutsets of a harmonic potential, nearest to the unit set first.

    The cutset at each level is the edge boundary of the superlevel set of the
    potential (the component of the unit terminal; connected by the maximum
    principle); alpha_j are the gaps between consecutive distinct potential
    values, so every edge's alphas sum exactly to its potential drop.
    """
    x = potential.values
    scale = float(np.exp(net.log_c).max()) * max(1.0, float(np.abs(x).max()))
    if potential.harmonic_residual() > harmonic_tol * scale:
        raise InvariantViolation("potential is not harmonic off the terminal sets")
    span = float(x.max() - x.min())
    if span <= 0:
        raise InvariantViolation("constant potential has no cutsets")
    merge_tol = 1e-12 * span
    order = np.argsort(-x, kind="stable")
    levels = [float(x[order[0]])]
    rank = np.zeros(net.n_vertices, dtype=np.int64)
    for idx in order[1:]:
        if levels[-1] - x[idx] > merge_tol:
            levels.append(float(x[idx]))
        rank[idx] = len(levels) - 1
    rank[order[0]] = 0
    m = len(levels) - 1
    if m == 0:
        raise InvariantViolation("potential takes a single value")

    c_e = net.conductances()
    drop = np.abs(x[net.edge_u] - x[net.edge_v])
    lo_rank = np.minimum(rank[net.edge_u], rank[net.edge_v])
    hi_rank = np.maximum(rank[net.edge_u], rank[net.edge_v])

    cutsets = []
    alphas = []
    split_vals = []
    for j in range(1, m + 1):
        members = np.nonzero((lo_rank < j) & (hi_rank >= j))[0]
        alpha = levels[j - 1] - levels[j]
        if len(members) == 0:
            raise NumericError("empty level cutset; potential not harmonic?")
        cutsets.append(members)
        alphas.append(alpha)
        split_vals.append(drop[members] * c_e[members] / alpha)
    fam = CutsetFamily(cutsets)
    return fam, np.array(alphas), Splitting(split_vals)


def series_parallel_value(net: Network, family: CutsetFamily, splitting: Splitting) -> ResistanceValue:
    """( sum_pi 1 / sum_{e in pi} c_{e,pi} )^-1 for an admissible cutset splitting."""
    if not family.cutsets:
        raise ValueError("empty cutset family")
    _check_cutset_admissibility(net, family.cutsets, splitting)
    inv = 0.0
    for cvals in splitting.values:
        inv += 1.0 / float(np.sum(cvals))
    return ResistanceValue(1.0 / inv, net.log_offset, "conductance", method="series-parallel")


# ---------------------------------------------------------------------------
# restricted resistance over a path family
# ---------------------------------------------------------------------------


def _simplex_qp(Q: np.ndarray, tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """Minimize theta^T Q theta over the probability simplex (active set, exact)."""
    k = Q.shape[0]
    theta = np.full(k, 1.0 / k)
    active = np.ones(k, dtype=bool)  # True = allowed positive
    scale = float(np.abs(Q).max()) or 1.0

    for _ in range(50 * k + 50):
        idx = np.nonzero(active)[0]
        kk = len(idx)
        sysm = np.zeros((kk + 1, kk + 1))
        sysm[:kk, :kk] = 2.0 * Q[np.ix_(idx, idx)]
        sysm[:kk, kk] = -1.0
        sysm[kk, :kk] = 1.0
        rhs = np.zeros(kk + 1)
        rhs[kk] = 1.0
        sol, *_ = np.linalg.lstsq(sysm, rhs, rcond=None)
        cand = np.zeros(k)
        cand[idx] = sol[:kk]
        if cand[idx].min() < -tol * 10:
            # step toward cand until the first coordinate hits zero, drop it
            d = cand - theta
            bad = (d < 0) & (np.abs(d) > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(bad, -theta / d, np.inf)
            t = min(1.0, float(steps.min()))
            theta = theta + t * d
            theta[theta < tol] = 0.0
            theta /= theta.sum()
            drop = int(np.argmin(np.where(active, cand, np.inf)))
            active[drop] = False
            if not active.any():
                raise NumericError("active set emptied")
            continue
        theta = np.clip(cand, 0.0, None)
        theta /= theta.sum()
        g = 2.0 * Q @ theta
        lam = float(g[idx].mean())
        inactive = ~active
        if not inactive.any() or g[inactive].min() >= lam - 1e-10 * scale:
            break
        active[int(np.argmin(np.where(inactive, g, np.inf)))] = True
    value = float(theta @ Q @ theta)
    # Frank-Wolfe gap certifies optimality of the returned point
    g = 2.0 * Q @ theta
    gap = float(theta @ g - g.min())
    if gap > 1e-8 * max(value, 1e-300):
        raise NumericError(f"simplex QP did not converge: gap {gap:.2e}")
    return theta, value


def restricted_resistance(net: Network, paths) -> ResistanceValue:
    """Effective resistance restricted to a path family.

    Equivalent finite program: minimize sum_e r_e (sum_{P ni e} theta_P)^2 over
    path weights on the simplex; monotone nondecreasing under removing paths.
    """
    if not paths:
        raise ValueError("empty path family")
    r_e = net.resistances()
    k = len(paths)
    Q = np.zeros((k, k))
    sets = [set(p.edges) for p in paths]
    for i in range(k):
        for j in range(i, k):
            common = sets[i] & sets[j]
            if common:
                Q[i, j] = Q[j, i] = float(sum(r_e[e] for e in common))
    _, value = _simplex_qp(Q)
    return ResistanceValue(value, net.log_offset, "resistance", method="restricted")


def enumerate_simple_paths(net: Network, a_idx, b_idx, limit: int = 200_000) -> list:
    """All simple paths between two terminal sets (small fixtures only)."""
    a_set = set(int(v) for v in np.atleast_1d(a_idx))
    b_set = set(int(v) for v in np.atleast_1d(b_idx))
    by_vertex = defaultdict(list)
    for e in range(net.n_edges):
        by_vertex[int(net.edge_u[e])].append((e, int(net.edge_v[e])))
        by_vertex[int(net.edge_v[e])].append((e, int(net.edge_u[e])))
    out = []

    def dfs(v, verts, edges, seen):
        if len(out) > limit:
            raise NumericError("path enumeration limit exceeded")
        if v in b_set:
            out.append(Path(tuple(verts), tuple(edges)))
            return
        for e, w in by_vertex[v]:
            if w in seen or (w in a_set):
                continue
            verts.append(w)
            edges.append(e)
            seen.add(w)
            dfs(w, verts, edges, seen)
            verts.pop()
            edges.pop()
            seen.remove(w)

    for s in a_set:
        dfs(s, [s], [], {s})
    return out
