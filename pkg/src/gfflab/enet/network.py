"""Weighted networks with log-scale conductance bookkeeping.

log_c holds the TRUE log conductance of every edge (so sign flips such as the
reciprocal network or a negated field are bit-exact); log_offset is a
materialization hint: numeric work happens on the stored-scale conductances
exp(log_c - log_offset), which for field networks (offset 2 gamma max eta)
never overflow. Stored-scale results are converted back through their
ResistanceValue.log_value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import InvariantViolation
from ..geometry import LatticeBox
from ..fieldlab.fields import FieldSample

__all__ = ["Network", "network_from_field", "network_from_edges", "lattice_edges"]


@dataclass
class Network:
    n_vertices: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    log_c: np.ndarray  # true log conductances
    log_offset: float = 0.0
    coords: np.ndarray | None = None  # (n, 2) lattice coordinates when geometric
    gamma: float | None = None
    provenance: str | None = None

    def __post_init__(self):
        self.edge_u = np.asarray(self.edge_u, dtype=np.int64)
        self.edge_v = np.asarray(self.edge_v, dtype=np.int64)
        self.log_c = np.asarray(self.log_c, dtype=float)
        if not (len(self.edge_u) == len(self.edge_v) == len(self.log_c)):
            raise ValueError("edge arrays must have equal length")
        if len(self.edge_u) and (self.edge_u == self.edge_v).any():
            raise ValueError("self-loops are not allowed")
        if not np.all(np.isfinite(self.log_c)):
            raise InvariantViolation("non-finite stored conductance")
        self._coord_index: dict | None = None

    # -- basic accessors -----------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    def conductances(self) -> np.ndarray:
        """Stored-scale conductances exp(log_c - log_offset)."""
        return np.exp(self.log_c - self.log_offset)

    def resistances(self) -> np.ndarray:
        """Stored-scale resistances (true resistance times e^{log_offset})."""
        return np.exp(self.log_offset - self.log_c)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        return deg

    def vertex_at(self, x: int, y: int) -> int:
        if self.coords is None:
            raise ValueError("network has no geometry")
        if self._coord_index is None:
            self._coord_index = {
                (int(cx), int(cy)): i for i, (cx, cy) in enumerate(self.coords)
            }
        key = (int(x), int(y))
        if key not in self._coord_index:
            raise KeyError(f"no vertex at {key}")
        return self._coord_index[key]

    def vertices_at(self, points) -> np.ndarray:
        return np.array([self.vertex_at(x, y) for x, y in points], dtype=np.int64)

    # -- derived objects ------------------------------------------------------

    def adjacency(self, weights: np.ndarray | None = None) -> sp.csr_matrix:
        w = self.conductances() if weights is None else weights
        n = self.n_vertices
        return sp.coo_matrix(
            (
                np.concatenate([w, w]),
                (
                    np.concatenate([self.edge_u, self.edge_v]),
                    np.concatenate([self.edge_v, self.edge_u]),
                ),
            ),
            shape=(n, n),
        ).tocsr()

    def laplacian(self) -> sp.csr_matrix:
        adj = self.adjacency()
        deg = np.asarray(adj.sum(axis=1)).ravel()
        return (sp.diags(deg) - adj).tocsr()

    def components(self) -> np.ndarray:
        from scipy.sparse.csgraph import connected_components

        adj = self.adjacency(np.ones(self.n_edges))
        _, labels = connected_components(adj, directed=False)
        return labels

    def reciprocal(self) -> "Network":
        """Swap resistances and conductances on every edge; exact in log scale."""
        return Network(
            self.n_vertices,
            self.edge_u.copy(),
            self.edge_v.copy(),
            -self.log_c,
            log_offset=-self.log_offset,
            coords=None if self.coords is None else self.coords.copy(),
            gamma=self.gamma,
            provenance=None if self.provenance is None else self.provenance + "*",
        )

    def degree_and_rho(self) -> tuple[int, float]:
        """(max vertex degree, max resistance ratio over adjacent edge pairs)."""
        deg = self.degrees()
        hi = np.full(self.n_vertices, -np.inf)
        lo = np.full(self.n_vertices, np.inf)
        for ends in (self.edge_u, self.edge_v):
            np.maximum.at(hi, ends, -self.log_c)  # log resistances
            np.minimum.at(lo, ends, -self.log_c)
        spread = hi - lo
        spread = spread[np.isfinite(spread)]
        rho = float(np.exp(spread.max())) if len(spread) else 1.0
        return int(deg.max()) if self.n_vertices else 0, rho

    def induced(self, keep: np.ndarray) -> tuple["Network", np.ndarray]:
        """Subnetwork induced by a vertex mask; returns (network, old->new map)."""
        keep = np.asarray(keep)
        if keep.dtype != bool:
            mask = np.zeros(self.n_vertices, dtype=bool)
            mask[keep] = True
            keep = mask
        new_of_old = -np.ones(self.n_vertices, dtype=np.int64)
        new_of_old[keep] = np.arange(keep.sum())
        sel = keep[self.edge_u] & keep[self.edge_v]
        sub = Network(
            int(keep.sum()),
            new_of_old[self.edge_u[sel]],
            new_of_old[self.edge_v[sel]],
            self.log_c[sel],
            log_offset=self.log_offset,
            coords=None if self.coords is None else self.coords[keep],
            gamma=self.gamma,
            provenance=self.provenance,
        )
        return sub, new_of_old


def lattice_edges(box: LatticeBox) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-neighbor edge index arrays of a box, horizontal then vertical."""
    nx, ny = box.nx, box.ny
    idx = np.arange(box.nvertices).reshape(ny, nx)
    hu = idx[:, :-1].ravel()
    hv = idx[:, 1:].ravel()
    vu = idx[:-1, :].ravel()
    vv = idx[1:, :].ravel()
    return np.concatenate([hu, vu]), np.concatenate([hv, vv])


def network_from_field(
    field: FieldSample, gamma: float, region: LatticeBox | None = None
) -> Network:
    """Conductance network with c_e = exp(gamma * (eta_u + eta_v)) on a box region.

    log_c is gamma * (eta_u + eta_v) exactly; the offset 2 gamma max(eta)
    over the region keeps the materialized stored conductances <= 1.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    box = field.domain if region is None else region
    if region is None:
        values = field.values
    else:
        values = field.values[field.domain.subbox_indices(region)]
    eu, ev = lattice_edges(box)
    vmax = float(values.max()) if len(values) else 0.0
    log_offset = 2.0 * gamma * vmax
    log_c = gamma * (values[eu] + values[ev])
    x, y = box.all_coords()
    return Network(
        box.nvertices,
        eu,
        ev,
        log_c,
        log_offset=log_offset,
        coords=np.column_stack([x, y]),
        gamma=gamma,
        provenance=f"field(kind={field.kind},seed={field.seed})",
    )


def network_from_edges(n_vertices: int, edges, log_offset: float = 0.0) -> Network:
    """Abstract network from (u, v, conductance) triples; parallel edges allowed."""
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    c = np.array([e[2] for e in edges], dtype=float)
    if np.any(c <= 0):
        raise ValueError("conductances must be positive")
    return Network(n_vertices, eu, ev, np.log(c), log_offset=log_offset)
