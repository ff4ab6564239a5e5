"""Trajectory simulation: discrete chains, CTMCs, and vectorized ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import rng as rngmod
from ..geometry import LatticeBox
from .kernel import WalkKernel

__all__ = ["TrajectoryRecord", "simulate_walk", "simulate_ctmc", "ensemble_returns"]

_CHUNK = 8192


@dataclass
class TrajectoryRecord:
    seed: int
    walk_type: str  # "conductance" | "lrw" | "interpolated(theta)"
    boundary: str
    box: LatticeBox
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray

    def occupation(self) -> np.ndarray:
        """Visit counts per vertex as a (ny, nx) grid."""
        grid = np.zeros((self.box.ny, self.box.nx), dtype=np.int64)
        np.add.at(grid, (self.ys - self.box.ymin, self.xs - self.box.xmin), 1)
        return grid

    def rows(self):
        return zip(self.times, self.xs, self.ys)


def _padded_rows(P: sp.csr_matrix):
    indptr, indices, data = P.indptr, P.indices, P.data
    n = P.shape[0]
    deg = np.diff(indptr)
    width = int(deg.max())
    nbr = np.zeros((n, width), dtype=np.int64)
    cum = np.ones((n, width))
    for v in range(n):
        lo, hi = indptr[v], indptr[v + 1]
        k = hi - lo
        if k == 0:
            nbr[v, :] = v
            continue
        nbr[v, :k] = indices[lo:hi]
        nbr[v, k:] = indices[hi - 1]
        cum[v, :k] = np.cumsum(data[lo:hi])
        cum[v, k:] = cum[v, k - 1]
        cum[v, -1] = max(cum[v, -1], 1.0)  # guard roundoff in the last bucket
    return nbr, cum


def simulate_walk(
    kernel: WalkKernel, start: tuple[int, int], steps: int, seed: int
) -> TrajectoryRecord:
    """Sample the discrete chain; deterministic in (kernel, start, steps, seed)."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    gen = rngmod.stream(seed, "walk", kernel.boundary, steps)
    nbr, cum = _padded_rows(kernel.P)
    pos = np.empty(steps + 1, dtype=np.int64)
    pos[0] = kernel.start_index(*start)
    v = pos[0]
    done = 1
    while done <= steps:
        block = min(_CHUNK, steps - done + 1)
        u = gen.random(block)
        for i in range(block):
            row_cum = cum[v]
            j = int(np.searchsorted(row_cum, u[i], side="right"))
            if j >= row_cum.shape[0]:
                j = row_cum.shape[0] - 1
            v = nbr[v, j]
            pos[done + i] = v
        done += block
    x, y = kernel.box.coords(pos)
    return TrajectoryRecord(
        seed=seed,
        walk_type="conductance",
        boundary=kernel.boundary,
        box=kernel.box,
        times=np.arange(steps + 1),
        xs=x,
        ys=y,
    )


def simulate_ctmc(
    q: sp.csr_matrix,
    box: LatticeBox,
    start: tuple[int, int],
    jumps: int,
    seed: int,
    walk_type: str = "lrw",
) -> TrajectoryRecord:
    """Run the embedded jump chain with exponential holding times."""
    gen = rngmod.stream(seed, "ctmc", walk_type, jumps)
    rates = q.tocsr().copy()
    lam = -rates.diagonal()
    rates.setdiag(0.0)
    rates.eliminate_zeros()
    norm = sp.diags(1.0 / np.where(lam > 0, lam, 1.0)) @ rates
    nbr, cum = _padded_rows(norm.tocsr())
    v = int(box.index(*start))
    times = np.empty(jumps + 1)
    pos = np.empty(jumps + 1, dtype=np.int64)
    times[0] = 0.0
    pos[0] = v
    t = 0.0
    for k in range(1, jumps + 1):
        if lam[v] <= 0:
            times[k:] = t
            pos[k:] = v
            break
        t += gen.exponential(1.0 / lam[v])
        u = gen.random()
        j = int(np.searchsorted(cum[v], u, side="right"))
        j = min(j, cum.shape[1] - 1)
        v = int(nbr[v, j])
        times[k] = t
        pos[k] = v
    x, y = box.coords(pos)
    return TrajectoryRecord(
        seed=seed, walk_type=walk_type, boundary="reflect", box=box, times=times, xs=x, ys=y
    )


def ensemble_returns(
    kernel: WalkKernel, T: int, n_walks: int, seed: int, start: tuple[int, int] = (0, 0)
) -> float:
    """Empirical frequency of X_{2T} = start over n_walks independent walks."""
    gen = rngmod.stream(seed, "ensemble", T, n_walks)
    nbr, cum = _padded_rows(kernel.P)
    s = kernel.start_index(*start)
    pos = np.full(n_walks, s, dtype=np.int64)
    for _ in range(2 * T):
        u = gen.random(n_walks)
        rows = cum[pos]
        j = (u[:, None] >= rows).sum(axis=1)
        j = np.minimum(j, cum.shape[1] - 1)
        pos = nbr[pos, j]
    return float(np.mean(pos == s))
