"""Lattice boxes and their vertex indexing.

A box is the rectangle ``[cx-hx, cx+hx] x [cy-hy, cy+hy]`` of Z^2 with a fixed
row-major enumeration: index = (y - ymin) * nx + (x - xmin).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LatticeBox", "centered_box", "boundary_ring"]


@dataclass(frozen=True)
class LatticeBox:
    cx: int = 0
    cy: int = 0
    hx: int = 0
    hy: int = 0

    def __post_init__(self):
        if self.hx < 0 or self.hy < 0:
            raise ValueError("halfwidths must be nonnegative")

    @property
    def xmin(self) -> int:
        return self.cx - self.hx

    @property
    def xmax(self) -> int:
        return self.cx + self.hx

    @property
    def ymin(self) -> int:
        return self.cy - self.hy

    @property
    def ymax(self) -> int:
        return self.cy + self.hy

    @property
    def nx(self) -> int:
        return 2 * self.hx + 1

    @property
    def ny(self) -> int:
        return 2 * self.hy + 1

    @property
    def nvertices(self) -> int:
        return self.nx * self.ny

    def contains(self, x, y) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def contains_box(self, other: "LatticeBox") -> bool:
        return (
            self.xmin <= other.xmin
            and other.xmax <= self.xmax
            and self.ymin <= other.ymin
            and other.ymax <= self.ymax
        )

    def index(self, x, y):
        """Vertex index of lattice point(s) (x, y); vectorized."""
        x = np.asarray(x)
        y = np.asarray(y)
        return (y - self.ymin) * self.nx + (x - self.xmin)

    def coords(self, idx):
        """Inverse of index(); returns (x, y) arrays."""
        idx = np.asarray(idx)
        y, x = np.divmod(idx, self.nx)
        return x + self.xmin, y + self.ymin

    def all_coords(self):
        """(x, y) arrays of every vertex in index order."""
        return self.coords(np.arange(self.nvertices))

    def neighbors(self, idx):
        """Indices of the in-box lattice neighbors of a vertex index."""
        x, y = self.coords(idx)
        out = []
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if self.contains(x + dx, y + dy):
                out.append(int(self.index(x + dx, y + dy)))
        return out

    def ring_indices(self, r: int) -> np.ndarray:
        """Indices of vertices at Chebyshev distance exactly r from the center."""
        x, y = self.all_coords()
        cheb = np.maximum(np.abs(x - self.cx), np.abs(y - self.cy))
        return np.nonzero(cheb == r)[0]

    def subbox_indices(self, sub: "LatticeBox") -> np.ndarray:
        """Indices (in this box) of all vertices of a contained box, row-major in sub."""
        if not self.contains_box(sub):
            raise ValueError("subbox not contained")
        sx, sy = sub.all_coords()
        return self.index(sx, sy)

    def shifted(self, dx: int, dy: int) -> "LatticeBox":
        return LatticeBox(self.cx + dx, self.cy + dy, self.hx, self.hy)


def centered_box(hx: int, hy: int | None = None) -> LatticeBox:
    """B(N) / B(N, M) of the usual convention, centered at the origin."""
    if hy is None:
        hy = hx
    return LatticeBox(0, 0, hx, hy)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with arbitrary integer bounds (side helpers only)."""

    xmin: int
    xmax: int
    ymin: int
    ymax: int

    def __post_init__(self):
        if self.xmax < self.xmin or self.ymax < self.ymin:
            raise ValueError("empty rectangle")

    @property
    def nx(self) -> int:
        return self.xmax - self.xmin + 1

    @property
    def ny(self) -> int:
        return self.ymax - self.ymin + 1


def boundary_ring(box: LatticeBox, sub: LatticeBox) -> np.ndarray:
    """Indices in `box` of the external vertex boundary of `sub`.

    The external boundary is the set of vertices outside `sub` with a lattice
    neighbor inside it; for a rectangle this is the surrounding ring minus its
    four corners.
    """
    x, y = box.all_coords()
    inside = (
        (x >= sub.xmin) & (x <= sub.xmax) & (y >= sub.ymin) & (y <= sub.ymax)
    )
    dist_x = np.maximum(np.maximum(sub.xmin - x, x - sub.xmax), 0)
    dist_y = np.maximum(np.maximum(sub.ymin - y, y - sub.ymax), 0)
    adjacent = (dist_x + dist_y) == 1
    return np.nonzero(~inside & adjacent)[0]
