"""Green functions of the killed lattice walk and the potential kernel.

Conventions. For a free set A inside a window box, the walk is the simple
random walk on Z^2 killed the moment it steps onto a Dirichlet vertex or out
of the window. Its Green function G_A(u, v) (expected visits to v from u) is
4 * L^-1 where L = 4I - A_free is the Dirichlet Laplacian with full degree 4
everywhere. G_A is the covariance of the Gaussian field sampled here.

When the free set is a full rectangle, L is diagonal in the DST-I basis and
both solves and exact samples cost one pair of fast sine transforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.fft import dstn, idstn

from ..errors import NumericError, UnpinnedDomainError
from ..geometry import LatticeBox, centered_box

__all__ = [
    "RectPoisson",
    "GreenOracle",
    "green_matrix",
    "dirichlet_laplacian",
    "box_green_origin",
    "box_green_nn_forms",
    "potential_kernel",
    "potential_kernel_c0",
    "pinned_covariance",
    "GRID_G",
]

# the potential-kernel growth constant g = 2/pi of the 2D lattice
GRID_G = 2.0 / np.pi

DENSE_LIMIT = 2500


@lru_cache(maxsize=32)
def _rect_eigenvalues(ny: int, nx: int) -> np.ndarray:
    jy = np.arange(1, ny + 1)
    jx = np.arange(1, nx + 1)
    ey = 2.0 - 2.0 * np.cos(np.pi * jy / (ny + 1))
    ex = 2.0 - 2.0 * np.cos(np.pi * jx / (nx + 1))
    return ey[:, None] + ex[None, :]


class RectPoisson:
    """Dirichlet Laplacian of an ny-x-nx rectangle, diagonalized by DST-I."""

    def __init__(self, ny: int, nx: int):
        self.ny = ny
        self.nx = nx
        self.lam = _rect_eigenvalues(ny, nx)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve L x = b for the grid b of shape (ny, nx)."""
        coeff = dstn(b, type=1, norm="ortho")
        return idstn(coeff / self.lam, type=1, norm="ortho")

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One exact sample of the field with covariance 4 L^-1."""
        z = rng.standard_normal((self.ny, self.nx))
        return idstn(z * (2.0 / np.sqrt(self.lam)), type=1, norm="ortho")

    def green_column(self, iy: int, ix: int) -> np.ndarray:
        """Grid of G(., (ix, iy)) = 4 L^-1 e_(iy,ix)."""
        b = np.zeros((self.ny, self.nx))
        b[iy, ix] = 4.0
        return self.solve(b)


def dirichlet_laplacian(box: LatticeBox, free_idx: np.ndarray) -> sp.csr_matrix:
    """4I - A on the free vertices; edges to killed vertices only feed the diagonal."""
    n = len(free_idx)
    pos = -np.ones(box.nvertices, dtype=np.int64)
    pos[free_idx] = np.arange(n)
    x, y = box.coords(free_idx)
    rows, cols = [], []
    for dx, dy in ((1, 0), (0, 1)):
        nx_, ny_ = x + dx, y + dy
        ok = (nx_ >= box.xmin) & (nx_ <= box.xmax) & (ny_ >= box.ymin) & (ny_ <= box.ymax)
        nb = np.full(len(free_idx), -1, dtype=np.int64)
        nb[ok] = pos[box.index(nx_[ok], ny_[ok])]
        keep = nb >= 0
        rows.append(np.arange(n)[keep])
        cols.append(nb[keep])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    data = np.ones(2 * len(r))
    adj = sp.coo_matrix(
        (data, (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(n, n)
    ).tocsr()
    return (sp.identity(n, format="csr") * 4.0 - adj).tocsr()


@dataclass
class _RectEmbedding:
    """How the free set sits inside its bounding rectangle."""

    rect_x0: int
    rect_y0: int
    rect_nx: int
    rect_ny: int
    is_full_rect: bool
    interior_dirichlet: np.ndarray  # box indices of Dirichlet vertices inside the rect


class GreenOracle:
    """Reusable factorization answering G_A(u, v) queries for one (box, Dirichlet set).

    The heavy object is either nothing at all (full-rectangle free sets are
    handled spectrally) or one sparse LU of the free Laplacian.
    """

    def __init__(self, box: LatticeBox, dirichlet_idx) -> None:
        dirichlet_idx = np.unique(np.asarray(dirichlet_idx, dtype=np.int64))
        if dirichlet_idx.size == 0:
            raise UnpinnedDomainError("unpinned domain: empty dirichlet set")
        if dirichlet_idx.min() < 0 or dirichlet_idx.max() >= box.nvertices:
            raise ValueError("dirichlet index out of range")
        self.box = box
        self.dirichlet_idx = dirichlet_idx
        mask = np.zeros(box.nvertices, dtype=bool)
        mask[dirichlet_idx] = True
        self.free_idx = np.nonzero(~mask)[0]
        self._pos = -np.ones(box.nvertices, dtype=np.int64)
        self._pos[self.free_idx] = np.arange(len(self.free_idx))
        self._lu = None
        self._embedding = self._embed()

    # -- structure ---------------------------------------------------------

    def _embed(self) -> _RectEmbedding:
        x, y = self.box.coords(self.free_idx)
        if len(self.free_idx) == 0:
            return _RectEmbedding(0, 0, 0, 0, False, np.empty(0, np.int64))
        x0, x1 = int(x.min()), int(x.max())
        y0, y1 = int(y.min()), int(y.max())
        rect_n = (x1 - x0 + 1) * (y1 - y0 + 1)
        full = rect_n == len(self.free_idx)
        if full:
            inner = np.empty(0, np.int64)
        else:
            bx, by = self.box.all_coords()
            in_rect = (bx >= x0) & (bx <= x1) & (by >= y0) & (by <= y1)
            dir_mask = np.zeros(self.box.nvertices, dtype=bool)
            dir_mask[self.dirichlet_idx] = True
            inner = np.nonzero(in_rect & dir_mask)[0]
        return _RectEmbedding(x0, y0, x1 - x0 + 1, y1 - y0 + 1, full, inner)

    @property
    def n_free(self) -> int:
        return len(self.free_idx)

    def rect(self) -> RectPoisson | None:
        e = self._embedding
        if e.is_full_rect:
            return RectPoisson(e.rect_ny, e.rect_nx)
        return None

    def _rect_iy_ix(self, box_idx: int) -> tuple[int, int]:
        x, y = self.box.coords(box_idx)
        e = self._embedding
        return int(y - e.rect_y0), int(x - e.rect_x0)

    def laplacian(self) -> sp.csr_matrix:
        return dirichlet_laplacian(self.box, self.free_idx)

    def _factor(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.laplacian().tocsc())
            except RuntimeError as exc:  # singular factorization
                raise NumericError(f"laplacian factorization failed: {exc}") from exc
        return self._lu

    # -- solves -------------------------------------------------------------

    def solve_free(self, rhs: np.ndarray) -> np.ndarray:
        """Solve L x = rhs on free vertices (rhs indexed by free position)."""
        rect = self.rect()
        if rect is not None:
            grid = rhs.reshape(rect.ny, rect.nx)
            return rect.solve(grid).ravel()
        return self._factor().solve(rhs)

    def green_column(self, v_box_idx: int) -> np.ndarray:
        """G(., v) over free vertices (free-position indexed)."""
        p = self._pos[v_box_idx]
        if p < 0:
            return np.zeros(self.n_free)
        rhs = np.zeros(self.n_free)
        rhs[p] = 4.0
        return self.solve_free(rhs)

    def green(self, u_box_idx: int, v_box_idx: int) -> float:
        pu = self._pos[u_box_idx]
        if pu < 0 or self._pos[v_box_idx] < 0:
            return 0.0
        return float(self.green_column(v_box_idx)[pu])

    def green_dense(self) -> np.ndarray:
        """Full Green matrix on free vertices; guarded by the dense limit."""
        if self.n_free > DENSE_LIMIT:
            raise NumericError(
                f"dense Green matrix for {self.n_free} free vertices exceeds limit {DENSE_LIMIT}"
            )
        L = self.laplacian().toarray()
        try:
            return 4.0 * np.linalg.inv(L)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular dense laplacian: {exc}") from exc

    def variance(self, box_idx: int) -> float:
        return self.green(box_idx, box_idx)

    def quadform(self, coeffs: dict[int, float]) -> float:
        """w^T G w for a sparse vector w given as {box_idx: weight}."""
        rhs = np.zeros(self.n_free)
        for bidx, wgt in coeffs.items():
            p = self._pos[bidx]
            if p >= 0:
                rhs[p] += wgt
        sol = 4.0 * self.solve_free(rhs)
        out = 0.0
        for bidx, wgt in coeffs.items():
            p = self._pos[bidx]
            if p >= 0:
                out += wgt * sol[p]
        return float(out)

    def harmonic_extension(self, values: np.ndarray, data_idx: np.ndarray) -> np.ndarray:
        """Discrete-harmonic extension into the free set of data on Dirichlet vertices.

        `values` are field values on `data_idx` (box indices, subset of the
        Dirichlet set); all other killed vertices carry 0. Returns the full
        box-sized array: data where given, extension on free vertices, zero
        elsewhere.
        """
        data_idx = np.asarray(data_idx, dtype=np.int64)
        full = np.zeros(self.box.nvertices)
        full[data_idx] = values
        rhs = np.zeros(self.n_free)
        x, y = self.box.coords(self.free_idx)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx_, ny_ = x + dx, y + dy
            ok = (
                (nx_ >= self.box.xmin)
                & (nx_ <= self.box.xmax)
                & (ny_ >= self.box.ymin)
                & (ny_ <= self.box.ymax)
            )
            nb_idx = np.full(len(self.free_idx), -1, dtype=np.int64)
            nb_idx[ok] = self.box.index(nx_[ok], ny_[ok])
            sel = nb_idx >= 0
            is_killed = np.zeros(len(self.free_idx), dtype=bool)
            is_killed[sel] = self._pos[nb_idx[sel]] < 0
            is_data = sel & is_killed
            rhs[is_data] += full[nb_idx[is_data]]
        sol = self.solve_free(rhs)
        full[self.free_idx] = sol
        return full


def green_matrix(box: LatticeBox, dirichlet_idx) -> GreenOracle:
    """Build the Green oracle for a window box and Dirichlet set (box indices)."""
    return GreenOracle(box, dirichlet_idx)


# ---------------------------------------------------------------------------
# exact Green statistics of the centered box B(m)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def box_green_origin(m: int) -> float:
    """G_B(m)(0, 0) for the box [-m, m]^2 free, killed outside."""
    side = 2 * m + 1
    rp = RectPoisson(side, side)
    col = rp.green_column(m, m)
    return float(col[m, m])


@lru_cache(maxsize=8)
def _sine_basis(side: int) -> np.ndarray:
    j = np.arange(1, side + 1)
    x = np.arange(1, side + 1)
    return np.sqrt(2.0 / (side + 1)) * np.sin(np.pi * np.outer(j, x) / (side + 1))


def box_green_nn_forms(m: int) -> dict:
    """Exact diagonal and nearest-neighbor entries of G_B(m) for every vertex.

    Returns grids (shape side x side, row = y):
      diag[y, x]      = G(u, u)
      horiz[y, x]     = G(u, u + e1)   for x < side - 1
      vert[y, x]      = G(u, u + e2)   for y < side - 1
    computed in the sine eigenbasis with three dense matmuls.
    """
    side = 2 * m + 1
    S = _sine_basis(side)  # S[j, x] = s_j(x)
    lam = _rect_eigenvalues(side, side)
    W = 4.0 / lam  # (j over y-modes, k over x-modes)
    Q = (S**2).T  # Q[x, j] = s_j(x)^2
    R = (S[:, :-1] * S[:, 1:]).T  # R[x, j] = s_j(x) s_j(x+1)
    diag = Q @ W @ Q.T  # indexed [y, x]
    horiz = Q @ W @ R.T  # [y, x] pairs ((x,y),(x+1,y))
    vert = R @ W @ Q.T  # [y, x] pairs ((x,y),(x,y+1))
    return {"diag": diag, "horiz": horiz, "vert": vert, "m": m}


# ---------------------------------------------------------------------------
# potential kernel
# ---------------------------------------------------------------------------

_PK_SIZES = (64, 128, 256)
_PK_TABLE_RADIUS = 48
_PK_CROSSOVER = 32
_PK_FIT_RING = (24.0, 44.0)


@lru_cache(maxsize=1)
def _pk_table() -> tuple[np.ndarray, float]:
    """Table of a(x) for |x|_inf <= table radius, plus the fitted constant c0.

    a(x) is the limit of G_B(N)(0,0) - G_B(N)(0,x); each box value is computed
    exactly and the limit is taken by two-step Richardson extrapolation in
    1/N^2 over N = 64, 128, 256.
    """
    r = _PK_TABLE_RADIUS
    vals = []
    for n in _PK_SIZES:
        side = 2 * n + 1
        rp = RectPoisson(side, side)
        col = rp.green_column(n, n)
        window = col[n - r : n + r + 1, n - r : n + r + 1]
        vals.append(col[n, n] - window)
    a64, a128, a256 = vals
    r1a = (4.0 * a128 - a64) / 3.0
    r1b = (4.0 * a256 - a128) / 3.0
    table = (16.0 * r1b - r1a) / 15.0
    dx = np.arange(-r, r + 1)
    rad = np.hypot(dx[None, :], dx[:, None])
    lo, hi = _PK_FIT_RING
    ring = (rad >= lo) & (rad <= hi)
    c0 = float(np.mean(table[ring] - GRID_G * np.log(rad[ring])))
    return table, c0


def potential_kernel_c0() -> float:
    """The additive constant of a(x) = g log|x| + c0 + O(|x|^-2), fitted once."""
    return _pk_table()[1]


def potential_kernel(x) -> np.ndarray | float:
    """The potential kernel a(x) of the 2D simple random walk.

    Accepts a lattice point (pair) or arrays of coordinates; a(0) = 0 exactly.
    Values inside the crossover radius come from the extrapolated
    Green-difference table, outside from the asymptotic form with fitted c0.
    """
    pt = np.asarray(x)
    scalar = pt.ndim == 1
    pts = np.atleast_2d(pt).astype(np.int64)
    xs, ys = pts[:, 0], pts[:, 1]
    rad = np.hypot(xs, ys)
    out = np.zeros(len(pts))
    table, c0 = _pk_table()
    r = _PK_TABLE_RADIUS
    near = (np.abs(xs) <= r) & (np.abs(ys) <= r) & (rad <= _PK_CROSSOVER)
    out[near] = table[ys[near] + r, xs[near] + r]
    far = ~near
    with np.errstate(divide="ignore"):
        out[far] = GRID_G * np.log(rad[far]) + c0
    out[rad == 0] = 0.0
    return float(out[0]) if scalar else out


def pinned_covariance(u, v) -> float:
    """Covariance a(u) + a(v) - a(u - v) of the field pinned at the origin."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    return float(potential_kernel(u) + potential_kernel(v) - potential_kernel(u - v))


def pinned_window_oracle(margin_halfwidth: int) -> GreenOracle:
    """Oracle for the margin box B(M) with Dirichlet at the origin and outside."""
    window = centered_box(margin_halfwidth + 1)
    ring = window.ring_indices(margin_halfwidth + 1)
    origin = np.array([window.index(0, 0)])
    dirichlet = np.unique(np.concatenate([ring, origin]))
    return GreenOracle(window, dirichlet)
