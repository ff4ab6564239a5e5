"""Lazy-kernel covariance split and the concentric conditional-expectation trace.

The split writes the box field's covariance G as covY + covZ, where covY sums
the lazy-walk kernel up to cutoff floor(log N)^2 and covZ is the remainder.
Kernel sums are materialized only on requested vertex pairs: one application
of the lazy kernel spreads mass a single lattice step, so a window of radius
cutoff around the pair reproduces the killed iteration exactly, and pairs
farther than the cutoff from the boundary see the free-space (translation
invariant) values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import rng as rngmod
from ..errors import NumericError
from ..geometry import centered_box
from .fields import FieldSample
from .greens import DENSE_LIMIT, RectPoisson, box_green_origin

__all__ = ["LazyKernelSplit", "lazy_kernel_split", "ConcentricTrace", "concentric_trace"]


def lazy_cutoff(n: int) -> int:
    """floor(log2 n)^2: dyadic sizes get distinct cutoffs, so the smoothness
    statistic is strictly monotone along doubling sweeps (any slowly growing
    cutoff satisfies the decomposition's O(log log) / O(1 / log) properties)."""
    return int(math.floor(math.log2(n))) ** 2


def _lazy_iterate(start_grid: np.ndarray, alive: np.ndarray, steps: int) -> list[np.ndarray]:
    """Distributions of the lazy walk killed off `alive`, at times 0..steps."""
    w = np.where(alive, start_grid, 0.0)
    out = [w.copy()]
    for _ in range(steps):
        nxt = 0.5 * w.copy()
        nxt[1:, :] += 0.125 * w[:-1, :]
        nxt[:-1, :] += 0.125 * w[1:, :]
        nxt[:, 1:] += 0.125 * w[:, :-1]
        nxt[:, :-1] += 0.125 * w[:, 1:]
        nxt[~alive] = 0.0
        w = nxt
        out.append(w.copy())
    return out


@dataclass
class LazyKernelSplit:
    """Covariance split of the B(n) box field at cutoff floor(log n)^2."""

    n: int
    cutoff: int
    dense_limit: int = DENSE_LIMIT

    # -- per-pair exact kernels ---------------------------------------------

    def cov_y(self, u: tuple[int, int], v: tuple[int, int]) -> float:
        """covY(u, v) = 1/2 sum_{t<=cutoff} P^v(lazy walk at u at time t, alive)."""
        k = self.cutoff
        vx, vy = v
        ux, uy = u
        n = self.n
        if max(abs(vx), abs(vy)) > n or max(abs(ux), abs(uy)) > n:
            return 0.0
        if abs(ux - vx) + abs(uy - vy) > k:
            return 0.0
        # window of radius k around v, with the box's killing pattern
        x0, x1 = vx - k, vx + k
        y0, y1 = vy - k, vy + k
        xs = np.arange(x0, x1 + 1)
        ys = np.arange(y0, y1 + 1)
        alive = (np.abs(xs[None, :]) <= n) & (np.abs(ys[:, None]) <= n)
        start = np.zeros_like(alive, dtype=float)
        start[vy - y0, vx - x0] = 1.0
        dists = _lazy_iterate(start, alive, k)
        return 0.5 * float(sum(d[uy - y0, ux - x0] for d in dists))

    def cov_green(self, u: tuple[int, int], v: tuple[int, int]) -> float:
        """G_B(n)(u, v), the full covariance of the box field."""
        side = 2 * self.n + 1
        rp = RectPoisson(side, side)
        col = rp.green_column(v[1] + self.n, v[0] + self.n)
        return float(col[u[1] + self.n, u[0] + self.n])

    def cov_z(self, u: tuple[int, int], v: tuple[int, int]) -> float:
        return self.cov_green(u, v) - self.cov_y(u, v)

    # -- free-space values (exact for pairs > cutoff from the boundary) ------

    def cov_y_free(self, dx: int, dy: int) -> float:
        """Translation-invariant covY for displacement (dx, dy), no boundary."""
        k = self.cutoff
        size = 2 * k + 1
        alive = np.ones((size, size), dtype=bool)
        start = np.zeros((size, size))
        start[k, k] = 1.0
        dists = _lazy_iterate(start, alive, k)
        return 0.5 * float(sum(d[k + dy, k + dx] for d in dists))

    def interior_radius(self) -> int:
        """Chebyshev radius within which free-space values are exact."""
        return self.n - self.cutoff - 1

    def cov_y_diag_max(self) -> float:
        """max_v covY(v, v) over the box: attained at deep-interior vertices."""
        return self.cov_y_free(0, 0)

    def nn_z_variance_max(self, half: int | None = None) -> float:
        """max over nearest-neighbor pairs in B(half) of Var(Z_u - Z_v), exact."""
        n = self.n
        if half is None:
            half = int(math.ceil(n / 2))
        if half + 1 > n:
            raise ValueError("half box must fit inside the domain")
        from .greens import box_green_nn_forms

        forms = box_green_nn_forms(n)
        diag, horiz, vert = forms["diag"], forms["horiz"], forms["vert"]
        lo, hi = n - half, n + half  # grid offsets of B(half) inside B(n)
        g_h = diag[lo : hi + 1, lo:hi] + diag[lo : hi + 1, lo + 1 : hi + 1] - 2 * horiz[lo : hi + 1, lo:hi]
        g_v = diag[lo:hi, lo : hi + 1] + diag[lo + 1 : hi + 1, lo : hi + 1] - 2 * vert[lo:hi, lo : hi + 1]
        if half + 1 <= self.interior_radius():
            y0 = self.cov_y_free(0, 0)
            y_h = 2.0 * (y0 - self.cov_y_free(1, 0))
            y_v = 2.0 * (y0 - self.cov_y_free(0, 1))
        else:
            # near-boundary half boxes: fall back to per-pair kernel sums
            y_h = min(
                self.cov_y((x, y), (x, y)) + self.cov_y((x + 1, y), (x + 1, y)) - 2 * self.cov_y((x, y), (x + 1, y))
                for x in range(-half, half)
                for y in (-half, 0, half)
            )
            y_v = y_h
        return float(max((g_h - y_h).max(), (g_v - y_v).max()))

    # -- dense path (small boxes): full operators and exact paired samples ---

    def _dense_operators(self) -> tuple[np.ndarray, np.ndarray]:
        side = 2 * self.n + 1
        nv = side * side
        if nv > self.dense_limit:
            raise NumericError(
                f"dense lazy split for {nv} vertices exceeds limit {self.dense_limit};"
                " use the pair/quadform interface"
            )
        alive = np.ones((side, side), dtype=bool)
        cov_y = np.zeros((nv, nv))
        for j in range(nv):
            start = np.zeros((side, side))
            start[j // side, j % side] = 1.0
            dists = _lazy_iterate(start, alive, self.cutoff)
            cov_y[:, j] = 0.5 * sum(d.ravel() for d in dists)
        rp = RectPoisson(side, side)
        g = np.empty((nv, nv))
        for j in range(nv):
            g[:, j] = rp.green_column(j // side, j % side).ravel()
        return cov_y, g - cov_y

    def dense_cov(self) -> tuple[np.ndarray, np.ndarray]:
        return self._dense_operators()

    def sample_pair(self, seed: int) -> tuple[FieldSample, FieldSample]:
        """Independent fields (Y, Z) with Y + Z distributed as the box field."""
        cov_y, cov_z = self._dense_operators()
        gen = rngmod.stream(seed, "lazy-split", self.n)
        box = centered_box(self.n)
        samples = []
        for name, cov in (("Y", cov_y), ("Z", cov_z)):
            vals, vecs = np.linalg.eigh(cov)
            if vals.min() < -1e-10 * max(1.0, vals.max()):
                raise NumericError(f"cov{name} not PSD: min eig {vals.min():.3e}")
            vals = np.clip(vals, 0.0, None)
            z = gen.standard_normal(len(vals))
            samples.append(vecs @ (np.sqrt(vals) * z))
        y = FieldSample(box, samples[0], kind="synthetic", seed=seed)
        z_ = FieldSample(box, samples[1], kind="synthetic", seed=seed)
        return y, z_


def lazy_kernel_split(n: int, dense_limit: int = DENSE_LIMIT) -> LazyKernelSplit:
    """Split descriptor for the B(n) field; covariance queries are exact at any n."""
    if n < 2:
        raise ValueError("n >= 2 required")
    return LazyKernelSplit(n=n, cutoff=lazy_cutoff(n), dense_limit=dense_limit)


# ---------------------------------------------------------------------------
# concentric conditional expectations
# ---------------------------------------------------------------------------


@dataclass
class ConcentricTrace:
    base: int
    depth: int
    inner: int
    variances: np.ndarray  # exact Var(M_{n,k}), k = 1..depth
    levels: np.ndarray | None = None  # observed M_{n,k} for a field, if given

    @property
    def increments(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.variances]))


def _harmonic_avg_at_origin(field: FieldSample, m: int) -> float:
    """E(chi_0 | values on the external boundary ring of B(m))."""
    box = field.domain
    if not box.contains_box(centered_box(m + 1)):
        raise ValueError("field window too small for requested ring")
    side = 2 * m + 1
    rp = RectPoisson(side, side)
    col = rp.green_column(m, m)  # expected visits G(0, .), free set B(m)
    total = 0.0
    for x in range(-m, m + 1):
        for y_ring in (m + 1, -(m + 1)):
            for xx, yy in ((x, y_ring), (y_ring, x)):
                # neighbors of ring vertex (xx, yy) inside B(m)
                acc = 0.0
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    px, py = xx + dx, yy + dy
                    if max(abs(px), abs(py)) <= m:
                        acc += col[py + m, px + m] * 0.25
                total += acc * field.value_at(xx, yy)
    return total


def concentric_trace(
    b: int, n: int, inner: int = 1, field: FieldSample | None = None, size_limit: int = 100_000_000
) -> ConcentricTrace:
    """Variances (and, for a field, values) of the concentric martingale M_{n,k}.

    M_{n,k} conditions the B(b^n * inner) box field at the origin on its values
    on the ring of B(b^{n-k} * inner); exactly, Var M_{n,k} is the difference
    of the two boxes' Green values at the origin.
    """
    if b < 2:
        raise ValueError("base b >= 2 required (b = 1 is degenerate)")
    if n < 2 or inner < 1:
        raise ValueError("need depth n >= 2 and inner radius >= 1")
    n_prime = b**n * inner
    if (2 * n_prime + 1) ** 2 > size_limit:
        raise NumericError("outer box exceeds the configured dense limit")
    g_outer = box_green_origin(n_prime)
    variances = np.array(
        [g_outer - box_green_origin(b ** (n - k) * inner) for k in range(1, n + 1)]
    )
    levels = None
    if field is not None:
        levels = np.array(
            [_harmonic_avg_at_origin(field, b ** (n - k) * inner) for k in range(1, n + 1)]
        )
    return ConcentricTrace(base=b, depth=n, inner=inner, variances=variances, levels=levels)
