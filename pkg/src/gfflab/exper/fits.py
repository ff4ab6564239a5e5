"""Exponent formula and scaling-slope fits."""

from __future__ import annotations

import math

import numpy as np

from .config import GAMMA_C

__all__ = ["psi_exponent", "exponent_fit"]


def psi_exponent(gamma: float) -> float:
    """The exit-time/volume exponent: 2 + 2 (g/gc)^2 up to gc = sqrt(pi/2), then 4 g/gc."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    ratio = gamma / GAMMA_C
    if gamma <= GAMMA_C:
        return 2.0 + 2.0 * ratio * ratio
    return 4.0 * ratio


def exponent_fit(sizes, median_logs) -> tuple[float, float]:
    """Least-squares slope (and stderr) of median log value against log side.

    The abscissa is log(2N + 1), the box side, so deterministic power laws in
    the vertex count fit exactly.
    """
    sizes = np.asarray(sizes, dtype=float)
    ys = np.asarray(median_logs, dtype=float)
    if len(sizes) < 3:
        raise ValueError("need at least 3 distinct sizes")
    xs = np.log(2.0 * sizes + 1.0)
    A = np.column_stack([xs, np.ones_like(xs)])
    coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    slope = float(coef[0])
    fitted = A @ coef
    dof = len(xs) - 2
    if dof <= 0:
        return slope, 0.0
    s2 = float(np.sum((ys - fitted) ** 2)) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return slope, float(math.sqrt(max(cov[0, 0], 0.0)))
