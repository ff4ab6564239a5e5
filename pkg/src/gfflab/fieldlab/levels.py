"""Level sets of the box field and the finite law-of-iterated-logarithm count."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import FieldSample
from .greens import GRID_G

__all__ = ["LevelSetReport", "level_set", "lil_phi", "lil_count"]


@dataclass
class LevelSetReport:
    alpha: float
    threshold: float  # 2 sqrt(g) log n
    n: int
    member_idx: np.ndarray  # indices into the field's box
    cardinality: int


def level_set(field: FieldSample, alpha: float, n: int | None = None) -> LevelSetReport:
    """Vertices of B(floor(n/2)) whose value lies in (alpha*m, alpha*m + 1).

    The reference height is m = 2 sqrt(g) log n with g = 2/pi; n defaults to
    the field box's halfwidth (the box field convention).
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    box = field.domain
    if n is None:
        if box.hx != box.hy or (box.cx, box.cy) != (0, 0):
            raise ValueError("pass n explicitly for non-centered or non-square boxes")
        n = box.hx
    if n < 2:
        raise ValueError("n >= 2 required for a meaningful threshold")
    m_tilde = 2.0 * math.sqrt(GRID_G) * math.log(n)
    half = n // 2
    x, y = box.all_coords()
    in_half = (np.abs(x - box.cx) <= half) & (np.abs(y - box.cy) <= half)
    lo = alpha * m_tilde
    members = np.nonzero(in_half & (field.values > lo) & (field.values < lo + 1.0))[0]
    return LevelSetReport(
        alpha=alpha, threshold=m_tilde, n=n, member_idx=members, cardinality=len(members)
    )


_PHI_FLOOR_X = 3.0


def lil_phi(x) -> np.ndarray | float:
    """phi(x) = sqrt(2 x log log x) for x >= 3, clamped to phi(3) below."""
    arr = np.asarray(x, dtype=float)
    clamped = np.maximum(arr, _PHI_FLOOR_X)
    out = np.sqrt(2.0 * clamped * np.log(np.log(clamped)))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def lil_count(s_values, s_squared, lower_index: int = 1) -> int:
    """#{k in [max(lower_index, ceil(e^sqrt(log n))), n] : S_k >= phi(s_k^2)/2}.

    Indices are 1-based to match the walk convention (S_1 is the first partial
    sum); both sequences must have equal length n.
    """
    s_values = np.asarray(s_values, dtype=float)
    s_squared = np.asarray(s_squared, dtype=float)
    if s_values.shape != s_squared.shape or s_values.ndim != 1:
        raise ValueError("length mismatch between walk and variance sequences")
    if np.any(s_squared <= 0) or np.any(np.diff(s_squared) < 0):
        raise ValueError("variance sequence must be positive and nondecreasing")
    n = len(s_values)
    if n == 0:
        return 0
    start = max(int(lower_index), int(math.ceil(math.exp(math.sqrt(math.log(n))))) if n > 1 else 1)
    if start > n:
        return 0
    ks = np.arange(start, n + 1)
    return int(np.sum(s_values[ks - 1] >= lil_phi(s_squared[ks - 1]) / 2.0))
