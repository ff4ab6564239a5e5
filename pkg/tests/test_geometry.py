import numpy as np
import pytest
from hypothesis import given, strategies as st

from gfflab.geometry import LatticeBox, Rect, boundary_ring, centered_box


@given(
    cx=st.integers(-50, 50),
    cy=st.integers(-50, 50),
    hx=st.integers(0, 12),
    hy=st.integers(0, 12),
)
def test_index_coords_inverse(cx, cy, hx, hy):
    box = LatticeBox(cx, cy, hx, hy)
    idx = np.arange(box.nvertices)
    x, y = box.coords(idx)
    assert np.array_equal(box.index(x, y), idx)
    assert box.nvertices == (2 * hx + 1) * (2 * hy + 1)


def test_row_major_enumeration():
    box = LatticeBox(0, 0, 1, 1)
    x, y = box.all_coords()
    assert list(zip(x[:3], y[:3])) == [(-1, -1), (0, -1), (1, -1)]


def test_ring_and_boundary():
    box = centered_box(3)
    ring2 = box.ring_indices(2)
    assert len(ring2) == 16
    outer = boundary_ring(box, centered_box(2))
    # external boundary of B(2) inside B(3): ring of radius 3 minus 4 corners
    assert len(outer) == 4 * 5
    x, y = box.coords(outer)
    assert np.all(np.maximum(np.abs(x), np.abs(y)) == 3)
    assert not any(abs(a) == 3 and abs(b) == 3 for a, b in zip(x, y))


def test_subbox_and_neighbors():
    box = centered_box(4)
    sub = centered_box(2)
    idx = box.subbox_indices(sub)
    assert len(idx) == sub.nvertices
    assert sorted(box.neighbors(box.index(4, 4))) == sorted(
        [box.index(3, 4), box.index(4, 3)]
    )


def test_negative_halfwidth_rejected():
    with pytest.raises(ValueError):
        LatticeBox(0, 0, -1, 0)
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 0)
