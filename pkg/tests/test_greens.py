"""Green oracles and the potential kernel against independent constructions."""

import numpy as np
import pytest

from gfflab.errors import UnpinnedDomainError
from gfflab.geometry import centered_box
from gfflab.fieldlab import greens


def direct_green_b1_interior():
    """(I - P)^-1 for the 9 free vertices of B(1), built from scratch."""
    pts = [(x, y) for y in range(-1, 2) for x in range(-1, 2)]
    pos = {p: i for i, p in enumerate(pts)}
    m = np.eye(9)
    for (x, y), i in pos.items():
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if (x + dx, y + dy) in pos:
                m[i, pos[(x + dx, y + dy)]] -= 0.25
    return np.linalg.inv(m), pos


def test_single_free_vertex():
    box = centered_box(1)
    o = box.index(0, 0)
    oracle = greens.green_matrix(box, np.setdiff1d(np.arange(9), [o]))
    assert oracle.green(o, o) == pytest.approx(1.0, abs=1e-12)


def test_b1_interior_against_direct_system():
    box = centered_box(2)
    oracle = greens.green_matrix(box, box.ring_indices(2))
    G, pos = direct_green_b1_interior()
    for (p, q) in [((0, 0), (0, 0)), ((0, 0), (1, 0)), ((1, 1), (-1, 0))]:
        got = oracle.green(box.index(*p), box.index(*q))
        assert got == pytest.approx(G[pos[p], pos[q]], abs=1e-12)


def test_dirichlet_row_is_zero():
    box = centered_box(2)
    oracle = greens.green_matrix(box, box.ring_indices(2))
    d = int(box.index(2, 0))
    col = oracle.green_column(d)
    assert np.all(col == 0.0)
    assert oracle.green(d, box.index(0, 0)) == 0.0


def test_unpinned_domain_rejected():
    with pytest.raises(UnpinnedDomainError):
        greens.green_matrix(centered_box(2), [])


def test_green_dense_matches_columns():
    box = centered_box(3)
    oracle = greens.green_matrix(box, box.ring_indices(3))
    G = oracle.green_dense()
    v = int(np.nonzero(oracle.free_idx == box.index(1, 1))[0][0])
    col = oracle.green_column(box.index(1, 1))
    assert np.allclose(G[:, v], col, atol=1e-11)
    assert np.allclose(G, G.T, atol=1e-11)


def test_potential_kernel_values():
    # a(0) = 0 exactly; a(e1) = 1 and a(1,1) = 4/pi are classical lattice
    # constants, used here as independent anchors for the extrapolated oracle
    assert greens.potential_kernel((0, 0)) == 0.0
    assert greens.potential_kernel((1, 0)) == pytest.approx(1.0, abs=1e-8)
    assert greens.potential_kernel((0, -1)) == pytest.approx(1.0, abs=1e-8)
    assert greens.potential_kernel((1, 1)) == pytest.approx(4 / np.pi, abs=1e-8)
    assert greens.potential_kernel((2, 0)) == pytest.approx(4 - 8 / np.pi, abs=1e-8)


def test_potential_kernel_far_field_consistency():
    # crossover continuity: table value vs asymptotic formula near the cutoff
    a_table = greens.potential_kernel((31, 0))
    a_asym = greens.GRID_G * np.log(31.0) + greens.potential_kernel_c0()
    assert a_table == pytest.approx(a_asym, abs=2e-3)


def test_pinned_covariance():
    assert greens.pinned_covariance((0, 0), (5, 3)) == 0.0
    assert greens.pinned_covariance((1, 0), (1, 0)) == pytest.approx(2.0, abs=1e-8)
    expected = 2 * greens.potential_kernel((1, 0)) - greens.potential_kernel((2, 0))
    assert greens.pinned_covariance((1, 0), (-1, 0)) == pytest.approx(expected, abs=1e-12)


def test_box_green_nn_forms_match_columns():
    m = 5
    forms = greens.box_green_nn_forms(m)
    side = 2 * m + 1
    rp = greens.RectPoisson(side, side)
    for (x, y) in [(0, 0), (2, -1), (-4, 3)]:
        col = rp.green_column(y + m, x + m)
        assert forms["diag"][y + m, x + m] == pytest.approx(col[y + m, x + m], rel=1e-12)
        assert forms["horiz"][y + m, x + m] == pytest.approx(col[y + m, x + m + 1], rel=1e-10)
        assert forms["vert"][y + m, x + m] == pytest.approx(col[y + m + 1, x + m], rel=1e-10)


def test_harmonic_extension_reproduces_harmonic_function():
    # x-coordinate is discrete harmonic; extending its boundary values must return it
    box = centered_box(4)
    oracle = greens.green_matrix(box, box.ring_indices(4))
    x, y = box.all_coords()
    ring = box.ring_indices(4)
    ext = oracle.harmonic_extension(x[ring].astype(float), ring)
    assert np.allclose(ext, x.astype(float), atol=1e-9)


def test_coarse_field_variance_bound_stable_constant():
    # exact Var(coarse_u - coarse_v) for A = B(4N), B = B(2N), pairs in B(N):
    # the fitted constant in Var <= C (dist/N)^2 is stable across N
    consts = []
    for n in (8, 16, 32):
        side_a = 2 * (4 * n) + 1
        side_b = 2 * (2 * n) + 1
        rp_a = greens.RectPoisson(side_a, side_a)
        rp_b = greens.RectPoisson(side_b, side_b)
        worst = 0.0
        pairs = [((0, 0), (1, 0)), ((0, 0), (0, n // 2)), ((-n, -n), (n, n)), ((n, 0), (0, n))]
        for u, v in pairs:
            quad_a = _pair_quadform(rp_a, 4 * n, u, v)
            quad_b = _pair_quadform(rp_b, 2 * n, u, v)
            var_coarse = quad_a - quad_b
            dist = abs(u[0] - v[0]) + abs(u[1] - v[1])
            worst = max(worst, var_coarse / (dist / n) ** 2)
        consts.append(worst)
    mid = np.mean(consts)
    assert all(abs(c - mid) <= 0.25 * mid for c in consts)


def _pair_quadform(rp, m, u, v):
    b = np.zeros((2 * m + 1, 2 * m + 1))
    b[u[1] + m, u[0] + m] = 4.0
    b[v[1] + m, v[0] + m] = -4.0
    sol = rp.solve(b)
    return float(sol[u[1] + m, u[0] + m] - sol[v[1] + m, v[0] + m])
