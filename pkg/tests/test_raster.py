"""Raster masks and polynomially convex hulls."""

from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentindex import ContractError
from momentindex.raster import RegionMask
from momentindex.support import is_polynomially_convex, pc_hull


def bfs_fill(grid):
    """Oracle: breadth-first flood fill of the complement from the border."""
    rows, cols = grid.shape
    seen = np.zeros_like(grid)
    queue = deque()
    for r in range(rows):
        for c in (0, cols - 1):
            if not grid[r, c] and not seen[r, c]:
                seen[r, c] = True
                queue.append((r, c))
    for c in range(cols):
        for r in (0, rows - 1):
            if not grid[r, c] and not seen[r, c]:
                seen[r, c] = True
                queue.append((r, c))
    while queue:
        r, c = queue.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols and not grid[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                queue.append((rr, cc))
    return ~seen


def frame(pixels=64):
    return RegionMask.frame(0j, 1.0, pixels)


@st.composite
def masks(draw):
    n = draw(st.integers(8, 24))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.floats(0.1, 0.6))
    g = np.random.default_rng(seed).random((n, n)) < density
    g[:2], g[-2:], g[:, :2], g[:, -2:] = False, False, False, False
    return RegionMask(0.0, 1.0, float(n), g)


@given(masks())
def test_hole_filling_matches_bfs_oracle(mask):
    assert np.array_equal(pc_hull(mask).grid, bfs_fill(mask.grid))


@given(masks())
def test_hull_is_idempotent_and_extensive(mask):
    h = pc_hull(mask)
    assert mask.subset_of(h)
    assert np.array_equal(pc_hull(h).grid, h.grid)
    assert is_polynomially_convex(h)


@given(masks(), masks())
def test_hull_is_monotone(a, b):
    if a.shape != b.shape:
        return
    union = a.union(b)
    assert pc_hull(a).subset_of(pc_hull(union))


def test_ring_is_filled_and_annulus_not_convex():
    f = frame()
    ring = f.blank().with_polyline(np.exp(2j * np.pi * np.arange(200) / 200) * 0.7)
    h = pc_hull(ring)
    disk = f.blank().with_disk(0, 0.65)
    assert disk.subset_of(h)
    assert not is_polynomially_convex(ring)


def test_diagonal_gap_leaks_under_four_connectivity():
    g = np.zeros((9, 9), bool)
    # a diamond drawn with diagonal steps has 4-connected holes at its corners
    for k in range(3):
        g[2 + k, 4 - k] = g[2 + k, 4 + k] = g[6 - k, 4 - k] = g[6 - k, 4 + k] = True
    h = pc_hull(RegionMask(0.0, 1.0, 9.0, g))
    assert h.grid[4, 4]


def test_hull_requires_margin():
    g = np.zeros((10, 10), bool)
    g[1, 5] = True
    with pytest.raises(ContractError):
        pc_hull(RegionMask(0.0, 1.0, 10.0, g))


def test_convex_polygon_fill_matches_half_plane_test():
    f = frame(80)
    tri = np.array([0.8, -0.5 + 0.6j, -0.4 - 0.7j])
    m = f.blank().with_convex_polygon(tri)
    z = f.pixel_centers()
    def half_planes(tol):
        ok = np.ones(z.shape, bool)
        for a, b in zip(tri, np.roll(tri, -1)):
            ok &= ((b - a).conjugate() * (z - a)).imag / abs(b - a) >= -tol
        return ok

    # every interior pixel center is set; set pixels touch the triangle
    assert not np.any(half_planes(0.0) & ~m.grid)
    assert not np.any(m.grid & ~half_planes(f.pixel_size * 0.7072))


def test_points_outside_frame_rejected():
    with pytest.raises(ContractError):
        frame().blank().with_points([3.0])


def test_pixel_center_convention():
    f = RegionMask(0.0, 2.0, 1.0, np.zeros((2, 2), bool))
    assert f.pixel_centers()[0, 0] == 0.5 + 1.5j
    assert f.to_pixel(0.5 + 1.5j) == (0, 0)


@given(masks())
def test_pgm_and_rle_roundtrip(mask):
    back = RegionMask.from_pgm(mask.to_pgm(), mask.xmin, mask.ymax, mask.resolution)
    assert np.array_equal(back.grid, mask.grid)
    rle = RegionMask.from_rle(mask.to_rle())
    assert np.array_equal(rle.grid, mask.grid) and rle.same_frame(mask)
