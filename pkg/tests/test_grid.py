import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navtune.grid import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    MapFormatError,
    OccupancyGrid,
    dump_ascii_map,
    load_ascii_map,
    raytrace,
    traverse,
)

BASIC = "resolution 0.5\n..#\n.?.\n...\n"


def test_load_basic_map_geometry():
    g = load_ascii_map(BASIC)
    assert (g.width, g.height) == (3, 3)
    assert g.resolution == 0.5
    # top text row is the highest y row
    assert g.cells[2, 2] == OCCUPIED
    assert g.cells[1, 1] == UNKNOWN
    assert g.cells[0, 0] == FREE


def test_load_map_with_origin():
    g = load_ascii_map("resolution 1.0\norigin -2.0 3.5\n..\n..\n")
    assert g.origin == (-2.0, 3.5)
    assert g.world_to_cell(-1.5, 3.6) == (0, 0)


def test_dump_roundtrip():
    g = load_ascii_map(BASIC)
    again = load_ascii_map(dump_ascii_map(g))
    assert np.array_equal(again.cells, g.cells)
    assert again.resolution == g.resolution


@pytest.mark.parametrize(
    "text,msg",
    [
        ("", "empty"),
        ("resolution 0.5\n", "empty"),
        ("resolution 0.5\n..\n...\n", "ragged"),
        ("resolution 0.5\n.x.\n", "glyph"),
        ("resolution nope\n..\n", "resolution"),
        ("..\n..\n", "resolution"),
        ("resolution -1\n..\n", "resolution"),
    ],
)
def test_malformed_maps_raise(text, msg):
    with pytest.raises(MapFormatError, match=msg):
        load_ascii_map(text)


def test_world_cell_transforms():
    g = OccupancyGrid(0.25, 8, 4, origin=(1.0, -1.0))
    assert g.world_to_cell(1.0, -1.0) == (0, 0)
    assert g.world_to_cell(1.24, -0.76) == (0, 0)
    assert g.world_to_cell(1.25, -0.75) == (1, 1)
    assert g.cell_center(0, 0) == (1.125, -0.875)
    assert g.in_bounds_cell(7, 3)
    assert not g.in_bounds_cell(8, 3)


# ---------------------------------------------------------------------------
# Supercover traversal: oracle = exhaustive segment/cell intersection test.
# ---------------------------------------------------------------------------


def _segment_intersects_cell(ax, ay, bx, by, ix, iy, res, eps=1e-12):
    """Does segment a-b pass through cell (ix, iy) (closed cell)?"""
    lo_x, hi_x = ix * res, (ix + 1) * res
    lo_y, hi_y = iy * res, (iy + 1) * res
    # Liang-Barsky clip of the segment against the cell rectangle.
    dx, dy = bx - ax, by - ay
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, ax - lo_x),
        (dx, hi_x - ax),
        (-dy, ay - lo_y),
        (dy, hi_y - ay),
    ):
        if abs(p) < eps:
            if q < -eps:
                return False
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
    return t0 <= t1 + eps


def _oracle_cells(grid, a, b):
    out = set()
    for iy in range(grid.height):
        for ix in range(grid.width):
            if _segment_intersects_cell(a[0], a[1], b[0], b[1], ix, iy, grid.resolution):
                out.add((ix, iy))
    return out


def _interior_cells(grid, a, b, eps=1e-9):
    """Cells the segment passes strictly through the interior of (dense
    sampling oracle; a guaranteed-to-be-included lower bound)."""
    res = grid.resolution
    n = max(2, int(math.hypot(b[0] - a[0], b[1] - a[1]) / (res / 64)) + 1)
    out = set()
    for k in range(n + 1):
        x = a[0] + (b[0] - a[0]) * k / n
        y = a[1] + (b[1] - a[1]) * k / n
        fx = (x - grid.origin[0]) / res
        fy = (y - grid.origin[1]) / res
        # only count samples clearly interior to a cell
        if abs(fx - round(fx)) > eps and abs(fy - round(fy)) > eps:
            out.add((int(math.floor(fx)), int(math.floor(fy))))
    return out


@pytest.mark.parametrize(
    "a,b",
    [
        ((0.05, 0.05), (0.95, 0.05)),  # axis-aligned
        ((0.05, 0.05), (0.95, 0.95)),  # exact diagonal through corners
        ((0.12, 0.07), (0.83, 0.64)),  # generic slope
        ((0.5, 0.5), (0.5, 0.5)),  # degenerate point
        ((0.31, 0.9), (0.69, 0.1)),  # steep
    ],
)
def test_traverse_bracketed_by_oracles(a, b):
    g = OccupancyGrid(0.1, 10, 10)
    got = {(ix, iy) for ix, iy, _ in traverse(g, a, b)}
    # must cover every cell the segment passes through interiorly ...
    assert _interior_cells(g, a, b) <= got
    # ... and never report a cell the closed-rectangle oracle rejects
    assert got <= _oracle_cells(g, a, b)


def test_traverse_corner_crossing_includes_both_side_cells():
    g = OccupancyGrid(1.0, 4, 4)
    got = {(ix, iy) for ix, iy, _ in traverse(g, (0.5, 0.5), (2.5, 2.5))}
    # Crossing the corner at (1,1) must include both (0,1) and (1,0); same at (2,2).
    assert {(0, 1), (1, 0), (1, 2), (2, 1)} <= got


def test_traverse_entry_distances_monotone():
    g = OccupancyGrid(0.1, 10, 10)
    cells = traverse(g, (0.12, 0.07), (0.83, 0.64))
    ts = [t for _, _, t in cells]
    assert ts == sorted(ts)
    assert ts[0] == 0.0


@settings(max_examples=60, deadline=None)
@given(
    ax=st.floats(0.01, 0.99),
    ay=st.floats(0.01, 0.99),
    bx=st.floats(0.01, 0.99),
    by=st.floats(0.01, 0.99),
)
def test_traverse_oracle_property(ax, ay, bx, by):
    g = OccupancyGrid(0.1, 10, 10)
    got = {(ix, iy) for ix, iy, _ in traverse(g, (ax, ay), (bx, by))}
    oracle = _oracle_cells(g, (ax, ay), (bx, by))
    missing = _interior_cells(g, (ax, ay), (bx, by)) - got
    extra = got - oracle
    assert missing == set() or all(
        _corner_graze(g, (ax, ay), (bx, by), c) for c in missing
    )
    assert extra == set() or all(
        _corner_graze(g, (ax, ay), (bx, by), c) for c in extra
    )


def _corner_graze(grid, a, b, cell, tol=1e-7):
    """The segment passes within tol of one of the cell's corners."""
    res = grid.resolution
    ix, iy = cell
    corners = [
        (ix * res, iy * res),
        ((ix + 1) * res, iy * res),
        (ix * res, (iy + 1) * res),
        ((ix + 1) * res, (iy + 1) * res),
    ]
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    for cx, cy in corners:
        if denom == 0:
            d = math.hypot(cx - ax, cy - ay)
        else:
            t = max(0.0, min(1.0, ((cx - ax) * dx + (cy - ay) * dy) / denom))
            d = math.hypot(cx - (ax + t * dx), cy - (ay + t * dy))
        if d <= tol:
            return True
    return False


def test_raytrace_cell_list(empty_grid):
    g = empty_grid
    cells = raytrace(g, (0.05, 1.05), (1.95, 1.05))
    assert cells == [(ix, 10) for ix in range(20)]


def test_traverse_rejects_out_of_bounds(empty_grid):
    with pytest.raises(ValueError, match="out of grid bounds"):
        traverse(empty_grid, (-1.0, 0.5), (0.5, 0.5))
