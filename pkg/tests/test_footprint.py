import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navtune.footprint import Footprint, FootprintError, covered_cells


def test_rectangle_radii():
    fp = Footprint.rectangle(0.5, 0.4)
    inscribed, circumscribed = fp.radii()
    assert inscribed == pytest.approx(0.2)
    assert circumscribed == pytest.approx(math.hypot(0.25, 0.2))


def test_regular_polygon_radii():
    fp = Footprint.regular(0.3, sides=64)
    inscribed, circumscribed = fp.radii()
    assert circumscribed == pytest.approx(0.3)
    # inscribed approaches the radius as the side count grows
    assert inscribed == pytest.approx(0.3 * math.cos(math.pi / 64), rel=1e-9)


@pytest.mark.parametrize(
    "vertices,msg",
    [
        ([(0, 0), (1, 0)], "at least 3"),
        ([(0, 0), (1, 0), (float("nan"), 1)], "finite"),
        ([(0, 0), (1, 1), (1, 0), (0, 1)], "intersecting"),  # bow-tie
        ([(1, 1), (2, 1), (2, 2), (1, 2)], "origin"),  # origin outside
    ],
)
def test_invalid_footprints(vertices, msg):
    with pytest.raises(FootprintError, match=msg):
        Footprint(vertices)


def test_contains_point_even_odd():
    fp = Footprint([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    assert fp.contains_point(0.0, 0.0)
    assert fp.contains_point(0.99, 0.99)
    assert not fp.contains_point(1.5, 0.0)


def test_world_vertices_rotation():
    fp = Footprint.rectangle(2.0, 1.0)
    v = fp.world_vertices((1.0, 2.0, math.pi / 2))
    # front-right corner (1.0, -0.5) maps to (1.0 + 0.5, 2.0 + 1.0)
    assert np.allclose(sorted(v.tolist()), sorted([[1.5, 3.0], [1.5, 1.0], [0.5, 1.0], [0.5, 3.0]]))


def _oracle_covered(poly, resolution, origin):
    """Brute force: test every candidate cell center with even-odd rule."""
    xs = poly[:, 0]
    ys = poly[:, 1]
    out = set()
    ix0 = int(math.floor((xs.min() - origin[0]) / resolution)) - 1
    ix1 = int(math.floor((xs.max() - origin[0]) / resolution)) + 1
    iy0 = int(math.floor((ys.min() - origin[1]) / resolution)) - 1
    iy1 = int(math.floor((ys.max() - origin[1]) / resolution)) + 1
    n = len(poly)
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            px = origin[0] + (ix + 0.5) * resolution
            py = origin[1] + (iy + 0.5) * resolution
            inside = False
            for i in range(n):
                x1, y1 = poly[i]
                x2, y2 = poly[(i + 1) % n]
                if (y1 > py) != (y2 > py):
                    x_edge = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                    if px < x_edge:
                        inside = not inside
            if inside:
                out.add((ix, iy))
    return out


@settings(max_examples=40, deadline=None)
@given(
    x=st.floats(-1.0, 1.0),
    y=st.floats(-1.0, 1.0),
    theta=st.floats(0, 2 * math.pi),
    length=st.floats(0.2, 1.5),
    width=st.floats(0.2, 1.5),
)
def test_covered_cells_matches_oracle(x, y, theta, length, width):
    fp = Footprint.rectangle(length, width)
    poly = fp.world_vertices((x, y, theta))
    ixs, iys = covered_cells(poly, 0.1, (0.0, 0.0))
    got = set(zip(ixs.tolist(), iys.tolist()))
    assert got == _oracle_covered(poly, 0.1, (0.0, 0.0))


def test_covered_cells_triangle():
    fp = Footprint([(0.35, -0.05), (-0.05, -0.25), (-0.05, 0.25)])
    poly = fp.world_vertices((0.5, 0.5, 0.0))
    ixs, iys = covered_cells(poly, 0.1, (0.0, 0.0))
    got = set(zip(ixs.tolist(), iys.tolist()))
    assert got == _oracle_covered(poly, 0.1, (0.0, 0.0))
    assert (4, 4) in got
