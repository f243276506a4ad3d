"""Robot footprint polygon: radii, validation and cell coverage."""

from __future__ import annotations

import math

import numpy as np


class FootprintError(ValueError):
    pass


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(p3, p4, p1)
    d2 = cross(p3, p4, p2)
    d3 = cross(p1, p2, p3)
    d4 = cross(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


class Footprint:
    """Ordered polygon of (x, y) vertices in the robot frame.

    Must be a simple polygon with at least three vertices that contains the
    robot origin.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise FootprintError("footprint needs at least 3 (x, y) vertices")
        if not np.all(np.isfinite(v)):
            raise FootprintError("footprint vertices must be finite")
        n = v.shape[0]
        # Simple polygon: no two non-adjacent edges intersect.
        for i in range(n):
            a1, a2 = v[i], v[(i + 1) % n]
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue
                if _segments_intersect(a1, a2, v[j], v[(j + 1) % n]):
                    raise FootprintError("footprint polygon is self-intersecting")
        self.vertices = v
        if not self.contains_point(0.0, 0.0):
            raise FootprintError("footprint does not contain the robot origin")

    @classmethod
    def rectangle(cls, length: float, width: float) -> "Footprint":
        hl, hw = length / 2.0, width / 2.0
        return cls([(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)])

    @classmethod
    def regular(cls, radius: float, sides: int = 16) -> "Footprint":
        ang = 2 * math.pi * np.arange(sides) / sides
        return cls(np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1))

    def contains_point(self, x: float, y: float) -> bool:
        v = self.vertices
        n = len(v)
        inside = False
        for i in range(n):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % n]
            if (y1 > y) != (y2 > y):
                xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
                if x < xs:
                    inside = not inside
        return inside

    def radii(self) -> tuple[float, float]:
        """(inscribed, circumscribed) radii about the robot origin."""
        if getattr(self, "_radii", None) is not None:
            return self._radii
        v = self.vertices
        n = len(v)
        circumscribed = float(np.max(np.hypot(v[:, 0], v[:, 1])))
        inscribed = math.inf
        for i in range(n):
            a = v[i]
            b = v[(i + 1) % n]
            ab = b - a
            denom = float(ab @ ab)
            if denom <= 0:
                d = float(np.hypot(*a))
            else:
                t = max(0.0, min(1.0, float(-(a @ ab)) / denom))
                p = a + t * ab
                d = float(np.hypot(*p))
            inscribed = min(inscribed, d)
        self._radii = (inscribed, circumscribed)
        return self._radii

    def world_vertices(self, pose) -> np.ndarray:
        """Vertices transformed to the world frame at pose (x, y, theta)."""
        x, y, th = pose
        c, s = math.cos(th), math.sin(th)
        v = self.vertices
        out = np.empty_like(v)
        out[:, 0] = x + c * v[:, 0] - s * v[:, 1]
        out[:, 1] = y + s * v[:, 0] + c * v[:, 1]
        return out


def covered_cells(poly: np.ndarray, resolution: float, origin) -> tuple[np.ndarray, np.ndarray]:
    """Grid cells whose centers fall inside the world polygon.

    Returns (ix, iy) index arrays (may be empty; not bounds-clipped).
    """
    ox, oy = origin
    min_x = math.floor((poly[:, 0].min() - ox) / resolution)
    max_x = math.floor((poly[:, 0].max() - ox) / resolution)
    min_y = math.floor((poly[:, 1].min() - oy) / resolution)
    max_y = math.floor((poly[:, 1].max() - oy) / resolution)
    xs = np.arange(min_x, max_x + 1)
    ys = np.arange(min_y, max_y + 1)
    cx = ox + (xs + 0.5) * resolution  # (nx,)
    cy = oy + (ys + 0.5) * resolution  # (ny,)
    p2 = np.roll(poly, -1, axis=0)
    x1 = poly[:, 0][:, None]
    y1 = poly[:, 1][:, None]
    x2 = p2[:, 0][:, None]
    y2 = p2[:, 1][:, None]
    dy = y2 - y1
    dy[dy == 0.0] = np.inf  # horizontal edge never crosses a scanline
    crosses = (y1 > cy) != (y2 > cy)  # (n_edges, ny)
    xs_edge = x1 + (cy - y1) * ((x2 - x1) / dy)  # (n_edges, ny)
    # Even-odd rule: parity of crossing edges left of each cell center.
    inside = np.bitwise_xor.reduce(
        crosses[:, :, None] & (cx[None, None, :] < xs_edge[:, :, None]), axis=0
    )
    iy, ix = np.nonzero(inside)
    return xs[ix], ys[iy]
