"""Occupancy grids, the ASCII map format and supercover raytracing.

World frame: x to the right, y up.  Cells are indexed ``[iy, ix]`` with
``iy == 0`` at the bottom row; ASCII map files list rows top to bottom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FREE = 0
OCCUPIED = 1
UNKNOWN = -1

_GLYPHS = {".": FREE, "#": OCCUPIED, "?": UNKNOWN}
_GLYPH_OF = {FREE: ".", OCCUPIED: "#", UNKNOWN: "?"}


class MapFormatError(ValueError):
    """Raised for malformed ASCII map documents."""


@dataclass
class OccupancyGrid:
    resolution: float
    width: int
    height: int
    origin: tuple[float, float] = (0.0, 0.0)
    cells: np.ndarray = field(default=None)  # int8, shape (height, width)

    def __post_init__(self):
        if not (self.resolution > 0):
            raise ValueError("resolution must be > 0")
        if not all(math.isfinite(v) for v in self.origin):
            raise ValueError("origin must be finite")
        if self.cells is None:
            self.cells = np.full((self.height, self.width), FREE, dtype=np.int8)
        self.cells = np.asarray(self.cells, dtype=np.int8)
        if self.cells.shape != (self.height, self.width):
            raise ValueError("cells shape does not match width/height")

    # ---- coordinate transforms -------------------------------------------------

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        ix = int(math.floor((x - self.origin[0]) / self.resolution))
        iy = int(math.floor((y - self.origin[1]) / self.resolution))
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def in_bounds_cell(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def in_bounds_world(self, x: float, y: float) -> bool:
        ox, oy = self.origin
        return (
            ox <= x <= ox + self.width * self.resolution
            and oy <= y <= oy + self.height * self.resolution
        )

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(
            self.resolution, self.width, self.height, self.origin, self.cells.copy()
        )


def load_ascii_map(text: str) -> OccupancyGrid:
    """Parse the ASCII map format.

    Line 1: ``resolution <meters>``.  Optional ``origin <x> <y>`` line.
    Remaining lines are grid rows, top to bottom, of ``#`` / ``.`` / ``?``.
    """
    lines = [ln for ln in text.splitlines() if ln.strip() != ""]
    if not lines:
        raise MapFormatError("empty map")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "resolution":
        raise MapFormatError("missing/invalid resolution header")
    try:
        resolution = float(header[1])
    except ValueError:
        raise MapFormatError("missing/invalid resolution header") from None
    if not (resolution > 0) or not math.isfinite(resolution):
        raise MapFormatError("missing/invalid resolution header")

    origin = (0.0, 0.0)
    body_start = 1
    if len(lines) > 1 and lines[1].split()[0] == "origin":
        parts = lines[1].split()
        if len(parts) != 3:
            raise MapFormatError("invalid origin line")
        try:
            origin = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise MapFormatError("invalid origin line") from None
        body_start = 2

    rows = [ln.strip() for ln in lines[body_start:]]
    if not rows:
        raise MapFormatError("empty map")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MapFormatError("ragged rows")
    height = len(rows)
    cells = np.empty((height, width), dtype=np.int8)
    for text_row, row in enumerate(rows):
        iy = height - 1 - text_row  # top text line is the highest y
        for ix, glyph in enumerate(row):
            if glyph not in _GLYPHS:
                raise MapFormatError(f"unknown glyph {glyph!r}")
            cells[iy, ix] = _GLYPHS[glyph]
    return OccupancyGrid(resolution, width, height, origin, cells)


def dump_ascii_map(grid: OccupancyGrid) -> str:
    lines = [f"resolution {grid.resolution!r}", f"origin {grid.origin[0]!r} {grid.origin[1]!r}"]
    for iy in range(grid.height - 1, -1, -1):
        lines.append("".join(_GLYPH_OF[int(v)] for v in grid.cells[iy]))
    return "\n".join(lines) + "\n"


_EPS = 1e-12


def traverse(
    grid: OccupancyGrid, a: tuple[float, float], b: tuple[float, float]
) -> list[tuple[int, int, float]]:
    """Supercover traversal of the segment a->b.

    Returns ``(ix, iy, t_entry)`` for every cell whose closed rectangle the
    segment passes through, in order of entry (``t_entry`` in [0, 1] along
    the segment).  At exact corner crossings both side cells are included so
    the traced cells are edge-connected (no diagonal gaps).
    """
    if not grid.in_bounds_world(*a) or not grid.in_bounds_world(*b):
        raise ValueError("raytrace endpoint out of grid bounds")
    res = grid.resolution
    ax = (a[0] - grid.origin[0]) / res
    ay = (a[1] - grid.origin[1]) / res
    bx = (b[0] - grid.origin[0]) / res
    by = (b[1] - grid.origin[1]) / res
    dx = bx - ax
    dy = by - ay

    def clampc(ix, iy):
        return (min(max(ix, 0), grid.width - 1), min(max(iy, 0), grid.height - 1))

    ix, iy = clampc(int(math.floor(ax)), int(math.floor(ay)))
    exf, eyf = clampc(int(math.floor(bx)), int(math.floor(by)))
    out: list[tuple[int, int, float]] = [(ix, iy, 0.0)]
    if math.hypot(dx, dy) < _EPS:
        return out

    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    # Parametric distance to the next x / y grid line.
    if abs(dx) < _EPS:
        t_max_x = math.inf
        t_dx = math.inf
    else:
        nxt = ix + 1 if sx > 0 else ix
        t_max_x = (nxt - ax) / dx
        t_dx = 1.0 / abs(dx)
    if abs(dy) < _EPS:
        t_max_y = math.inf
        t_dy = math.inf
    else:
        nyt = iy + 1 if sy > 0 else iy
        t_max_y = (nyt - ay) / dy
        t_dy = 1.0 / abs(dy)

    guard = 4 * (grid.width + grid.height)
    while (ix, iy) != (exf, eyf) and guard > 0:
        guard -= 1
        if abs(t_max_x - t_max_y) < _EPS and t_max_x <= 1.0 + _EPS:
            # Corner crossing: include both side cells, then step diagonally.
            t = t_max_x
            c1 = (ix + sx, iy)
            c2 = (ix, iy + sy)
            if grid.in_bounds_cell(*c1):
                out.append((c1[0], c1[1], t))
            if grid.in_bounds_cell(*c2):
                out.append((c2[0], c2[1], t))
            ix += sx
            iy += sy
            t_max_x += t_dx
            t_max_y += t_dy
            if grid.in_bounds_cell(ix, iy):
                out.append((ix, iy, t))
            else:
                break
        elif t_max_x < t_max_y:
            if t_max_x > 1.0 + _EPS:
                break
            t = t_max_x
            ix += sx
            t_max_x += t_dx
            if not grid.in_bounds_cell(ix, iy):
                break
            out.append((ix, iy, t))
        else:
            if t_max_y > 1.0 + _EPS:
                break
            t = t_max_y
            iy += sy
            t_max_y += t_dy
            if not grid.in_bounds_cell(ix, iy):
                break
            out.append((ix, iy, t))
    return out


def raytrace(
    grid: OccupancyGrid, a: tuple[float, float], b: tuple[float, float]
) -> list[tuple[int, int]]:
    """Ordered list of cells the segment a->b passes through (supercover)."""
    return [(ix, iy) for ix, iy, _ in traverse(grid, a, b)]
