import numpy as np
import pytest

from navtune.grid import OccupancyGrid


def grid_from_rows(rows, resolution=0.1, origin=(0.0, 0.0)):
    """Build a grid from ASCII rows given top-to-bottom (like the map files)."""
    glyph = {".": 0, "#": 1, "?": -1}
    height = len(rows)
    width = len(rows[0])
    cells = np.zeros((height, width), dtype=np.int8)
    for tr, row in enumerate(rows):
        for ix, ch in enumerate(row):
            cells[height - 1 - tr, ix] = glyph[ch]
    return OccupancyGrid(resolution, width, height, origin, cells)


@pytest.fixture
def empty_grid():
    return OccupancyGrid(0.1, 20, 20)
