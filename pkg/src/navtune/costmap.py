"""Layered costmaps: obstacle layer, inflation and composition.

Cost semantics: 0 free, 1-252 scaled cost, 253 inscribed-inflated,
254 lethal, 255 unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .footprint import Footprint, covered_cells
from .grid import FREE, OCCUPIED, UNKNOWN, OccupancyGrid

COST_FREE = 0
COST_INSCRIBED = 253
COST_LETHAL = 254
COST_UNKNOWN = 255


@dataclass
class InflationConfig:
    inflation_radius: float = 0.55
    cost_scaling_factor: float = 5.0

    def __post_init__(self):
        if self.inflation_radius < 0:
            raise ValueError("inflation_radius must be >= 0")
        if not (self.cost_scaling_factor > 0):
            raise ValueError("cost_scaling_factor must be > 0")


@dataclass
class ObstacleLayerConfig:
    obstacle_range: float = 2.5
    raytrace_range: float = 3.0
    max_obstacle_height: float = 0.6

    def __post_init__(self):
        if not (0 < self.obstacle_range <= self.raytrace_range):
            raise ValueError("need 0 < obstacle_range <= raytrace_range")


class Costmap:
    """A 2D cost grid sharing the OccupancyGrid geometry conventions."""

    def __init__(self, resolution, width, height, origin=(0.0, 0.0), cells=None):
        self.resolution = float(resolution)
        self.width = int(width)
        self.height = int(height)
        self.origin = (float(origin[0]), float(origin[1]))
        if cells is None:
            cells = np.zeros((self.height, self.width), dtype=np.uint8)
        self.cells = np.asarray(cells, dtype=np.uint8)
        if self.cells.shape != (self.height, self.width):
            raise ValueError("cells shape mismatch")
        # Distance (m) from each cell center to the nearest lethal cell
        # center; filled in by inflate().
        self.distance_to_lethal: np.ndarray | None = None
        # Distance (m) to the nearest cell with any cost at all; lets
        # footprint_max_cost short-circuit in open space.
        self.distance_to_nonfree: np.ndarray | None = None

    world_to_cell = OccupancyGrid.world_to_cell
    cell_center = OccupancyGrid.cell_center
    in_bounds_cell = OccupancyGrid.in_bounds_cell
    in_bounds_world = OccupancyGrid.in_bounds_world

    def copy(self) -> "Costmap":
        cm = Costmap(self.resolution, self.width, self.height, self.origin, self.cells.copy())
        if self.distance_to_lethal is not None:
            cm.distance_to_lethal = self.distance_to_lethal.copy()
        if self.distance_to_nonfree is not None:
            cm.distance_to_nonfree = self.distance_to_nonfree.copy()
        return cm

    def cost_at_world(self, x: float, y: float) -> int:
        ix, iy = self.world_to_cell(x, y)
        if not self.in_bounds_cell(ix, iy):
            return COST_UNKNOWN
        return int(self.cells[iy, ix])

    def footprint_max_cost(self, fp: Footprint, pose) -> int:
        """Maximum cell cost under the footprint polygon at pose.

        Cells outside the map count as unknown (255).
        """
        if self.distance_to_nonfree is not None:
            ix, iy = self.world_to_cell(pose[0], pose[1])
            if self.in_bounds_cell(ix, iy):
                _, circumscribed = fp.radii()
                margin = circumscribed + self.resolution
                if (
                    self.distance_to_nonfree[iy, ix] > margin
                    and (ix + 1) * self.resolution > margin
                    and (iy + 1) * self.resolution > margin
                    and (self.width - ix) * self.resolution > margin
                    and (self.height - iy) * self.resolution > margin
                ):
                    return 0
        poly = fp.world_vertices(pose)
        ixs, iys = covered_cells(poly, self.resolution, self.origin)
        if len(ixs) == 0:
            ix, iy = self.world_to_cell(pose[0], pose[1])
            ixs = np.array([ix])
            iys = np.array([iy])
        inb = (ixs >= 0) & (ixs < self.width) & (iys >= 0) & (iys < self.height)
        worst = 0 if bool(inb.all()) else COST_UNKNOWN
        if inb.any():
            worst = max(worst, int(self.cells[iys[inb], ixs[inb]].max()))
        return worst


def lethal_distance_field(lethal_mask: np.ndarray, resolution: float) -> np.ndarray:
    """Exact euclidean cell-center distance (m) to the nearest lethal cell."""
    if not lethal_mask.any():
        return np.full(lethal_mask.shape, np.inf)
    return ndimage.distance_transform_edt(~lethal_mask) * resolution


def inflation_cost(d: float, inscribed_radius: float, cfg: InflationConfig) -> int:
    """Inflation layer contribution for distance d (m) to the nearest lethal cell."""
    if d <= 0:
        return COST_LETHAL
    if d <= inscribed_radius:
        return COST_INSCRIBED
    if d <= cfg.inflation_radius:
        return int(math.floor(252.0 * math.exp(-cfg.cost_scaling_factor * (d - inscribed_radius))))
    return COST_FREE


def inflate(costmap: Costmap, inscribed_radius: float, cfg: InflationConfig) -> Costmap:
    """Apply the inflation layer around lethal (254) cells.

    The layer contribution is combined with the existing cell value by
    maximum.  Also caches the distance field on the returned costmap.
    """
    if inscribed_radius < 0:
        raise ValueError("inscribed_radius must be >= 0")
    lethal = costmap.cells == COST_LETHAL
    dist = lethal_distance_field(lethal, costmap.resolution)
    layer = np.zeros_like(costmap.cells)
    layer[lethal] = COST_LETHAL
    ring = (~lethal) & (dist <= inscribed_radius)
    layer[ring] = COST_INSCRIBED
    with np.errstate(over="ignore", invalid="ignore"):
        decayed = np.floor(
            252.0 * np.exp(-cfg.cost_scaling_factor * (dist - inscribed_radius))
        )
    outer = (~lethal) & (~ring) & (dist <= cfg.inflation_radius)
    layer[outer] = decayed[outer].astype(np.uint8)
    out = costmap.copy()
    out.cells = np.maximum(costmap.cells, layer)
    out.distance_to_lethal = dist
    nonfree = out.cells > COST_FREE
    if nonfree.any():
        out.distance_to_nonfree = (
            ndimage.distance_transform_edt(~nonfree) * costmap.resolution
        )
    else:
        out.distance_to_nonfree = np.full(nonfree.shape, np.inf)
    return out


class ScanLike:
    """Protocol-ish holder for what obstacle_layer_update needs from a scan.

    ``rays`` is a list of per-beam dicts:
      cells: ordered (ix, iy) supercover cells from the sensor outward
      ts:    entry distance (m) of each cell along the beam
      hit:   index into cells of the hit cell, or None
      range: hit distance (m), or the max-range code
    ``sensor``: world (x, y).
    """

    def __init__(self, sensor, rays):
        self.sensor = sensor
        self.rays = rays


def obstacle_layer_update(overlay: np.ndarray, scan: ScanLike, cfg: ObstacleLayerConfig) -> np.ndarray:
    """Mark/clear the persistent obstacle overlay from one scan.

    Hit cells within obstacle_range become lethal; cells traversed before a
    hit (within raytrace_range) are cleared.  Marking wins over clearing
    within a single update.
    """
    clear_ix: list[int] = []
    clear_iy: list[int] = []
    marks: list[tuple[int, int]] = []
    for ray in scan.rays:
        cells = ray["cells"]
        ts = ray["ts"]
        hit = ray["hit"]
        limit = min(ray["range"], cfg.raytrace_range)
        for k, (ix, iy) in enumerate(cells):
            if hit is not None and k >= hit:
                break
            if ts[k] > limit:
                break
            clear_ix.append(ix)
            clear_iy.append(iy)
        if hit is not None and ray["range"] <= cfg.obstacle_range:
            marks.append(cells[hit])
    if clear_ix:
        overlay[np.asarray(clear_iy), np.asarray(clear_ix)] = COST_FREE
    for ix, iy in marks:
        overlay[iy, ix] = COST_LETHAL
    return overlay


def clear_overlay_outside(
    overlay: np.ndarray, costmap_geom: Costmap, robot_xy, reset_distance: float
) -> np.ndarray:
    """Reset overlay cells farther than reset_distance from the robot."""
    h, w = overlay.shape
    ys, xs = np.mgrid[0:h, 0:w]
    cx = costmap_geom.origin[0] + (xs + 0.5) * costmap_geom.resolution
    cy = costmap_geom.origin[1] + (ys + 0.5) * costmap_geom.resolution
    far = np.hypot(cx - robot_xy[0], cy - robot_xy[1]) > reset_distance
    overlay[far] = COST_FREE
    return overlay


def compose_costmap(
    static: OccupancyGrid,
    obstacle_overlay: np.ndarray | None,
    voxel_overlay: np.ndarray | None,
    inflation: InflationConfig,
    fp: Footprint,
) -> Costmap:
    """Compose static, obstacle and voxel layers, then inflate once.

    Lethal sources are gathered across all layers before inflation so the
    distance field sees every obstacle.
    """
    shape = (static.height, static.width)
    for name, ov in (("obstacle", obstacle_overlay), ("voxel", voxel_overlay)):
        if ov is not None and ov.shape != shape:
            raise ValueError(f"{name} overlay dimensions do not match the static map")
    base = np.zeros(shape, dtype=np.uint8)
    base[static.cells == UNKNOWN] = COST_UNKNOWN
    lethal = static.cells == OCCUPIED
    for ov in (obstacle_overlay, voxel_overlay):
        if ov is None:
            continue
        base = np.maximum(base, ov)
        lethal |= ov == COST_LETHAL
    base[lethal] = COST_LETHAL
    cm = Costmap(static.resolution, static.width, static.height, static.origin, base)
    inscribed, _ = fp.radii()
    return inflate(cm, inscribed, inflation)


def window_crop(grid: OccupancyGrid, center_xy, window_m: float) -> tuple[int, int, int, int]:
    """Cell bounds (x0, y0, x1, y1) of a window_m-sized window clipped to the map."""
    half = window_m / 2.0
    x0, y0 = grid.world_to_cell(center_xy[0] - half, center_xy[1] - half)
    x1, y1 = grid.world_to_cell(center_xy[0] + half, center_xy[1] + half)
    x0 = max(0, x0)
    y0 = max(0, y0)
    x1 = min(grid.width - 1, x1)
    y1 = min(grid.height - 1, y1)
    return x0, y0, x1 + 1, y1 + 1


def to_pgm(cells: np.ndarray) -> str:
    """Portable graymap (P2) dump of raw 0-255 cost values."""
    h, w = cells.shape
    lines = [f"P2", f"{w} {h}", "255"]
    for iy in range(h - 1, -1, -1):  # image top row = highest y
        lines.append(" ".join(str(int(v)) for v in cells[iy]))
    return "\n".join(lines) + "\n"
