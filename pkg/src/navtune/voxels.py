"""Voxel grid obstacle layer: 3D marking/clearing and 2D projection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .costmap import COST_FREE, COST_LETHAL, COST_UNKNOWN, ObstacleLayerConfig

VOX_UNKNOWN = -1
VOX_FREE = 0
VOX_MARKED = 1


@dataclass
class VoxelGrid:
    """Column-major voxel states over a 2D cell grid.

    ``columns[iy, ix, iz]`` holds one of VOX_UNKNOWN / VOX_FREE / VOX_MARKED.
    The grid persists between updates; updates mutate in place.
    """

    resolution: float
    width: int
    height: int
    origin: tuple[float, float] = (0.0, 0.0)
    origin_z: float = 0.0
    z_resolution: float = 0.2
    z_voxels: int = 10
    unknown_threshold: int = 10
    mark_threshold: int = 0
    columns: np.ndarray = field(default=None)

    def __post_init__(self):
        if not (0 <= self.mark_threshold <= self.z_voxels):
            raise ValueError("mark_threshold out of range")
        if not (0 <= self.unknown_threshold <= self.z_voxels):
            raise ValueError("unknown_threshold out of range")
        if self.columns is None:
            self.columns = np.full(
                (self.height, self.width, self.z_voxels), VOX_UNKNOWN, dtype=np.int8
            )

    @property
    def grid_height_m(self) -> float:
        return self.z_resolution * self.z_voxels

    def voxel_index(self, x: float, y: float, z: float):
        ix = int(math.floor((x - self.origin[0]) / self.resolution))
        iy = int(math.floor((y - self.origin[1]) / self.resolution))
        iz = int(math.floor((z - self.origin_z) / self.z_resolution))
        return ix, iy, iz

    def in_bounds(self, ix, iy, iz) -> bool:
        return (
            0 <= ix < self.width and 0 <= iy < self.height and 0 <= iz < self.z_voxels
        )

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(
            self.resolution,
            self.width,
            self.height,
            self.origin,
            self.origin_z,
            self.z_resolution,
            self.z_voxels,
            self.unknown_threshold,
            self.mark_threshold,
            self.columns.copy(),
        )


def _traverse_3d(vg: VoxelGrid, a, b):
    """Ordered voxels from a to b (3D DDA), excluding out-of-grid voxels."""
    steps = (
        abs(b[0] - a[0]) / vg.resolution
        + abs(b[1] - a[1]) / vg.resolution
        + abs(b[2] - a[2]) / vg.z_resolution
    )
    n = max(1, int(math.ceil(steps * 2)))
    out = []
    last = None
    for i in range(n + 1):
        t = i / n
        p = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2]))
        idx = vg.voxel_index(*p)
        if idx != last and vg.in_bounds(*idx):
            out.append(idx)
        last = idx
    return out


def voxel_layer_update(vg: VoxelGrid, points, sensor_pose, cfg: ObstacleLayerConfig) -> VoxelGrid:
    """Mark voxels containing observed points; clear voxels along the rays.

    Points above max_obstacle_height or beyond obstacle_range are not
    marked (their rays still clear).  Marking wins within one update.
    """
    sx, sy, sz = sensor_pose
    marks = []
    for p in points:
        px, py, pz = float(p[0]), float(p[1]), float(p[2])
        rng = math.sqrt((px - sx) ** 2 + (py - sy) ** 2 + (pz - sz) ** 2)
        ray_end = (px, py, pz)
        if rng > cfg.raytrace_range and rng > 0:
            s = cfg.raytrace_range / rng
            ray_end = (sx + (px - sx) * s, sy + (py - sy) * s, sz + (pz - sz) * s)
        voxels = _traverse_3d(vg, (sx, sy, sz), ray_end)
        target = vg.voxel_index(px, py, pz)
        for idx in voxels:
            if idx == target:
                break
            vg.columns[idx[1], idx[0], idx[2]] = VOX_FREE
        if pz <= cfg.max_obstacle_height and rng <= cfg.obstacle_range and vg.in_bounds(*target):
            marks.append(target)
    for ix, iy, iz in marks:
        vg.columns[iy, ix, iz] = VOX_MARKED
    return vg


def project_voxels(vg: VoxelGrid) -> np.ndarray:
    """Project columns down to a 2D cost overlay.

    A column is lethal when its marked count exceeds mark_threshold, else
    unknown when its unknown count exceeds unknown_threshold, else free.
    """
    marked = (vg.columns == VOX_MARKED).sum(axis=2)
    unknown = (vg.columns == VOX_UNKNOWN).sum(axis=2)
    overlay = np.zeros((vg.height, vg.width), dtype=np.uint8)
    overlay[unknown > vg.unknown_threshold] = COST_UNKNOWN
    overlay[marked > vg.mark_threshold] = COST_LETHAL
    return overlay
