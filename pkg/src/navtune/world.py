"""Deterministic 2D world: differential-drive kinematics, simulated lidar,
odometry-log calibration and scenario files."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath

import numpy as np

from .costmap import ScanLike
from .dwa import Twist, VelocityLimits, propagate_pose
from .grid import OCCUPIED, OccupancyGrid, load_ascii_map, traverse


def normalize_angle(a: float) -> float:
    a = (a + math.pi) % (2 * math.pi) - math.pi
    if a == -math.pi:
        a = math.pi
    return a


@dataclass
class RobotState:
    pose: tuple[float, float, float] = (0.0, 0.0, 0.0)
    twist: Twist = field(default_factory=Twist)
    time: float = 0.0


@dataclass
class LidarConfig:
    beam_count: int = 72
    field_of_view: float = 2 * math.pi
    max_range: float = 6.0
    mount: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.beam_count < 1:
            raise ValueError("beam_count must be >= 1")
        if not (0 < self.field_of_view <= 2 * math.pi + 1e-12):
            raise ValueError("field_of_view must be in (0, 2*pi]")


class ScanError(RuntimeError):
    pass


def step(state: RobotState, cmd: Twist, limits: VelocityLimits, dt: float) -> RobotState:
    """Advance one physics step: accelerate toward cmd, then arc-propagate."""
    if dt <= 0:
        raise ValueError("dt must be > 0")

    def axis(v, target, lo, hi, a):
        target = min(max(target, lo), hi)
        dv = min(max(target - v, -a * dt), a * dt)
        return min(max(v + dv, lo), hi)

    olo, ohi = limits.omega_bounds
    tw = Twist(
        axis(state.twist.vx, cmd.vx, limits.min_vel_x, limits.max_vel_x, limits.acc_lim_x),
        axis(state.twist.vy, cmd.vy, limits.min_vel_y, limits.max_vel_y, limits.acc_lim_y),
        axis(state.twist.omega, cmd.omega, olo, ohi, limits.acc_lim_theta),
    )
    x, y, th = propagate_pose(state.pose, tw, dt)
    return RobotState((x, y, normalize_angle(th)), tw, state.time + dt)


def scan(grid: OccupancyGrid, state: RobotState, cfg: LidarConfig) -> ScanLike:
    """Cast cfg.beam_count rays; range is the entry distance into the first
    occupied cell, or max_range when nothing is hit."""
    mx, my, mth = cfg.mount
    x, y, th = state.pose
    c, s = math.cos(th), math.sin(th)
    sx = x + c * mx - s * my
    sy = y + s * mx + c * my
    if not grid.in_bounds_world(sx, sy):
        raise ScanError("sensor outside map")
    six, siy = grid.world_to_cell(sx, sy)
    if grid.cells[siy, six] == OCCUPIED:
        raise ScanError("robot pose inside an occupied cell")

    full_circle = cfg.field_of_view >= 2 * math.pi - 1e-9
    if cfg.beam_count == 1:
        offsets = [0.0]
    elif full_circle:
        offsets = [
            -cfg.field_of_view / 2 + cfg.field_of_view * i / cfg.beam_count
            for i in range(cfg.beam_count)
        ]
    else:
        offsets = [
            -cfg.field_of_view / 2 + cfg.field_of_view * i / (cfg.beam_count - 1)
            for i in range(cfg.beam_count)
        ]
    base = th + mth
    rays = []
    ox, oy = grid.origin
    w_m = grid.width * grid.resolution
    h_m = grid.height * grid.resolution
    eps = grid.resolution * 1e-6
    for off in offsets:
        ang = base + off
        dx, dy = math.cos(ang), math.sin(ang)
        # Clip the beam endpoint to just inside the map bounds.
        tmax = cfg.max_range
        if dx > 0:
            tmax = min(tmax, (ox + w_m - eps - sx) / dx)
        elif dx < 0:
            tmax = min(tmax, (ox + eps - sx) / dx)
        if dy > 0:
            tmax = min(tmax, (oy + h_m - eps - sy) / dy)
        elif dy < 0:
            tmax = min(tmax, (oy + eps - sy) / dy)
        tmax = max(tmax, 0.0)
        end = (sx + dx * tmax, sy + dy * tmax)
        cells_t = traverse(grid, (sx, sy), end)
        cells = [(ix, iy) for ix, iy, _ in cells_t]
        ts = [t * tmax for _, _, t in cells_t]
        hit = None
        rng = cfg.max_range
        for k, (ix, iy) in enumerate(cells):
            if grid.cells[iy, ix] == OCCUPIED:
                hit = k
                rng = ts[k]
                break
        rays.append({"angle": ang, "cells": cells, "ts": ts, "hit": hit, "range": rng})
    return ScanLike((sx, sy), rays)


@dataclass
class OdomSample:
    t: float
    x: float
    y: float
    theta: float
    vx: float
    omega: float


class CalibrationError(ValueError):
    pass


def calibrate_from_odom(log: list[OdomSample]) -> dict:
    """Estimate velocity and acceleration limits from one odometry log.

    The ramp time is measured from the first sample with any motion until
    the speed first reaches 99% of its maximum.
    """
    if len(log) < 2:
        raise CalibrationError("log needs at least 2 samples")
    ts = [s.t for s in log]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise CalibrationError("timestamps must be strictly increasing")

    def ramp(values):
        vmax = max(abs(v) for v in values)
        if vmax <= 1e-9:
            return vmax, None
        t0 = next(s.t for s, v in zip(log, values) if abs(v) > 1e-9)
        t99 = next(s.t for s, v in zip(log, values) if abs(v) >= 0.99 * vmax)
        dt = t99 - t0
        if dt <= 0:
            return vmax, None
        return vmax, dt

    v_max, t_t = ramp([s.vx for s in log])
    omega_max, t_r = ramp([s.omega for s in log])
    if t_t is None and t_r is None:
        raise CalibrationError("no velocity ramp observed (zero or constant motion)")
    out = {"v_max": v_max, "omega_max": omega_max}
    out["a_t_max"] = v_max / t_t if t_t else None
    out["a_r_max"] = omega_max / t_r if t_r else None
    return out


def load_odom_csv(text: str) -> list[OdomSample]:
    """CSV `t,x,y,theta,vx,omega` (optional header)."""
    rows = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        parts = ln.split(",")
        try:
            float(parts[0])
        except ValueError:
            continue  # header line
        if len(parts) != 6:
            raise CalibrationError("odometry rows need 6 comma-separated fields")
        rows.append(OdomSample(*[float(v) for v in parts]))
    if not rows:
        raise CalibrationError("empty odometry log")
    return rows


@dataclass
class DynamicObstacle:
    """Axis-aligned occupied rectangle present during [t_add, t_remove)."""

    x0: float
    y0: float
    x1: float
    y1: float
    t_add: float = 0.0
    t_remove: float = math.inf


@dataclass
class Scenario:
    grid: OccupancyGrid
    start: tuple[float, float, float]
    goal: tuple[float, float, float]
    time_limit: float = 60.0
    expect: str = "Reach"
    overrides: dict = field(default_factory=dict)
    obstacles: list[DynamicObstacle] = field(default_factory=list)
    marks: list[tuple[float, float]] = field(default_factory=list)
    footprint: list[tuple[float, float]] | None = None
    name: str = "scenario"

    def __post_init__(self):
        for label, pose in (("start", self.start), ("goal", self.goal)):
            if not self.grid.in_bounds_world(pose[0], pose[1]):
                raise ValueError(f"{label} outside map")

    def effective_grid(self, t: float) -> OccupancyGrid:
        """Static grid plus any dynamic obstacles active at time t."""
        active = [o for o in self.obstacles if o.t_add <= t < o.t_remove]
        if not active:
            return self.grid
        g = self.grid.copy()
        for o in active:
            x0, y0 = g.world_to_cell(o.x0 + 1e-9, o.y0 + 1e-9)
            x1, y1 = g.world_to_cell(o.x1 - 1e-9, o.y1 - 1e-9)
            x0, x1 = max(0, x0), min(g.width - 1, x1)
            y0, y1 = max(0, y0), min(g.height - 1, y1)
            g.cells[y0 : y1 + 1, x0 : x1 + 1] = OCCUPIED
        return g


_EXPECTED = {"Reach", "NoPath", "RecoveryThenReach"}


def load_scenario(text: str, base_dir: FsPath | str = ".", name: str = "scenario") -> Scenario:
    """Key-value scenario file.

    Keys: ``map`` (path), ``start``/``goal`` (x y theta), ``time_limit``,
    ``expect``, ``obstacle x0 y0 x1 y1 [t_add t_remove]``, ``mark x y``,
    plus registry-name overrides (keys containing a dot).
    """
    base_dir = FsPath(base_dir)
    kv: dict = {}
    obstacles: list[DynamicObstacle] = []
    marks: list[tuple[float, float]] = []
    overrides: dict = {}
    for ln in text.splitlines():
        ln = ln.split("//")[0].strip()
        if not ln or ln.startswith("#"):
            continue
        key, _, rest = ln.partition(" ")
        rest = rest.strip()
        if key == "obstacle":
            vals = [float(v) for v in rest.split()]
            if len(vals) not in (4, 6):
                raise ValueError("obstacle needs 4 or 6 numbers")
            obstacles.append(DynamicObstacle(*vals))
        elif key == "mark":
            x, y = (float(v) for v in rest.split())
            marks.append((x, y))
        elif "." in key:
            overrides[key] = rest
        else:
            kv[key] = rest
    if "map" not in kv or "start" not in kv or "goal" not in kv:
        raise ValueError("scenario needs map, start and goal")
    map_path = base_dir / kv["map"]
    grid = load_ascii_map(map_path.read_text())
    start = tuple(float(v) for v in kv["start"].split())
    goal = tuple(float(v) for v in kv["goal"].split())
    if len(start) == 2:
        start = (*start, 0.0)
    if len(goal) == 2:
        goal = (*goal, 0.0)
    expect = kv.get("expect", "Reach")
    if expect not in _EXPECTED:
        raise ValueError(f"unknown expected outcome {expect!r}")
    footprint = None
    if "footprint" in kv:
        vals = [float(v) for v in kv["footprint"].split()]
        if len(vals) < 6 or len(vals) % 2:
            raise ValueError("footprint needs at least 3 x,y pairs")
        footprint = list(zip(vals[0::2], vals[1::2]))
    return Scenario(
        grid=grid,
        start=start,
        goal=goal,
        time_limit=float(kv.get("time_limit", 60.0)),
        expect=expect,
        overrides=overrides,
        obstacles=obstacles,
        marks=marks,
        footprint=footprint,
        name=name,
    )
