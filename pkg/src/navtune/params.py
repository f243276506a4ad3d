"""Typed live parameter registry: the dynamic-reconfigure surface."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class PatchError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterDescriptor:
    name: str  # dotted path, e.g. "dwa.sim_time"
    type: str  # "float" | "int" | "bool"
    minimum: float
    maximum: float
    default: object
    doc: str = ""
    hot: bool = True  # reloadable between control cycles

    def validate(self, value):
        if self.type == "bool":
            if isinstance(value, bool):
                return value
            if value in (0, 1):
                return bool(value)
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise PatchError(f"{self.name}: expected bool, got {value!r}")
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise PatchError(f"{self.name}: expected number, got {value!r}") from None
        if not (self.minimum <= v <= self.maximum):
            raise PatchError(
                f"{self.name}: {v} outside [{self.minimum}, {self.maximum}]"
            )
        return int(v) if self.type == "int" else v


def _d(name, type_, lo, hi, default, doc="", hot=True):
    return ParameterDescriptor(name, type_, lo, hi, default, doc, hot)


DESCRIPTORS: list[ParameterDescriptor] = [
    # robot limits
    _d("robot.min_vel_x", "float", -2.0, 0.0, -0.2, "min translational velocity (m/s)"),
    _d("robot.max_vel_x", "float", 0.0, 2.0, 0.55, "max translational velocity (m/s)"),
    _d("robot.min_vel_y", "float", -2.0, 0.0, 0.0),
    _d("robot.max_vel_y", "float", 0.0, 2.0, 0.0, "zero for non-holonomic bases"),
    _d("robot.min_vel_theta", "float", -4.0, 0.0, -1.0, "signed; sampling uses |min|"),
    _d("robot.max_vel_theta", "float", 0.0, 4.0, 1.0),
    _d("robot.acc_lim_x", "float", 0.01, 10.0, 2.5, "m/s^2"),
    _d("robot.acc_lim_y", "float", 0.01, 10.0, 2.5),
    _d("robot.acc_lim_theta", "float", 0.01, 10.0, 3.2, "rad/s^2"),
    # global planner
    _d("global.cost_factor", "float", 0.001, 10.0, 0.55),
    _d("global.neutral_cost", "float", 1.0, 254.0, 66.0),
    _d("global.lethal_cost", "float", 1.0, 254.0, 253.0),
    _d("global.use_dijkstra", "bool", 0, 1, True),
    _d("global.use_grid_path", "bool", 0, 1, False),
    _d("global.allow_unknown", "bool", 0, 1, True),
    # DWA
    _d("dwa.sim_time", "float", 0.1, 10.0, 4.0, "forward-simulation horizon (s)"),
    _d("dwa.sim_granularity", "float", 0.005, 0.5, 0.025, "max pose spacing (m)"),
    _d("dwa.vx_samples", "int", 1, 60, 20),
    _d("dwa.vy_samples", "int", 1, 20, 1),
    _d("dwa.vth_samples", "int", 1, 80, 40),
    _d("dwa.path_distance_bias", "float", 0.0, 128.0, 32.0),
    _d("dwa.goal_distance_bias", "float", 0.0, 128.0, 20.0),
    _d("dwa.occdist_scale", "float", 0.0, 4.0, 0.02),
    _d("dwa.controller_frequency", "float", 1.0, 100.0, 10.0, "Hz"),
    _d("dwa.xy_goal_tolerance", "float", 0.005, 2.0, 0.10),
    _d("dwa.yaw_goal_tolerance", "float", 0.005, 3.2, 0.05),
    _d("dwa.latch_xy_goal_tolerance", "bool", 0, 1, False),
    _d("dwa.oscillation_reset_dist", "float", 0.0, 2.0, 0.05),
    # costmap
    _d("costmap.inflation_radius", "float", 0.0, 5.0, 0.55),
    _d("costmap.cost_scaling_factor", "float", 0.01, 100.0, 5.0),
    _d("costmap.obstacle_range", "float", 0.1, 20.0, 2.5),
    _d("costmap.raytrace_range", "float", 0.1, 20.0, 3.0),
    _d("costmap.max_obstacle_height", "float", 0.0, 5.0, 0.6),
    _d("costmap.local_window", "float", 1.0, 20.0, 6.0, "local rolling window (m)"),
    # voxel layer
    _d("voxel.origin_z", "float", -5.0, 5.0, 0.0),
    _d("voxel.z_resolution", "float", 0.01, 2.0, 0.2),
    _d("voxel.z_voxels", "int", 1, 64, 10),
    _d("voxel.unknown_threshold", "int", 0, 64, 10),
    _d("voxel.mark_threshold", "int", 0, 64, 0),
    # recovery / executive
    _d("recovery.reset_distance", "float", 0.1, 20.0, 3.0),
    _d("recovery.attempt_limit", "int", 1, 10, 2, "attempts per behavior per goal"),
    _d("recovery.temp_goal_radius", "float", 0.1, 5.0, 0.5),
    _d("recovery.back_off_distance", "float", 0.1, 10.0, 1.0),
    _d("recovery.extended_chain", "bool", 0, 1, True, "false = clear+rotate baseline"),
    _d("executive.replan_period", "float", 0.1, 30.0, 1.0, "s"),
    _d("executive.stuck_window", "float", 0.5, 60.0, 5.0, "s"),
    _d("executive.near_goal_retune", "bool", 0, 1, False,
       "scale path_distance_bias down within 1 m of the goal"),
    # simulated sensor
    _d("sim.lidar_beams", "int", 1, 720, 72),
    _d("sim.lidar_fov", "float", 0.01, 2 * math.pi, 2 * math.pi),
    _d("sim.lidar_max_range", "float", 0.5, 50.0, 6.0),
]


class ParameterRegistry:
    """Live registry with atomic patches, revisions and an audit log."""

    def __init__(self):
        self.descriptors = {d.name: d for d in DESCRIPTORS}
        if len(self.descriptors) != len(DESCRIPTORS):
            raise RuntimeError("duplicate descriptor names")
        self.values = {d.name: d.default for d in DESCRIPTORS}
        self.revision = 0
        self.audit: list[tuple[float, str, str, object, object]] = []
        self._patch_counter = 0

    def get(self, name: str):
        return self.values[name]

    def snapshot(self) -> dict:
        return dict(self.values)

    def describe(self) -> list[dict]:
        return [
            {
                "name": d.name,
                "type": d.type,
                "min": d.minimum,
                "max": d.maximum,
                "default": d.default,
                "doc": d.doc,
                "hot": d.hot,
                "value": self.values[d.name],
            }
            for d in DESCRIPTORS
        ]

    def apply_patch(self, values: dict, t: float = 0.0, patch_id: str | None = None) -> int:
        """All-or-nothing patch; returns the new revision."""
        validated = {}
        for name, value in values.items():
            desc = self.descriptors.get(name)
            if desc is None:
                raise PatchError(f"unknown parameter {name!r}")
            validated[name] = desc.validate(value)
        if patch_id is None:
            self._patch_counter += 1
            patch_id = f"p{self._patch_counter}"
        for name, value in validated.items():
            old = self.values[name]
            self.values[name] = value
            self.audit.append((t, patch_id, name, old, value))
        self.revision += 1
        return self.revision

    def audit_log_text(self) -> str:
        return "".join(
            f"{t!r} {pid} {name} {old!r} {new!r}\n" for t, pid, name, old, new in self.audit
        )
