"""Navigation executive: the closed loop tying sensing, costmaps and planners.

The :class:`Navigator` runs one scenario deterministically.  Each control
cycle it scans the simulated lidar, updates the obstacle overlay, composes
the global and local costmaps, advances a small state machine
(``Planning`` / ``Controlling`` / ``Recovering:<name>`` / ``Reached`` /
``Aborted``), emits exactly one velocity command, and steps the physics.
Every cycle also produces a JSON-serializable :class:`frame <FrameEncoder>`
suitable for logging or streaming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .costmap import (
    COST_INSCRIBED,
    InflationConfig,
    ObstacleLayerConfig,
    clear_overlay_outside,
    compose_costmap,
    obstacle_layer_update,
    window_crop,
)
from .dwa import (
    DwaConfig,
    GoalStatus,
    OscillationState,
    PlannerFailure,
    Twist,
    VelocityLimits,
    _ang_diff,
    choose_velocity,
    dynamic_window,
    goal_progress,
    update_oscillation,
)
from .footprint import Footprint
from .global_planner import GlobalPlannerConfig, NoPathError, plan
from .grid import OccupancyGrid
from .params import ParameterRegistry, PatchError
from .world import LidarConfig, RobotState, Scenario, scan, step

RING_SPACING = 0.2
RING_CAPACITY = 256
TEMP_GOAL_BUDGET = 10.0
PHYSICS_SUBSTEPS = 10


@dataclass
class RunMetrics:
    outcome: str = "Timeout"
    time: float = 0.0
    path_length: float = 0.0
    min_clearance: float = math.inf
    centering: float = 0.0
    recoveries: dict = field(default_factory=dict)
    oscillation_resets: int = 0
    footprint_violations: int = 0
    plans: int = 0
    plan_failures: int = 0

    @property
    def recovery_total(self) -> int:
        return sum(self.recoveries.values())

    def as_record(self) -> dict:
        return {
            "outcome": self.outcome,
            "time": round(self.time, 3),
            "path_length": round(self.path_length, 4),
            "min_clearance": (
                round(self.min_clearance, 4) if math.isfinite(self.min_clearance) else -1.0
            ),
            "centering": round(self.centering, 4),
            "recoveries": self.recovery_total,
        }


def path_centering(path, costmap) -> float:
    """Mean waypoint distance-to-nearest-lethal over the best achievable.

    Normalized by the maximum distance any traversable cell achieves, so a
    perfectly centered corridor path scores near 1.0 and a wall-hugging
    path scores low.
    """
    dist = costmap.distance_to_lethal
    if dist is None or not np.isfinite(dist).all():
        return 1.0
    traversable = costmap.cells < COST_INSCRIBED
    if not traversable.any():
        return 0.0
    best = float(dist[traversable].max())
    if best <= 0:
        return 0.0
    total = 0.0
    n = 0
    for wx, wy in path.waypoints:
        ix, iy = costmap.world_to_cell(wx, wy)
        if costmap.in_bounds_cell(ix, iy):
            total += float(dist[iy, ix])
            n += 1
    return (total / n) / best if n else 0.0


def outcome_matches(expect: str, metrics: RunMetrics) -> bool:
    """Did a finished run satisfy a scenario's ``expect`` line?"""
    if expect == "Reach":
        return metrics.outcome == "Reach"
    if expect == "NoPath":
        return metrics.outcome == "NoPath"
    if expect == "RecoveryThenReach":
        return metrics.outcome == "Reach" and metrics.recovery_total > 0
    raise ValueError(f"unknown expectation {expect!r}")


@dataclass
class GoalEntry:
    pose: tuple[float, float, float]
    yaw_matters: bool = True
    deadline: float | None = None
    label: str = "goal"
    latched: bool = False


class FrameEncoder:
    """Delta-encodes the streamed local costmap.

    A keyframe (full ``cells`` list) is sent every ``interval`` frames and
    whenever the window origin or size changes; other frames carry a
    ``delta`` list of ``[flat_index, value]`` pairs.
    """

    def __init__(self, interval: int = 64):
        self.interval = int(interval)
        self._count = 0
        self._key: tuple | None = None
        self._cells: np.ndarray | None = None

    def encode(self, costmap) -> dict:
        key = (costmap.origin, costmap.width, costmap.height, costmap.resolution)
        out = {
            "origin": [costmap.origin[0], costmap.origin[1]],
            "resolution": costmap.resolution,
            "width": costmap.width,
            "height": costmap.height,
        }
        full = (
            self._key != key
            or self._cells is None
            or self._count % self.interval == 0
        )
        flat = costmap.cells.ravel()
        if full:
            out["keyframe"] = True
            out["cells"] = flat.tolist()
            self._count = 0
        else:
            idx = np.flatnonzero(flat != self._cells)
            out["keyframe"] = False
            out["delta"] = [[int(i), int(flat[i])] for i in idx]
        self._key = key
        self._cells = flat.copy()
        self._count += 1
        return out


def apply_frame(frame_costmap: dict, cells: np.ndarray | None) -> np.ndarray:
    """Replay one encoded costmap frame onto the previous flat cell array."""
    if frame_costmap["keyframe"]:
        return np.array(frame_costmap["cells"], dtype=np.uint8)
    if cells is None:
        raise ValueError("delta frame without a prior keyframe")
    out = cells.copy()
    for i, v in frame_costmap["delta"]:
        out[i] = v
    return out


class _RotateInPlace:
    """Spin a full revolution; fail if the footprint would touch an obstacle."""

    name = "Rotate"

    def __init__(self):
        self.rotated = 0.0
        self._last_theta = None

    def on_cycle(self, nav, local_cm, dt):
        pose = nav.state.pose
        if self._last_theta is not None:
            self.rotated += abs(_ang_diff(pose[2], self._last_theta))
        self._last_theta = pose[2]
        if self.rotated >= 2 * math.pi - nav.dwa_cfg.yaw_goal_tolerance:
            return "done", Twist()
        window = dynamic_window(nav.state.twist, nav.limits, dt)
        omega = min(window["omega"][1], nav.limits.max_vel_theta)
        # Look ahead to where the sweep would stop if we had to brake now;
        # commanding omega and checking only one step ahead lets momentum
        # carry the footprint into the inscribed band before it can stop.
        brake = omega * omega / (2.0 * nav.limits.acc_lim_theta)
        lookahead = (pose[0], pose[1], pose[2] + omega * dt + brake)
        if (
            local_cm.footprint_max_cost(nav.footprint, pose) >= COST_INSCRIBED
            or local_cm.footprint_max_cost(nav.footprint, lookahead) >= COST_INSCRIBED
        ):
            return "failed", Twist()
        vx = min(max(0.0, window["vx"][0]), window["vx"][1])
        return "running", Twist(vx=vx, omega=omega)


class Navigator:
    """Deterministic scenario runner with the full recovery chain."""

    def __init__(
        self,
        scenario: Scenario,
        registry: ParameterRegistry | None = None,
        record_frames: bool = True,
    ):
        self.scenario = scenario
        self.registry = registry if registry is not None else ParameterRegistry()
        self._apply_overrides(scenario.overrides)
        if scenario.footprint is not None:
            self.footprint = Footprint(scenario.footprint)
        else:
            self.footprint = Footprint.rectangle(0.5, 0.4)
        self.state = RobotState(pose=tuple(scenario.start))
        self.static = scenario.grid
        self.overlay = np.zeros((self.static.height, self.static.width), dtype=np.uint8)
        for mx, my in scenario.marks:
            ix, iy = self.static.world_to_cell(mx, my)
            if self.static.in_bounds_cell(ix, iy):
                self.overlay[iy, ix] = 254
        self.nav_state = "Planning"
        self.goal_stack = [GoalEntry(tuple(scenario.goal), yaw_matters=True, label="goal")]
        self.path = None
        self.last_plan_time = -math.inf
        self.oscillation = OscillationState()
        self.metrics = RunMetrics()
        self.events: list[dict] = []
        self.frames: list[dict] = []
        self.record_frames = record_frames
        self._encoder = FrameEncoder()
        self._seq = 0
        self._recovery_idx = 0
        self._active_recovery = None
        self._ring: list[tuple[float, float, float]] = [tuple(scenario.start)]
        self._stuck_hist: list[tuple[float, float, float]] = []
        self._pending_events: list[dict] = []
        self._refresh_configs()

    # ----- parameter plumbing -------------------------------------------

    def _apply_overrides(self, overrides: dict) -> None:
        if not overrides:
            return
        parsed = {}
        for name, raw in overrides.items():
            desc = self.registry.descriptors.get(name)
            if desc is None:
                raise PatchError(f"unknown parameter {name!r} in scenario overrides")
            if desc.type == "bool":
                parsed[name] = str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif desc.type == "int":
                parsed[name] = int(float(raw))
            else:
                parsed[name] = float(raw)
        self.registry.apply_patch(parsed, t=0.0, patch_id="scenario")

    def _refresh_configs(self) -> None:
        g = self.registry.get
        self.limits = VelocityLimits(
            min_vel_x=g("robot.min_vel_x"),
            max_vel_x=g("robot.max_vel_x"),
            min_vel_y=g("robot.min_vel_y"),
            max_vel_y=g("robot.max_vel_y"),
            min_vel_theta=g("robot.min_vel_theta"),
            max_vel_theta=g("robot.max_vel_theta"),
            acc_lim_x=g("robot.acc_lim_x"),
            acc_lim_y=g("robot.acc_lim_y"),
            acc_lim_theta=g("robot.acc_lim_theta"),
        )
        self.dwa_cfg = DwaConfig(
            sim_time=g("dwa.sim_time"),
            sim_granularity=g("dwa.sim_granularity"),
            vx_samples=g("dwa.vx_samples"),
            vy_samples=g("dwa.vy_samples"),
            vth_samples=g("dwa.vth_samples"),
            path_distance_bias=g("dwa.path_distance_bias"),
            goal_distance_bias=g("dwa.goal_distance_bias"),
            occdist_scale=g("dwa.occdist_scale"),
            controller_frequency=g("dwa.controller_frequency"),
            xy_goal_tolerance=g("dwa.xy_goal_tolerance"),
            yaw_goal_tolerance=g("dwa.yaw_goal_tolerance"),
            latch_xy_goal_tolerance=g("dwa.latch_xy_goal_tolerance"),
            oscillation_reset_dist=g("dwa.oscillation_reset_dist"),
        )
        self.global_cfg = GlobalPlannerConfig(
            cost_factor=g("global.cost_factor"),
            neutral_cost=g("global.neutral_cost"),
            lethal_cost=g("global.lethal_cost"),
            use_dijkstra=g("global.use_dijkstra"),
            use_grid_path=g("global.use_grid_path"),
            allow_unknown=g("global.allow_unknown"),
        )
        self.inflation = InflationConfig(
            inflation_radius=g("costmap.inflation_radius"),
            cost_scaling_factor=g("costmap.cost_scaling_factor"),
        )
        self.obstacle_cfg = ObstacleLayerConfig(
            obstacle_range=g("costmap.obstacle_range"),
            raytrace_range=g("costmap.raytrace_range"),
            max_obstacle_height=g("costmap.max_obstacle_height"),
        )
        self.lidar_cfg = LidarConfig(
            beam_count=g("sim.lidar_beams"),
            field_of_view=g("sim.lidar_fov"),
            max_range=g("sim.lidar_max_range"),
        )
        self._param_revision = self.registry.revision

    # ----- bookkeeping ---------------------------------------------------

    def _event(self, name: str, detail: str = "") -> None:
        ev = {
            "t": round(self.state.time, 3),
            "state": self.nav_state,
            "event": name,
            "detail": detail,
        }
        self.events.append(ev)
        self._pending_events.append(ev)

    @property
    def active_goal(self) -> GoalEntry:
        return self.goal_stack[-1]

    def _recovery_chain(self) -> list[str]:
        if self.registry.get("recovery.extended_chain"):
            chain = ["ClearCostmap", "Rotate", "TemporaryNearGoal", "BackOff"]
        else:
            chain = ["ClearCostmap", "Rotate"]
        return chain * int(self.registry.get("recovery.attempt_limit"))

    # ----- costmaps -------------------------------------------------------

    def _sense_and_compose(self):
        eff = self.scenario.effective_grid(self.state.time)
        sc = scan(eff, self.state, self.lidar_cfg)
        obstacle_layer_update(self.overlay, sc, self.obstacle_cfg)
        global_cm = compose_costmap(
            self.static, self.overlay, None, self.inflation, self.footprint
        )
        x0, y0, x1, y1 = window_crop(
            self.static, self.state.pose[:2], self.registry.get("costmap.local_window")
        )
        sub = OccupancyGrid(
            resolution=self.static.resolution,
            width=x1 - x0,
            height=y1 - y0,
            origin=(
                self.static.origin[0] + x0 * self.static.resolution,
                self.static.origin[1] + y0 * self.static.resolution,
            ),
            cells=self.static.cells[y0:y1, x0:x1].copy(),
        )
        local_cm = compose_costmap(
            sub, self.overlay[y0:y1, x0:x1], None, self.inflation, self.footprint
        )
        return global_cm, local_cm

    # ----- recovery -------------------------------------------------------

    def _trouble(self, reason: str) -> None:
        self._event("trouble", reason)
        if self.active_goal.label != "goal":
            self.goal_stack.pop()
            self._event("recovery_failed", "temporary goal abandoned")
        seq = self._recovery_chain()
        if self._recovery_idx >= len(seq):
            self.nav_state = "Aborted"
            self._event("aborted", "recovery behaviors exhausted")
            return
        name = seq[self._recovery_idx]
        self._recovery_idx += 1
        self.metrics.recoveries[name] = self.metrics.recoveries.get(name, 0) + 1
        self._event("recovery_started", name)
        self.nav_state = f"Recovering:{name}"
        self._active_recovery = _RotateInPlace() if name == "Rotate" else name
        self.path = None
        self.oscillation = OscillationState()
        self._stuck_hist.clear()

    def _recovery_done(self, name: str, ok: bool) -> None:
        self._event("recovery_finished" if ok else "recovery_failed", name)
        self._active_recovery = None
        if ok:
            self.nav_state = "Planning"
        else:
            self._trouble(f"{name} failed")

    def _run_recovery_cycle(self, local_cm, global_cm, dt: float) -> Twist:
        beh = self._active_recovery
        reset_distance = self.registry.get("recovery.reset_distance")
        if beh == "ClearCostmap":
            clear_overlay_outside(
                self.overlay, global_cm, self.state.pose[:2], reset_distance
            )
            self._recovery_done("ClearCostmap", True)
            return Twist()
        if isinstance(beh, _RotateInPlace):
            status, cmd = beh.on_cycle(self, local_cm, dt)
            if status != "running":
                self._recovery_done("Rotate", status == "done")
                return Twist()
            return cmd
        if beh == "TemporaryNearGoal":
            target = self._pick_near_goal(local_cm)
            if target is None:
                self._recovery_done("TemporaryNearGoal", False)
            else:
                self.goal_stack.append(
                    GoalEntry(
                        target,
                        yaw_matters=False,
                        deadline=self.state.time + TEMP_GOAL_BUDGET,
                        label="TemporaryNearGoal",
                    )
                )
                self._active_recovery = None
                self.nav_state = "Planning"
                self._event("temporary_goal", f"{target[0]:.3f} {target[1]:.3f}")
            return Twist()
        if beh == "BackOff":
            target = self._pick_back_off()
            if target is None:
                self._recovery_done("BackOff", False)
            else:
                self.goal_stack.append(
                    GoalEntry(
                        target,
                        yaw_matters=False,
                        deadline=self.state.time + TEMP_GOAL_BUDGET,
                        label="BackOff",
                    )
                )
                self._active_recovery = None
                self.nav_state = "Planning"
                self._event("back_off_goal", f"{target[0]:.3f} {target[1]:.3f}")
            return Twist()
        raise RuntimeError(f"unknown recovery behavior {beh!r}")

    def _pick_near_goal(self, local_cm):
        """Lowest-cost reachable cell within temp_goal_radius of the robot.

        Ties break toward the base goal, then by flat cell index, so the
        choice is deterministic.
        """
        radius = self.registry.get("recovery.temp_goal_radius")
        px, py = self.state.pose[:2]
        gx, gy, _ = self.goal_stack[0].pose
        best = None
        for iy in range(local_cm.height):
            for ix in range(local_cm.width):
                cx, cy = local_cm.cell_center(ix, iy)
                d = math.hypot(cx - px, cy - py)
                if d > radius or d < 2 * self.dwa_cfg.xy_goal_tolerance:
                    continue
                c = int(local_cm.cells[iy, ix])
                if c >= COST_INSCRIBED:
                    continue
                key = (c, math.hypot(cx - gx, cy - gy), iy * local_cm.width + ix)
                if best is None or key < best[0]:
                    best = (key, (cx, cy, self.state.pose[2]))
        return None if best is None else best[1]

    def _pick_back_off(self):
        d_back = self.registry.get("recovery.back_off_distance")
        px, py = self.state.pose[:2]
        for pose in reversed(self._ring):
            if math.hypot(pose[0] - px, pose[1] - py) >= d_back:
                return (pose[0], pose[1], pose[2])
        return None

    # ----- control --------------------------------------------------------

    def _rotate_to_goal_cmd(self, goal_pose, dt: float) -> Twist:
        err = _ang_diff(goal_pose[2], self.state.pose[2])
        window = dynamic_window(self.state.twist, self.limits, dt)
        omega = min(max(2.0 * err, window["omega"][0]), window["omega"][1])
        vx = min(max(0.0, window["vx"][0]), window["vx"][1])
        return Twist(vx=vx, omega=omega)

    def _check_stuck(self, dt: float) -> bool:
        t = self.state.time
        px, py = self.state.pose[:2]
        self._stuck_hist.append((t, px, py))
        window = self.registry.get("executive.stuck_window")
        while self._stuck_hist and self._stuck_hist[0][0] < t - window - 1e-9:
            self._stuck_hist.pop(0)
        if not self._stuck_hist or t - self._stuck_hist[0][0] < window - 1e-9:
            return False
        span = max(
            math.hypot(px - hx, py - hy) for _, hx, hy in self._stuck_hist
        )
        if span < self.dwa_cfg.oscillation_reset_dist:
            self._stuck_hist.clear()
            return True
        return False

    def _controlling_cmd(self, local_cm, dt: float):
        entry = self.active_goal
        cfg = self.dwa_cfg
        if entry.yaw_matters:
            status, entry.latched = goal_progress(
                self.state.pose, entry.pose, cfg, entry.latched
            )
        else:
            xy = math.hypot(
                entry.pose[0] - self.state.pose[0], entry.pose[1] - self.state.pose[1]
            )
            status = GoalStatus.REACHED if xy <= cfg.xy_goal_tolerance else GoalStatus.CRUISING
        if status is GoalStatus.REACHED:
            if entry.label == "goal":
                self.nav_state = "Reached"
                self._event("reached", "goal")
            else:
                self.goal_stack.pop()
                self._event("recovery_finished", entry.label)
                self.nav_state = "Planning"
            return Twist(), status, []
        if status is GoalStatus.ROTATE_TO_GOAL:
            return self._rotate_to_goal_cmd(entry.pose, dt), status, []
        if self.registry.get("executive.near_goal_retune") and entry.label == "goal":
            d = math.hypot(
                entry.pose[0] - self.state.pose[0], entry.pose[1] - self.state.pose[1]
            )
            if d < 1.0:
                cfg = DwaConfig(
                    **{
                        **cfg.__dict__,
                        "path_distance_bias": cfg.path_distance_bias * max(d, 0.1),
                    }
                )
        cmd, scored = choose_velocity(
            self.state.pose,
            self.state.twist,
            self.path.waypoints,
            local_cm,
            self.footprint,
            self.limits,
            cfg,
            self.oscillation,
        )
        before = self.oscillation.resets
        update_oscillation(self.oscillation, cmd, self.state.pose, cfg)
        self.metrics.oscillation_resets += self.oscillation.resets - before
        return cmd, status, scored

    # ----- the cycle ------------------------------------------------------

    def cycle(self) -> dict | None:
        """Run one control cycle; returns the encoded frame (if recording)."""
        if self.registry.revision != self._param_revision:
            self._refresh_configs()
        dt = 1.0 / self.dwa_cfg.controller_frequency
        global_cm, local_cm = self._sense_and_compose()
        cmd = Twist()
        scored: list = []
        status = None

        entry = self.active_goal
        if entry.deadline is not None and self.state.time > entry.deadline:
            self._trouble(f"{entry.label} budget exhausted")

        if self.nav_state == "Planning":
            try:
                self.path = plan(
                    global_cm, self.state.pose[:2], self.active_goal.pose[:2], self.global_cfg
                )
                self.last_plan_time = self.state.time
                self.nav_state = "Controlling"
                self._event("planned", f"{len(self.path.waypoints)} waypoints")
                if self.active_goal.label == "goal":
                    self.metrics.plans += 1
                    if self.metrics.plans == 1:
                        self.metrics.centering = path_centering(self.path, global_cm)
            except NoPathError as exc:
                self.metrics.plan_failures += 1
                self._trouble(f"no global path: {exc}")
        if self.nav_state == "Controlling":
            if self.state.time - self.last_plan_time >= self.registry.get(
                "executive.replan_period"
            ) - 1e-9:
                try:
                    self.path = plan(
                        global_cm,
                        self.state.pose[:2],
                        self.active_goal.pose[:2],
                        self.global_cfg,
                    )
                    self.last_plan_time = self.state.time
                    if self.active_goal.label == "goal":
                        self.metrics.plans += 1
                except NoPathError as exc:
                    self.metrics.plan_failures += 1
                    self._trouble(f"no global path: {exc}")
        if self.nav_state == "Controlling":
            try:
                cmd, status, scored = self._controlling_cmd(local_cm, dt)
            except PlannerFailure as exc:
                self._trouble(f"local planner failed: {exc}")
            else:
                if status is GoalStatus.CRUISING and self._check_stuck(dt):
                    self._trouble("stuck")
                    cmd = Twist()
        if self.nav_state.startswith("Recovering:"):
            cmd = self._run_recovery_cycle(local_cm, global_cm, dt)
        if self.nav_state in ("Reached", "Aborted"):
            cmd = Twist()

        # Every emitted command stays inside the dynamic window: an abrupt
        # stop request becomes a maximal deceleration over this cycle.  The
        # physics would ramp identically either way; clamping here keeps the
        # commanded stream itself acceleration-feasible.
        win = dynamic_window(self.state.twist, self.limits, dt)
        cmd = Twist(
            vx=min(max(cmd.vx, win["vx"][0]), win["vx"][1]),
            vy=min(max(cmd.vy, win["vy"][0]), win["vy"][1]),
            omega=min(max(cmd.omega, win["omega"][0]), win["omega"][1]),
        )

        # Physics: several fine substeps under the held command.
        prev = self.state.pose
        sub = dt / PHYSICS_SUBSTEPS
        for _ in range(PHYSICS_SUBSTEPS):
            self.state = step(self.state, cmd, self.limits, sub)
        moved = math.hypot(self.state.pose[0] - prev[0], self.state.pose[1] - prev[1])
        self.metrics.path_length += moved
        self.metrics.time = self.state.time
        last = self._ring[-1]
        if math.hypot(self.state.pose[0] - last[0], self.state.pose[1] - last[1]) >= RING_SPACING:
            self._ring.append(self.state.pose)
            if len(self._ring) > RING_CAPACITY:
                self._ring.pop(0)

        # Clearance bookkeeping from the local distance field.
        ix, iy = local_cm.world_to_cell(*self.state.pose[:2])
        if local_cm.in_bounds_cell(ix, iy) and local_cm.distance_to_lethal is not None:
            d = float(local_cm.distance_to_lethal[iy, ix])
            if math.isfinite(d):
                self.metrics.min_clearance = min(self.metrics.min_clearance, d)
        if local_cm.footprint_max_cost(self.footprint, self.state.pose) >= COST_INSCRIBED:
            self.metrics.footprint_violations += 1

        frame = None
        if self.record_frames:
            frame = self._encode_frame(local_cm, cmd, scored)
            self.frames.append(frame)
        self._pending_events = []
        self._seq += 1
        return frame

    def _encode_frame(self, local_cm, cmd: Twist, scored) -> dict:
        top = sorted(scored, key=lambda tr: (not tr.admissible, tr.total_cost))[:200]
        return {
            "seq": self._seq,
            "t": round(self.state.time, 6),
            "robot": {
                "x": self.state.pose[0],
                "y": self.state.pose[1],
                "theta": self.state.pose[2],
                "vx": self.state.twist.vx,
                "omega": self.state.twist.omega,
            },
            "state": self.nav_state,
            "goal": list(self.active_goal.pose),
            "cmd": {"vx": cmd.vx, "vy": cmd.vy, "omega": cmd.omega},
            "path": [[p[0], p[1]] for p in (self.path.waypoints if self.path else [])],
            "candidates": [
                {
                    "vx": tr.seed.vx,
                    "omega": tr.seed.omega,
                    "total_cost": tr.total_cost,
                    "admissible": tr.admissible,
                    "end": [tr.poses[-1][0], tr.poses[-1][1]],
                }
                for tr in top
            ],
            "costmap": self._encoder.encode(local_cm),
            "events": list(self._pending_events),
            "param_revision": self.registry.revision,
        }

    def run(self) -> RunMetrics:
        """Run the scenario to completion (or its time limit)."""
        while (
            self.nav_state not in ("Reached", "Aborted")
            and self.state.time < self.scenario.time_limit - 1e-9
        ):
            self.cycle()
        if self.nav_state == "Reached":
            self.metrics.outcome = "Reach"
        elif self.nav_state == "Aborted":
            self.metrics.outcome = "NoPath" if self.metrics.plans == 0 else "Abort"
        else:
            self.metrics.outcome = "Timeout"
        self.metrics.time = self.state.time
        return self.metrics
