"""DWA local planner: dynamic window, velocity sampling, arc simulation,
three-term scoring, goal tolerance and oscillation filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .costmap import COST_INSCRIBED, Costmap
from .footprint import Footprint


class PlannerFailure(RuntimeError):
    """No admissible trajectory survived filtering."""


@dataclass(frozen=True)
class Twist:
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.vx, self.vy, self.omega)):
            raise ValueError("twist components must be finite")


@dataclass
class VelocityLimits:
    min_vel_x: float = -0.2
    max_vel_x: float = 1.4
    min_vel_y: float = 0.0
    max_vel_y: float = 0.0
    min_vel_theta: float = -1.0  # stored signed; sampling uses |min_vel_theta|
    max_vel_theta: float = 1.0
    acc_lim_x: float = 2.5
    acc_lim_y: float = 2.5
    acc_lim_theta: float = 3.2

    def __post_init__(self):
        if self.max_vel_x < self.min_vel_x or self.max_vel_y < self.min_vel_y:
            raise ValueError("max velocity below min velocity")
        if min(self.acc_lim_x, self.acc_lim_y, self.acc_lim_theta) <= 0:
            raise ValueError("acceleration limits must be > 0")

    @property
    def omega_bounds(self) -> tuple[float, float]:
        return (-abs(self.min_vel_theta), self.max_vel_theta)


@dataclass
class DwaConfig:
    sim_time: float = 4.0
    sim_granularity: float = 0.025  # max spacing (m) between simulated poses
    vx_samples: int = 20
    vy_samples: int = 1
    vth_samples: int = 40
    path_distance_bias: float = 32.0
    goal_distance_bias: float = 20.0
    occdist_scale: float = 0.02
    controller_frequency: float = 10.0
    xy_goal_tolerance: float = 0.10
    yaw_goal_tolerance: float = 0.05
    latch_xy_goal_tolerance: bool = False
    oscillation_reset_dist: float = 0.05

    def __post_init__(self):
        if self.sim_time <= 0 or self.sim_granularity <= 0:
            raise ValueError("sim_time and sim_granularity must be > 0")
        if min(self.vx_samples, self.vy_samples, self.vth_samples) < 1:
            raise ValueError("sample counts must be >= 1")
        if min(self.path_distance_bias, self.goal_distance_bias, self.occdist_scale) < 0:
            raise ValueError("weights must be >= 0")
        if self.controller_frequency <= 0:
            raise ValueError("controller_frequency must be > 0")


@dataclass
class Trajectory:
    seed: Twist
    poses: list[tuple[float, float, float]]
    path_dist: float = 0.0
    goal_dist: float = 0.0
    max_obstacle_cost: int = 0
    total_cost: float = 0.0
    admissible: bool = True
    sample_index: int = -1


@dataclass
class OscillationState:
    rot_sign: int = 0  # +1 / -1 once a rotation direction is taken
    trans_sign: int = 0
    anchor: tuple[float, float] | None = None
    resets: int = 0

    def allows(self, tw: Twist) -> bool:
        if self.rot_sign and tw.omega * self.rot_sign < 0:
            return False
        if self.trans_sign and tw.vx * self.trans_sign < 0:
            return False
        return True


class GoalStatus(Enum):
    CRUISING = "Cruising"
    ROTATE_TO_GOAL = "RotateToGoal"
    REACHED = "Reached"


def dynamic_window(current: Twist, limits: VelocityLimits, dt: float) -> dict:
    """Reachable (min, max) interval per axis within one control interval."""
    if dt <= 0:
        raise ValueError("dt must be > 0")

    def axis(v, lo, hi, a):
        wlo = max(lo, v - a * dt)
        whi = min(hi, v + a * dt)
        if wlo > whi:  # current velocity outside static bounds: clamp
            wlo = whi = min(max(v, lo), hi)
        return (wlo, whi)

    olo, ohi = limits.omega_bounds
    return {
        "vx": axis(current.vx, limits.min_vel_x, limits.max_vel_x, limits.acc_lim_x),
        "vy": axis(current.vy, limits.min_vel_y, limits.max_vel_y, limits.acc_lim_y),
        "omega": axis(current.omega, olo, ohi, limits.acc_lim_theta),
    }


def _axis_samples(lo: float, hi: float, n: int) -> list[float]:
    if hi - lo < 1e-12 or n == 1:
        return [(lo + hi) / 2.0]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def sample_velocities(window: dict, cfg: DwaConfig) -> list[Twist]:
    """Cartesian product of uniform per-axis grids (endpoints included)."""
    vxs = _axis_samples(*window["vx"], cfg.vx_samples)
    vys = _axis_samples(*window["vy"], max(cfg.vy_samples, 1))
    oms = _axis_samples(*window["omega"], cfg.vth_samples)
    return [Twist(vx, vy, om) for vx in vxs for vy in vys for om in oms]


def propagate_pose(pose, tw: Twist, dt: float) -> tuple[float, float, float]:
    """Exact constant-twist (arc) propagation of a pose over dt."""
    x, y, th = pose
    if abs(tw.omega) < 1e-12:
        c, s = math.cos(th), math.sin(th)
        return (x + (tw.vx * c - tw.vy * s) * dt, y + (tw.vx * s + tw.vy * c) * dt, th)
    th1 = th + tw.omega * dt
    # Integral of R(th + w t) @ (vx, vy) over [0, dt].
    dxb = (math.sin(th1) - math.sin(th)) / tw.omega
    dyb = (math.cos(th) - math.cos(th1)) / tw.omega
    return (x + tw.vx * dxb - tw.vy * dyb, y + tw.vx * dyb + tw.vy * dxb, th1)


def simulate_trajectory(start_pose, seed: Twist, cfg: DwaConfig) -> Trajectory:
    """Forward-simulate a constant twist as an exact arc.

    The step interval keeps consecutive poses at most sim_granularity apart
    (linear spacing, or angular spacing for in-place rotation).
    """
    # Bound the step by whichever motion is faster; a slow-creep twist with a
    # large omega still sweeps the footprint through a wide angular range.
    rate = max(math.hypot(seed.vx, seed.vy), abs(seed.omega))
    dt_step = cfg.sim_granularity / rate if rate > 1e-12 else cfg.sim_time
    n = max(1, int(math.ceil(cfg.sim_time / dt_step - 1e-9)))
    dt_step = cfg.sim_time / n
    # Propagate from the start each time: exact closed form, no drift.
    x, y, th = start_pose
    ts = dt_step * np.arange(1, n + 1)
    if abs(seed.omega) < 1e-12:
        c, s = math.cos(th), math.sin(th)
        xs = x + (seed.vx * c - seed.vy * s) * ts
        ys = y + (seed.vx * s + seed.vy * c) * ts
        ths = np.full(n, th)
    else:
        ths = th + seed.omega * ts
        dxb = (np.sin(ths) - math.sin(th)) / seed.omega
        dyb = (math.cos(th) - np.cos(ths)) / seed.omega
        xs = x + seed.vx * dxb - seed.vy * dyb
        ys = y + seed.vx * dyb + seed.vy * dxb
    poses = [tuple(start_pose)]
    poses.extend(zip(xs.tolist(), ys.tolist(), ths.tolist()))
    return Trajectory(seed=seed, poses=poses)


def point_segment_distance(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom <= 0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def distance_to_path(p, waypoints) -> float:
    if len(waypoints) == 1:
        return math.hypot(p[0] - waypoints[0][0], p[1] - waypoints[0][1])
    return min(
        point_segment_distance(p, waypoints[i], waypoints[i + 1])
        for i in range(len(waypoints) - 1)
    )


def _poses_needing_check(poses, costmap: Costmap, fp: Footprint):
    """Indexes of poses whose footprint might see nonzero cost, in order.

    Poses whose cell sits farther from any costed cell (and from the map
    border) than the circumscribed radius plus one cell are provably free,
    so the expensive polygon rasterization is skipped for them.
    """
    dist = costmap.distance_to_nonfree
    if dist is None:
        return range(len(poses))
    arr = np.asarray(poses, dtype=float)
    res = costmap.resolution
    ixs = np.floor((arr[:, 0] - costmap.origin[0]) / res).astype(int)
    iys = np.floor((arr[:, 1] - costmap.origin[1]) / res).astype(int)
    inb = (ixs >= 0) & (ixs < costmap.width) & (iys >= 0) & (iys < costmap.height)
    _, circumscribed = fp.radii()
    margin = circumscribed + res
    safe = np.zeros(len(poses), dtype=bool)
    if inb.any():
        di = dist[iys[inb], ixs[inb]]
        border_ok = (
            ((ixs[inb] + 1) * res > margin)
            & ((iys[inb] + 1) * res > margin)
            & ((costmap.width - ixs[inb]) * res > margin)
            & ((costmap.height - iys[inb]) * res > margin)
        )
        safe[np.flatnonzero(inb)] = (di > margin) & border_ok
    return np.flatnonzero(~safe)


def score_trajectory(
    traj: Trajectory,
    path_waypoints,
    local_goal,
    costmap: Costmap,
    fp: Footprint,
    cfg: DwaConfig,
) -> Trajectory:
    """Score per the weighted three-term cost; flags footprint collisions."""
    end = traj.poses[-1]
    traj.path_dist = distance_to_path((end[0], end[1]), path_waypoints)
    traj.goal_dist = math.hypot(end[0] - local_goal[0], end[1] - local_goal[1])
    worst = 0
    admissible = True
    for k in _poses_needing_check(traj.poses, costmap, fp):
        c = costmap.footprint_max_cost(fp, traj.poses[k])
        if c >= COST_INSCRIBED:
            admissible = False
            worst = max(worst, c)
            break
        worst = max(worst, c)
    traj.max_obstacle_cost = worst
    traj.admissible = admissible
    traj.total_cost = (
        cfg.path_distance_bias * traj.path_dist
        + cfg.goal_distance_bias * traj.goal_dist
        + cfg.occdist_scale * traj.max_obstacle_cost
    )
    return traj


def local_goal_on_path(path_waypoints, costmap: Costmap):
    """Farthest path waypoint (by path order) inside the costmap window."""
    goal = None
    for wp in path_waypoints:
        if costmap.in_bounds_world(wp[0], wp[1]):
            goal = wp
    return goal if goal is not None else path_waypoints[-1]


def choose_velocity(
    pose,
    current: Twist,
    path_waypoints,
    costmap: Costmap,
    fp: Footprint,
    limits: VelocityLimits,
    cfg: DwaConfig,
    oscillation: OscillationState | None = None,
) -> tuple[Twist, list[Trajectory]]:
    """Minimum-cost admissible velocity over the sampled dynamic window.

    Returns the chosen twist plus every scored trajectory (for debugging
    and streaming).  Raises PlannerFailure when nothing is admissible.
    """
    window = dynamic_window(current, limits, 1.0 / cfg.controller_frequency)
    samples = sample_velocities(window, cfg)
    local_goal = local_goal_on_path(path_waypoints, costmap)
    best = None
    scored: list[Trajectory] = []
    for i, tw in enumerate(samples):
        if oscillation is not None and not oscillation.allows(tw):
            continue
        traj = simulate_trajectory(pose, tw, cfg)
        traj.sample_index = i
        score_trajectory(traj, path_waypoints, local_goal, costmap, fp, cfg)
        scored.append(traj)
        if traj.admissible and (best is None or traj.total_cost < best.total_cost):
            best = traj
    if best is None:
        raise PlannerFailure("all sampled trajectories inadmissible")
    return best.seed, scored


def goal_progress(pose, goal_pose, cfg: DwaConfig, latched: bool) -> tuple[GoalStatus, bool]:
    """Goal-tolerance state machine; returns (status, updated latch flag)."""
    dx = goal_pose[0] - pose[0]
    dy = goal_pose[1] - pose[1]
    xy_ok = math.hypot(dx, dy) <= cfg.xy_goal_tolerance
    if cfg.latch_xy_goal_tolerance:
        latched = latched or xy_ok
        xy_ok = latched
    if not xy_ok:
        return GoalStatus.CRUISING, latched
    yaw_err = abs(_ang_diff(goal_pose[2], pose[2]))
    if yaw_err <= cfg.yaw_goal_tolerance:
        return GoalStatus.REACHED, latched
    return GoalStatus.ROTATE_TO_GOAL, latched


def _ang_diff(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    if d > math.pi:
        d -= 2 * math.pi
    return d


def update_oscillation(state: OscillationState, chosen: Twist, pose, cfg: DwaConfig) -> OscillationState:
    """Latch direction flags on the chosen twist; reset after enough travel."""
    p = (pose[0], pose[1])
    if state.anchor is not None:
        if math.hypot(p[0] - state.anchor[0], p[1] - state.anchor[1]) >= cfg.oscillation_reset_dist:
            if state.rot_sign or state.trans_sign:
                state.resets += 1
            state.rot_sign = 0
            state.trans_sign = 0
            state.anchor = None
    if chosen.omega > 0 and state.rot_sign == 0:
        state.rot_sign = 1
        state.anchor = state.anchor or p
    elif chosen.omega < 0 and state.rot_sign == 0:
        state.rot_sign = -1
        state.anchor = state.anchor or p
    if chosen.vx > 0 and state.trans_sign == 0:
        state.trans_sign = 1
        state.anchor = state.anchor or p
    elif chosen.vx < 0 and state.trans_sign == 0:
        state.trans_sign = -1
        state.anchor = state.anchor or p
    return state
