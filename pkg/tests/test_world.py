import math

import pytest

from navtune.dwa import Twist, VelocityLimits
from navtune.world import (
    CalibrationError,
    DynamicObstacle,
    LidarConfig,
    OdomSample,
    RobotState,
    ScanError,
    Scenario,
    calibrate_from_odom,
    load_odom_csv,
    load_scenario,
    normalize_angle,
    scan,
    step,
)

from conftest import grid_from_rows

LIMITS = VelocityLimits(
    min_vel_x=-0.2,
    max_vel_x=0.55,
    min_vel_theta=-1.0,
    max_vel_theta=1.0,
    acc_lim_x=2.5,
    acc_lim_theta=3.2,
)


def test_normalize_angle_range():
    for a in (-7.0, -math.pi, 0.0, math.pi, 9.2, 100.0):
        n = normalize_angle(a)
        assert -math.pi < n <= math.pi
        assert math.isclose(math.sin(n), math.sin(a), abs_tol=1e-12)
        assert math.isclose(math.cos(n), math.cos(a), abs_tol=1e-12)


# ---------------------------------------------------------------------------
# step: acceleration clamping and kinematics
# ---------------------------------------------------------------------------


def test_step_accelerates_toward_command():
    s = RobotState()
    s = step(s, Twist(vx=0.55), LIMITS, 0.1)
    assert s.twist.vx == pytest.approx(0.25)  # 2.5 m/s^2 * 0.1 s
    assert s.time == pytest.approx(0.1)


def test_step_clamps_command_to_limits():
    s = RobotState(twist=Twist(vx=0.5))
    s = step(s, Twist(vx=5.0), LIMITS, 1.0)
    assert s.twist.vx == LIMITS.max_vel_x


def test_step_decelerates_within_limit():
    s = RobotState(twist=Twist(vx=0.5))
    s = step(s, Twist(vx=0.0), LIMITS, 0.1)
    assert s.twist.vx == pytest.approx(0.25)


def test_step_straight_motion():
    s = RobotState(twist=Twist(vx=0.4))
    s = step(s, Twist(vx=0.4), LIMITS, 0.5)
    assert s.pose[0] == pytest.approx(0.2)
    assert s.pose[1] == 0.0


def test_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        step(RobotState(), Twist(), LIMITS, 0.0)


# ---------------------------------------------------------------------------
# scan: ray casting against the grid
# ---------------------------------------------------------------------------


def test_scan_range_matches_geometry():
    rows = [
        "..........",
        "..........",
        ".....#....",
        "..........",
        "..........",
    ]
    g = grid_from_rows(rows, resolution=0.1)
    st = RobotState(pose=(0.15, 0.25, 0.0))
    out = scan(g, st, LidarConfig(beam_count=1, field_of_view=1e-6, max_range=5.0))
    ray = out.rays[0]
    # wall cell spans x in [0.5, 0.6): entry at 0.5 - 0.15 = 0.35
    assert ray["range"] == pytest.approx(0.35)
    assert ray["hit"] is not None


def test_scan_miss_returns_max_range():
    g = grid_from_rows(["....", "....", "....", "...."], resolution=0.1)
    st = RobotState(pose=(0.05, 0.05, math.pi / 4))
    out = scan(g, st, LidarConfig(beam_count=1, field_of_view=1e-6, max_range=9.0))
    assert out.rays[0]["hit"] is None
    assert out.rays[0]["range"] == 9.0


def test_scan_full_circle_no_duplicate_endpoint():
    g = grid_from_rows(["....", "....", "....", "...."], resolution=0.1)
    st = RobotState(pose=(0.2, 0.2, 0.0))
    out = scan(g, st, LidarConfig(beam_count=8, max_range=2.0))
    angs = [normalize_angle(r["angle"]) for r in out.rays]
    assert len({round(a, 9) for a in angs}) == 8


def test_scan_sensor_inside_wall_raises():
    g = grid_from_rows(["#..."], resolution=0.1)
    with pytest.raises(ScanError):
        scan(g, RobotState(pose=(0.05, 0.05, 0.0)), LidarConfig(beam_count=4))


def test_scan_sensor_off_map_raises():
    g = grid_from_rows(["...."], resolution=0.1)
    with pytest.raises(ScanError):
        scan(g, RobotState(pose=(-1.0, 0.0, 0.0)), LidarConfig(beam_count=4))


def test_lidar_config_validation():
    with pytest.raises(ValueError):
        LidarConfig(beam_count=0)
    with pytest.raises(ValueError):
        LidarConfig(field_of_view=7.0)


# ---------------------------------------------------------------------------
# Calibration from odometry logs
# ---------------------------------------------------------------------------


def _ramp_log(v_max, a, omega_max=0.0, a_r=0.0, dt=0.01, hold=1.0):
    rows = []
    t = 0.0
    x = 0.0
    th = 0.0
    v = 0.0
    w = 0.0
    t_ramp = v_max / a if a else 0.0
    t_ramp_r = omega_max / a_r if a_r else 0.0
    end = max(t_ramp, t_ramp_r) + hold
    while t <= end + 1e-9:
        v = min(v_max, a * t) if a else 0.0
        w = min(omega_max, a_r * t) if a_r else 0.0
        rows.append(OdomSample(t, x, 0.0, th, v, w))
        x += v * dt
        th += w * dt
        t += dt
    return rows


def test_calibrate_recovers_limits_within_tolerance():
    log = _ramp_log(0.5, 1.0, omega_max=1.2, a_r=2.4, dt=0.001)
    got = calibrate_from_odom(log)
    assert got["v_max"] == pytest.approx(0.5, rel=0.02)
    assert got["omega_max"] == pytest.approx(1.2, rel=0.02)
    assert got["a_t_max"] == pytest.approx(1.0, rel=0.02)
    assert got["a_r_max"] == pytest.approx(2.4, rel=0.02)


def test_calibrate_translation_only_leaves_rotation_null():
    got = calibrate_from_odom(_ramp_log(0.5, 1.0))
    assert got["a_r_max"] is None
    assert got["omega_max"] == 0.0


def test_calibrate_rejects_constant_motion():
    log = [OdomSample(t * 0.1, t * 0.05, 0, 0, 0.5, 0.0) for t in range(20)]
    with pytest.raises(CalibrationError):
        calibrate_from_odom(log)


def test_calibrate_rejects_nonmonotonic_time():
    log = [OdomSample(0.0, 0, 0, 0, 0, 0), OdomSample(0.0, 0, 0, 0, 0.1, 0)]
    with pytest.raises(CalibrationError):
        calibrate_from_odom(log)


def test_load_odom_csv_header_and_errors():
    text = "t,x,y,theta,vx,omega\n0.0,0,0,0,0,0\n0.1,0.01,0,0,0.1,0\n"
    log = load_odom_csv(text)
    assert len(log) == 2 and log[1].vx == 0.1
    with pytest.raises(CalibrationError):
        load_odom_csv("0.0,1,2\n")
    with pytest.raises(CalibrationError):
        load_odom_csv("t,x,y,theta,vx,omega\n")


# ---------------------------------------------------------------------------
# Scenario files and dynamic obstacles
# ---------------------------------------------------------------------------


MAP_TEXT = "resolution 0.1\norigin 0 0\n......\n......\n......\n......\n"


def test_load_scenario_full(tmp_path):
    (tmp_path / "m.map").write_text(MAP_TEXT)
    text = (
        "map m.map\n"
        "start 0.1 0.1 0\n"
        "goal 0.5 0.3 1.57\n"
        "time_limit 30\n"
        "expect RecoveryThenReach\n"
        "obstacle 0.2 0.2 0.3 0.3 1.0 5.0\n"
        "mark 0.4 0.1\n"
        "footprint -0.1 -0.1 0.1 -0.1 0.0 0.1\n"
        "dwa.sim_time 2.5\n"
    )
    sc = load_scenario(text, base_dir=tmp_path)
    assert sc.time_limit == 30
    assert sc.expect == "RecoveryThenReach"
    assert sc.obstacles[0].t_remove == 5.0
    assert sc.marks == [(0.4, 0.1)]
    assert sc.footprint == [(-0.1, -0.1), (0.1, -0.1), (0.0, 0.1)]
    assert sc.overrides == {"dwa.sim_time": "2.5"}


def test_load_scenario_missing_keys(tmp_path):
    with pytest.raises(ValueError, match="map"):
        load_scenario("start 0 0\ngoal 1 1\n", base_dir=tmp_path)


def test_load_scenario_bad_expect(tmp_path):
    (tmp_path / "m.map").write_text(MAP_TEXT)
    with pytest.raises(ValueError, match="outcome"):
        load_scenario("map m.map\nstart 0.1 0.1\ngoal 0.2 0.2\nexpect Fly\n", base_dir=tmp_path)


def test_scenario_start_outside_map_raises():
    g = grid_from_rows(["...."], resolution=0.1)
    with pytest.raises(ValueError, match="outside"):
        Scenario(grid=g, start=(5.0, 5.0, 0.0), goal=(0.1, 0.05, 0.0))


def test_effective_grid_obstacle_window():
    g = grid_from_rows(["....", "....", "....", "...."], resolution=0.1)
    sc = Scenario(
        grid=g,
        start=(0.05, 0.05, 0.0),
        goal=(0.35, 0.35, 0.0),
        obstacles=[DynamicObstacle(0.1, 0.1, 0.3, 0.3, t_add=2.0, t_remove=4.0)],
    )
    assert sc.effective_grid(0.0).cells.sum() == 0
    mid = sc.effective_grid(3.0)
    assert mid.cells[1:3, 1:3].all()
    assert sc.effective_grid(4.0).cells.sum() == 0
    # the static grid itself is never mutated
    assert g.cells.sum() == 0
