import math

import numpy as np
import pytest

from navtune.costmap import (
    COST_FREE,
    COST_INSCRIBED,
    COST_LETHAL,
    COST_UNKNOWN,
    Costmap,
    InflationConfig,
    ObstacleLayerConfig,
    clear_overlay_outside,
    compose_costmap,
    inflate,
    inflation_cost,
    lethal_distance_field,
    obstacle_layer_update,
    to_pgm,
    window_crop,
)
from navtune.footprint import Footprint
from navtune.grid import OccupancyGrid
from navtune.world import LidarConfig, RobotState, scan

from conftest import grid_from_rows


def _brute_distance_field(lethal, resolution):
    h, w = lethal.shape
    out = np.full((h, w), np.inf)
    pts = np.argwhere(lethal)
    for iy in range(h):
        for ix in range(w):
            if len(pts):
                d = np.hypot(pts[:, 1] - ix, pts[:, 0] - iy).min()
                out[iy, ix] = d * resolution
    return out


def test_distance_field_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(5):
        lethal = rng.random((12, 15)) < 0.15
        got = lethal_distance_field(lethal, 0.05)
        want = _brute_distance_field(lethal, 0.05)
        assert np.allclose(got, want, atol=1e-12)


def test_distance_field_no_lethal_is_infinite():
    d = lethal_distance_field(np.zeros((4, 4), dtype=bool), 0.1)
    assert np.isinf(d).all()


def test_inflation_cost_bands():
    cfg = InflationConfig(inflation_radius=0.55, cost_scaling_factor=5.0)
    assert inflation_cost(0.0, 0.2, cfg) == COST_LETHAL
    assert inflation_cost(0.15, 0.2, cfg) == COST_INSCRIBED
    assert inflation_cost(0.2, 0.2, cfg) == COST_INSCRIBED
    d = 0.3
    want = math.floor(252.0 * math.exp(-5.0 * (d - 0.2)))
    assert inflation_cost(d, 0.2, cfg) == want
    assert inflation_cost(0.56, 0.2, cfg) == COST_FREE


def test_inflate_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    cfg = InflationConfig(inflation_radius=0.35, cost_scaling_factor=5.0)
    for _ in range(4):
        lethal = rng.random((10, 14)) < 0.1
        cells = np.where(lethal, COST_LETHAL, 0).astype(np.uint8)
        cm = Costmap(0.05, 14, 10, (0.0, 0.0), cells)
        out = inflate(cm, 0.1, cfg)
        dist = _brute_distance_field(lethal, 0.05)
        for iy in range(10):
            for ix in range(14):
                if lethal[iy, ix]:
                    want = COST_LETHAL
                else:
                    want = inflation_cost(dist[iy, ix], 0.1, cfg)
                assert out.cells[iy, ix] == want, (ix, iy)


def test_inflate_max_combines_with_existing():
    cells = np.zeros((5, 5), dtype=np.uint8)
    cells[2, 2] = COST_LETHAL
    cells[0, 0] = 200  # pre-existing cost higher than decay at that range
    cm = Costmap(0.1, 5, 5, (0.0, 0.0), cells)
    out = inflate(cm, 0.05, InflationConfig(0.2, 10.0))
    assert out.cells[0, 0] == 200


def test_cost_at_world_off_map_is_unknown():
    cm = Costmap(0.1, 5, 5)
    assert cm.cost_at_world(-1.0, 0.0) == COST_UNKNOWN


def test_footprint_max_cost_includes_off_map_as_unknown():
    cm = Costmap(0.1, 5, 5)
    fp = Footprint.rectangle(0.4, 0.4)
    assert cm.footprint_max_cost(fp, (0.05, 0.05, 0.0)) == COST_UNKNOWN
    assert cm.footprint_max_cost(fp, (0.25, 0.25, 0.0)) == 0


def test_footprint_max_cost_fast_path_agrees_with_slow():
    rows = ["#.........", "..........", "..........", ".....#....", ".........."]
    g = grid_from_rows(rows, resolution=0.2)
    fp = Footprint.rectangle(0.3, 0.2)
    cm = compose_costmap(g, None, None, InflationConfig(0.3, 5.0), fp)
    slow = cm.copy()
    slow.distance_to_nonfree = None  # disable the short-circuit
    for pose in [(1.0, 0.5, 0.3), (0.35, 0.85, 1.0), (1.5, 0.9, 2.0), (0.2, 0.2, 0.0)]:
        assert cm.footprint_max_cost(fp, pose) == slow.footprint_max_cost(fp, pose)


# ---------------------------------------------------------------------------
# Obstacle layer (marking / clearing through a simulated scan)
# ---------------------------------------------------------------------------


def _scan_overlay(rows, pose, beams=16, max_range=3.0):
    g = grid_from_rows(rows, resolution=0.1)
    overlay = np.zeros((g.height, g.width), dtype=np.uint8)
    sc = scan(g, RobotState(pose=pose), LidarConfig(beam_count=beams, max_range=max_range))
    obstacle_layer_update(overlay, sc, ObstacleLayerConfig(2.5, 3.0, 0.6))
    return g, overlay


def test_obstacle_layer_marks_hit_cells():
    rows = [
        "..........",
        "......#...",
        "..........",
        "..........",
    ]
    g, overlay = _scan_overlay(rows, (0.25, 0.25, 0.0))
    iy = 4 - 1 - 1  # text row 1 -> iy 2
    assert overlay[iy, 6] == COST_LETHAL


def test_obstacle_layer_clears_along_beam():
    rows = ["..........", "..........", "..........", ".........."]
    g = grid_from_rows(rows, resolution=0.1)
    overlay = np.zeros((g.height, g.width), dtype=np.uint8)
    overlay[2, 5] = COST_LETHAL  # stale mark with nothing actually there
    sc = scan(g, RobotState(pose=(0.15, 0.25, 0.0)), LidarConfig(beam_count=32, max_range=3.0))
    obstacle_layer_update(overlay, sc, ObstacleLayerConfig(2.5, 3.0, 0.6))
    assert overlay[2, 5] == COST_FREE


def test_obstacle_layer_does_not_mark_beyond_obstacle_range():
    rows = ["." * 40, "." * 40, "." * 39 + "#", "." * 40]
    g = grid_from_rows(rows, resolution=0.1)
    overlay = np.zeros((g.height, g.width), dtype=np.uint8)
    # obstacle ~3.9 m away, farther than obstacle_range 2.5
    sc = scan(g, RobotState(pose=(0.05, 0.15, 0.0)), LidarConfig(beam_count=4, max_range=6.0))
    obstacle_layer_update(overlay, sc, ObstacleLayerConfig(2.5, 3.0, 0.6))
    assert (overlay == COST_FREE).all()


def test_clear_overlay_outside_radius():
    cm = Costmap(0.1, 10, 10)
    overlay = np.full((10, 10), 0, dtype=np.uint8)
    overlay[9, 9] = COST_LETHAL
    overlay[5, 5] = COST_LETHAL
    clear_overlay_outside(overlay, cm, (0.55, 0.55), 0.3)
    assert overlay[5, 5] == COST_LETHAL  # 0 m away
    assert overlay[9, 9] == COST_FREE  # ~0.57 m away


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def test_compose_unknown_propagates_and_lethal_wins():
    rows = ["?.#", "...", "..."]
    g = grid_from_rows(rows, resolution=0.1)
    fp = Footprint.rectangle(0.1, 0.1)
    overlay = np.zeros((3, 3), dtype=np.uint8)
    overlay[0, 0] = COST_LETHAL
    cm = compose_costmap(g, overlay, None, InflationConfig(0.0, 5.0), fp)
    assert cm.cells[2, 0] == COST_UNKNOWN  # '?' cell, top row
    assert cm.cells[2, 2] == COST_LETHAL  # '#'
    assert cm.cells[0, 0] == COST_LETHAL  # overlay wins over free static


def test_compose_inflates_overlay_obstacles_too():
    rows = ["...", "...", "..."]
    g = grid_from_rows(rows, resolution=0.1)
    fp = Footprint.rectangle(0.1, 0.1)
    overlay = np.zeros((3, 3), dtype=np.uint8)
    overlay[1, 1] = COST_LETHAL
    cm = compose_costmap(g, overlay, None, InflationConfig(0.3, 1.0), fp)
    assert cm.cells[1, 1] == COST_LETHAL
    assert cm.cells[0, 1] > 0  # inflated neighbor


def test_compose_rejects_mismatched_overlay():
    g = grid_from_rows(["...", "..."], resolution=0.1)
    with pytest.raises(ValueError, match="dimensions"):
        compose_costmap(
            g,
            np.zeros((3, 3), dtype=np.uint8),
            None,
            InflationConfig(0.1, 1.0),
            Footprint.rectangle(0.1, 0.1),
        )


def test_window_crop_clips_to_map():
    g = OccupancyGrid(0.1, 20, 10)
    x0, y0, x1, y1 = window_crop(g, (0.0, 0.0), 1.0)
    assert (x0, y0) == (0, 0)
    x0, y0, x1, y1 = window_crop(g, (1.05, 0.55), 0.6)
    assert (x0, y0, x1, y1) == (7, 2, 14, 9)
    x0, y0, x1, y1 = window_crop(g, (1.95, 0.95), 1.0)
    assert (x1, y1) == (20, 10)


def test_to_pgm_format():
    cells = np.array([[0, 128], [255, 254]], dtype=np.uint8)
    text = to_pgm(cells)
    lines = text.strip().splitlines()
    assert lines[0].startswith("P2")
    # top output row is the highest-y row
    assert lines[-2].split() == ["255", "254"]
    assert lines[-1].split() == ["0", "128"]
