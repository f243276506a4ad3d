"""Rendering of costmaps, paths and trajectory fans to image files.

Two output families, written side by side:

* raw portable images — P2 (grayscale costmap) and P3 (RGB overlays) —
  which are byte-deterministic and easy to golden-test;
* matplotlib figures (PNG) for human consumption in reports.
"""

from __future__ import annotations

import math
from pathlib import Path as FsPath

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .costmap import COST_INSCRIBED, COST_LETHAL, COST_UNKNOWN, Costmap, to_pgm

# Shared cost palette: free white, inflation gray ramp, inscribed orange,
# lethal red, unknown blue.
COLOR_FREE = (255, 255, 255)
COLOR_INSCRIBED = (255, 165, 0)
COLOR_LETHAL = (220, 40, 40)
COLOR_UNKNOWN = (90, 90, 230)
COLOR_PATH = (30, 160, 30)
COLOR_FAN = (80, 200, 220)
COLOR_CHOSEN = (200, 40, 200)
COLOR_ROBOT = (40, 40, 240)


def cost_rgb(cells: np.ndarray) -> np.ndarray:
    """Map cost cells to an RGB array (same shape + channel axis)."""
    out = np.empty((*cells.shape, 3), dtype=np.uint8)
    out[:] = COLOR_FREE
    scaled = (cells > 0) & (cells < COST_INSCRIBED)
    # 1..252 -> progressively darker gray
    g = (235 - cells[scaled].astype(np.int32) * 180 // 252).astype(np.uint8)
    out[scaled] = np.stack([g, g, g], axis=-1)
    out[cells == COST_INSCRIBED] = COLOR_INSCRIBED
    out[cells == COST_LETHAL] = COLOR_LETHAL
    out[cells == COST_UNKNOWN] = COLOR_UNKNOWN
    return out


def to_ppm(rgb: np.ndarray) -> str:
    """P3 plain-text image; row 0 of the file is the top (highest y)."""
    h, w, _ = rgb.shape
    lines = [f"P3 {w} {h} 255"]
    for iy in range(h - 1, -1, -1):
        lines.append(" ".join(str(int(v)) for v in rgb[iy].ravel()))
    return "\n".join(lines) + "\n"


def _stamp_world_points(rgb: np.ndarray, costmap: Costmap, points, color) -> None:
    for x, y in points:
        ix, iy = costmap.world_to_cell(x, y)
        if costmap.in_bounds_cell(ix, iy):
            rgb[iy, ix] = color


def _stamp_polyline(rgb, costmap, points, color, step=None):
    if len(points) < 2:
        _stamp_world_points(rgb, costmap, points, color)
        return
    step = step if step is not None else costmap.resolution / 2.0
    for (x0, y0), (x1, y1) in zip(points[:-1], points[1:]):
        d = math.hypot(x1 - x0, y1 - y0)
        n = max(1, int(math.ceil(d / step)))
        pts = [(x0 + (x1 - x0) * k / n, y0 + (y1 - y0) * k / n) for k in range(n + 1)]
        _stamp_world_points(rgb, costmap, pts, color)


def render_snapshot(
    costmap: Costmap,
    out_dir,
    prefix: str = "snapshot",
    path=None,
    candidates=None,
    chosen=None,
    robot=None,
    goal=None,
) -> list[str]:
    """Write the raw P2/P3 images and the matplotlib figure for one moment.

    Returns the list of file paths written.
    """
    out_dir = FsPath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    p2 = out_dir / f"{prefix}_costmap.pgm"
    p2.write_text(to_pgm(costmap.cells))
    written.append(str(p2))

    base = cost_rgb(costmap.cells)

    overlay = base.copy()
    if path:
        _stamp_polyline(overlay, costmap, path, COLOR_PATH)
    if goal is not None:
        _stamp_world_points(overlay, costmap, [goal[:2]], COLOR_CHOSEN)
    if robot is not None:
        _stamp_world_points(overlay, costmap, [robot[:2]], COLOR_ROBOT)
    p3 = out_dir / f"{prefix}_path.ppm"
    p3.write_text(to_ppm(overlay))
    written.append(str(p3))

    fan = base.copy()
    if candidates:
        for cand in candidates:
            pts = cand.get("poses") or [cand["end"]]
            _stamp_world_points(fan, costmap, [(p[0], p[1]) for p in pts], COLOR_FAN)
    if chosen:
        _stamp_world_points(fan, costmap, [(p[0], p[1]) for p in chosen], COLOR_CHOSEN)
    if robot is not None:
        _stamp_world_points(fan, costmap, [robot[:2]], COLOR_ROBOT)
    p3fan = out_dir / f"{prefix}_fan.ppm"
    p3fan.write_text(to_ppm(fan))
    written.append(str(p3fan))

    extent = [
        costmap.origin[0],
        costmap.origin[0] + costmap.width * costmap.resolution,
        costmap.origin[1],
        costmap.origin[1] + costmap.height * costmap.resolution,
    ]
    fig, ax = plt.subplots(figsize=(7, 7 * costmap.height / max(costmap.width, 1)))
    ax.imshow(base, origin="lower", extent=extent, interpolation="nearest")
    if path:
        xs = [p[0] for p in path]
        ys = [p[1] for p in path]
        ax.plot(xs, ys, color="tab:green", linewidth=1.5, label="global path")
    if candidates:
        for cand in candidates[:60]:
            ex, ey = cand["end"]
            ax.plot([ex], [ey], ".", color="tab:cyan", markersize=2)
    if robot is not None:
        ax.plot([robot[0]], [robot[1]], "o", color="tab:blue", label="robot")
    if goal is not None:
        ax.plot([goal[0]], [goal[1]], "*", color="tab:purple", markersize=10, label="goal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="upper right", fontsize=8)
    fig_path = out_dir / f"{prefix}_overview.png"
    fig.savefig(fig_path, dpi=110)
    plt.close(fig)
    written.append(str(fig_path))
    return written


def render_trace(frames: list[dict], grid, out_dir, prefix: str = "run") -> list[str]:
    """Matplotlib figure of the driven trace over the static map."""
    out_dir = FsPath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = [f["robot"]["x"] for f in frames]
    ys = [f["robot"]["y"] for f in frames]
    extent = [
        grid.origin[0],
        grid.origin[0] + grid.width * grid.resolution,
        grid.origin[1],
        grid.origin[1] + grid.height * grid.resolution,
    ]
    img = np.where(grid.cells == 1, 0, 255).astype(np.uint8)
    fig, ax = plt.subplots(figsize=(7, 7 * grid.height / max(grid.width, 1)))
    ax.imshow(img, cmap="gray", vmin=0, vmax=255, origin="lower", extent=extent)
    ax.plot(xs, ys, color="tab:blue", linewidth=1.2, label="trace")
    if frames:
        gx, gy = frames[-1]["goal"][0], frames[-1]["goal"][1]
        ax.plot([gx], [gy], "*", color="tab:purple", markersize=10, label="goal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.legend(loc="upper right", fontsize=8)
    out = out_dir / f"{prefix}_trace.png"
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return [str(out)]


def render_sweep(rows: list[dict], param: str, out_dir, prefix: str = "sweep") -> list[str]:
    """Metric-vs-value figure for a parameter sweep."""
    out_dir = FsPath(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values = [r["value"] for r in rows]
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    panels = [
        ("time", "run time (s)"),
        ("path_length", "path length (m)"),
        ("min_clearance", "min clearance (m)"),
        ("centering", "centering"),
    ]
    for ax, (key, label) in zip(axes.ravel(), panels):
        ax.plot(values, [r[key] for r in rows], "o-")
        ax.set_xlabel(param)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out = out_dir / f"{prefix}_{param.replace('.', '_')}.png"
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return [str(out)]
