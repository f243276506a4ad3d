"""Global path planning: cost transform, Dijkstra/A* potentials, path
extraction (grid and gradient-interpolated) and the carrot fallback."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .costmap import COST_INSCRIBED, COST_LETHAL, COST_UNKNOWN, Costmap


class NoPathError(RuntimeError):
    pass


class PlannerInputError(ValueError):
    pass


@dataclass
class GlobalPlannerConfig:
    cost_factor: float = 0.55
    neutral_cost: float = 66.0
    lethal_cost: float = 253.0
    use_dijkstra: bool = True
    use_grid_path: bool = False
    allow_unknown: bool = True

    def __post_init__(self):
        if self.neutral_cost < 1:
            raise ValueError("neutral_cost must be >= 1")
        if not (1 <= self.lethal_cost <= 254):
            raise ValueError("lethal_cost must be in [1, 254]")
        if not (self.cost_factor > 0):
            raise ValueError("cost_factor must be > 0")


@dataclass
class Path:
    waypoints: list[tuple[float, float]]
    cost: float


@dataclass
class PotentialField:
    potentials: np.ndarray  # float64, inf where unreached
    start: tuple[int, int]
    expansions: int = 0

    def reached(self, ix: int, iy: int) -> bool:
        return math.isfinite(self.potentials[iy, ix])


def traversal_cost(value: int, cfg: GlobalPlannerConfig) -> float:
    """Planning cost of entering a cell, or inf when impassable."""
    if value in (COST_INSCRIBED, COST_LETHAL):
        return math.inf
    if value == COST_UNKNOWN:
        return cfg.lethal_cost - 1 if cfg.allow_unknown else math.inf
    if value >= cfg.lethal_cost:
        return math.inf
    return min(cfg.neutral_cost + cfg.cost_factor * value, cfg.lethal_cost - 1)


def _cost_grid(costmap: Costmap, cfg: GlobalPlannerConfig) -> np.ndarray:
    cells = costmap.cells.astype(np.float64)
    out = np.minimum(cfg.neutral_cost + cfg.cost_factor * cells, cfg.lethal_cost - 1)
    impassable = (cells == COST_INSCRIBED) | (cells == COST_LETHAL) | (cells >= cfg.lethal_cost)
    unknown = cells == COST_UNKNOWN
    if cfg.allow_unknown:
        out[unknown] = cfg.lethal_cost - 1
        impassable &= ~unknown
    else:
        impassable |= unknown
    out[impassable] = np.inf
    return out


def _propagate(costmap, start, cfg, goal=None, heuristic=False):
    w, h = costmap.width, costmap.height
    costs = _cost_grid(costmap, cfg)
    six, siy = start
    if not costmap.in_bounds_cell(six, siy):
        raise PlannerInputError("start outside map")
    if not math.isfinite(costs[siy, six]):
        raise PlannerInputError("start cell impassable")
    pot = np.full((h, w), np.inf)
    pot[siy, six] = 0.0
    done = np.zeros((h, w), dtype=bool)
    field_ = PotentialField(pot, (six, siy))

    def h_of(ix, iy):
        if not heuristic:
            return 0.0
        return cfg.neutral_cost * math.hypot(ix - goal[0], iy - goal[1])

    start_idx = siy * w + six
    heap = [(h_of(six, siy), start_idx)]
    while heap:
        f, idx = heapq.heappop(heap)
        iy, ix = divmod(idx, w)
        if done[iy, ix]:
            continue
        done[iy, ix] = True
        field_.expansions += 1
        if goal is not None and heuristic and (ix, iy) == tuple(goal):
            break
        p = pot[iy, ix]
        for nx, ny in ((ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1)):
            if not (0 <= nx < w and 0 <= ny < h) or done[ny, nx]:
                continue
            c = costs[ny, nx]
            if not math.isfinite(c):
                continue
            cand = p + c
            if cand < pot[ny, nx]:
                pot[ny, nx] = cand
                heapq.heappush(heap, (cand + h_of(nx, ny), ny * w + nx))
    return field_


def propagate_dijkstra(costmap: Costmap, start, cfg: GlobalPlannerConfig) -> PotentialField:
    """Full minimum cost-to-start field over 4-connected cells."""
    return _propagate(costmap, start, cfg)


def propagate_astar(costmap: Costmap, start, goal, cfg: GlobalPlannerConfig) -> PotentialField:
    """Best-first partial field; stops once the goal cell is finalized."""
    field_ = _propagate(costmap, start, cfg, goal=goal, heuristic=True)
    if not field_.reached(*goal):
        raise NoPathError("goal unreachable")
    return field_


_NEIGH4 = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _grid_descent(field_: PotentialField, goal) -> list[tuple[int, int]]:
    pot = field_.potentials
    h, w = pot.shape
    cur = tuple(goal)
    chain = [cur]
    guard = 4 * w * h
    while cur != field_.start and guard > 0:
        guard -= 1
        ix, iy = cur
        best = None
        best_pot = pot[iy, ix]
        for dx, dy in _NEIGH4:
            nx, ny = ix + dx, iy + dy
            if 0 <= nx < w and 0 <= ny < h and pot[ny, nx] < best_pot:
                best_pot = pot[ny, nx]
                best = (nx, ny)
            elif 0 <= nx < w and 0 <= ny < h and best is not None and pot[ny, nx] == best_pot:
                if ny * w + nx < best[1] * w + best[0]:
                    best = (nx, ny)
        if best is None:
            raise NoPathError("descent stalled before reaching the start")
        cur = best
        chain.append(cur)
    if cur != field_.start:
        raise NoPathError("descent did not reach the start")
    return chain


def _bilinear_pot(pot_f: np.ndarray, px: float, py: float) -> float:
    """Bilinear interpolation of the potential at fractional cell coords
    (px, py measured in cells from the map origin, cell centers at +0.5)."""
    h, w = pot_f.shape
    fx = min(max(px - 0.5, 0.0), w - 1.0)
    fy = min(max(py - 0.5, 0.0), h - 1.0)
    x0 = min(int(fx), w - 2) if w > 1 else 0
    y0 = min(int(fy), h - 2) if h > 1 else 0
    dx = fx - x0
    dy = fy - y0
    p00 = pot_f[y0, x0]
    p10 = pot_f[y0, min(x0 + 1, w - 1)]
    p01 = pot_f[min(y0 + 1, h - 1), x0]
    p11 = pot_f[min(y0 + 1, h - 1), min(x0 + 1, w - 1)]
    return (
        p00 * (1 - dx) * (1 - dy)
        + p10 * dx * (1 - dy)
        + p01 * (1 - dx) * dy
        + p11 * dx * dy
    )


def _interpolated_descent(field_: PotentialField, goal) -> list[tuple[float, float]]:
    """Gradient descent over the bilinear potential, 0.5-cell steps.

    Returns fractional cell coordinates from goal to start.  Falls back to a
    grid-descent step wherever the gradient stalls.
    """
    pot = field_.potentials
    h, w = pot.shape
    finite = pot[np.isfinite(pot)]
    cap = (finite.max() if finite.size else 0.0) * 1.5 + 1e4
    pot_f = np.where(np.isfinite(pot), pot, cap)

    sx, sy = field_.start
    pts = [(goal[0] + 0.5, goal[1] + 0.5)]
    cur = pts[0]
    guard = 8 * (w + h) * max(w, h)
    step = 0.5
    while guard > 0:
        guard -= 1
        if math.hypot(cur[0] - (sx + 0.5), cur[1] - (sy + 0.5)) <= 0.75:
            break
        # Central-difference gradient of the bilinear surface.
        eps = 0.25
        gx = (_bilinear_pot(pot_f, cur[0] + eps, cur[1]) - _bilinear_pot(pot_f, cur[0] - eps, cur[1])) / (2 * eps)
        gy = (_bilinear_pot(pot_f, cur[0], cur[1] + eps) - _bilinear_pot(pot_f, cur[0], cur[1] - eps)) / (2 * eps)
        gnorm = math.hypot(gx, gy)
        moved = False
        if gnorm > 1e-12:
            nxt = (cur[0] - step * gx / gnorm, cur[1] - step * gy / gnorm)
            if (
                0 <= nxt[0] < w
                and 0 <= nxt[1] < h
                and _bilinear_pot(pot_f, *nxt) < _bilinear_pot(pot_f, *cur) - 1e-12
            ):
                cur = nxt
                pts.append(cur)
                moved = True
        if not moved:
            # Stalled: take one steepest-descent grid step.
            ix = min(max(int(cur[0]), 0), w - 1)
            iy = min(max(int(cur[1]), 0), h - 1)
            best = None
            best_pot = pot_f[iy, ix]
            for dx, dy in _NEIGH4:
                nx, ny = ix + dx, iy + dy
                if 0 <= nx < w and 0 <= ny < h and pot_f[ny, nx] < best_pot:
                    best_pot = pot_f[ny, nx]
                    best = (nx, ny)
            if best is None:
                raise NoPathError("gradient descent stalled")
            cur = (best[0] + 0.5, best[1] + 0.5)
            pts.append(cur)
    pts.append((sx + 0.5, sy + 0.5))
    return pts


def extract_path(field_: PotentialField, goal, cfg: GlobalPlannerConfig, costmap: Costmap) -> Path:
    goal = tuple(goal)
    if not field_.reached(*goal):
        raise NoPathError("goal unreached in potential field")
    res = costmap.resolution
    ox, oy = costmap.origin
    if cfg.use_grid_path:
        chain = _grid_descent(field_, goal)
        wpts = [(ox + (ix + 0.5) * res, oy + (iy + 0.5) * res) for ix, iy in chain]
    else:
        chain = _interpolated_descent(field_, goal)
        wpts = [(ox + px * res, oy + py * res) for px, py in chain]
    wpts.reverse()  # start -> goal
    return Path(wpts, float(field_.potentials[goal[1], goal[0]]))


def plan(costmap: Costmap, start_xy, goal_xy, cfg: GlobalPlannerConfig) -> Path:
    """Full global plan: potential propagation plus path extraction."""
    if not costmap.in_bounds_world(*start_xy) or not costmap.in_bounds_world(*goal_xy):
        raise PlannerInputError("start or goal outside map")
    start = costmap.world_to_cell(*start_xy)
    goal = costmap.world_to_cell(*goal_xy)
    if start == goal:
        return Path([costmap.cell_center(*goal)], 0.0)
    if cfg.use_dijkstra:
        field_ = propagate_dijkstra(costmap, start, cfg)
        if not field_.reached(*goal):
            raise NoPathError("no path to goal")
    else:
        field_ = propagate_astar(costmap, start, goal, cfg)
    return extract_path(field_, goal, cfg, costmap)


def carrot_plan(costmap: Costmap, start_xy, goal_xy, cfg: GlobalPlannerConfig | None = None) -> Path:
    """Straight segment toward the goal, walking the goal back along the
    goal->start vector to the first passable point if needed."""
    cfg = cfg or GlobalPlannerConfig()
    if not costmap.in_bounds_world(*start_xy):
        raise PlannerInputError("start outside map")
    gx, gy = goal_xy
    sx, sy = start_xy
    dist = math.hypot(gx - sx, gy - sy)
    step = costmap.resolution / 2.0
    n = int(math.ceil(dist / step)) if dist > 0 else 0
    for i in range(n + 1):
        t = i / n if n else 0.0
        px = gx + (sx - gx) * t
        py = gy + (sy - gy) * t
        if not costmap.in_bounds_world(px, py):
            continue
        if math.isfinite(traversal_cost(costmap.cost_at_world(px, py), cfg)):
            return Path([(sx, sy), (px, py)], math.hypot(px - sx, py - sy))
    raise NoPathError("no passable point along the goal vector")
