"""Grid-based human-aware navigation.

A deliberately simple stand-in for an optimising local planner: global
shortest path on the inflated occupancy grid, then per-tick local re-planning
over a windowed cost map that adds a social cost around every perceived
human. Safety contract: the returned pose is never within d_safe of a human
track; holding position is always admissible and is the fallback.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import GoalBlocked, NoPath
from .geometry import Point, dist
from .svp.grid import OccupancyGrid

SQRT2 = math.sqrt(2.0)

# 8-connected neighbourhood in row-major order
_NEIGHBOURS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class NavConfig:
    robot_radius: float = 0.3
    d_safe: float = 0.5
    social_radius: float = 1.5
    social_weight: float = 4.0
    max_speed: float = 0.5
    control_period: float = 0.1
    window_cells: int = 14
    # extra clearance used when planning near humans, so that a human moving
    # at walking speed cannot close the gap below d_safe within a tick
    predictive_margin: float = 0.45

    def __post_init__(self):
        if self.d_safe <= 0:
            raise ValueError("d_safe must be positive")
        for v in (self.robot_radius, self.social_radius, self.max_speed, self.control_period):
            if v <= 0:
                raise ValueError("navigation parameters must be positive")


@dataclass(frozen=True)
class Path:
    poses: tuple[tuple[float, float, float], ...]
    total_length: float

    def points(self) -> list[Point]:
        return [(p[0], p[1]) for p in self.poses]


def inflate(grid: OccupancyGrid, radius: float) -> np.ndarray:
    """Blocked mask with every cell within `radius` of an obstacle marked.

    Cached on the grid object; grids never gain obstacles after loading.
    Callers treat the returned mask as read-only.
    """
    cache = getattr(grid, "_inflate_cache", None)
    if cache is None:
        cache = {}
        grid._inflate_cache = cache
    if radius in cache:
        return cache[radius]
    blocked = np.asarray(grid.blocked, dtype=bool)
    if radius <= 0.0 or not blocked.any():
        out = blocked.copy()
        cache[radius] = out
        return out
    r_cells = int(math.ceil(radius / grid.resolution))
    out = blocked.copy()
    h, w = blocked.shape
    offsets = [
        (dy, dx)
        for dy in range(-r_cells, r_cells + 1)
        for dx in range(-r_cells, r_cells + 1)
        if math.hypot(dx, dy) * grid.resolution <= radius + 1e-12
    ]
    ys, xs = np.nonzero(blocked)
    for y, x in zip(ys.tolist(), xs.tolist()):
        for dy, dx in offsets:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w:
                out[ny, nx] = True
    cache[radius] = out
    return out


def _dijkstra_cells(
    passable,
    start: tuple[int, int],
    goal: tuple[int, int],
    width: int,
    height: int,
    extra_cost=None,
) -> tuple[list[tuple[int, int]], int, int] | None:
    """Shortest 8-connected cell path; returns (cells, straights, diagonals).

    Priorities are (cost, cell index) so ties resolve in row-major order.
    extra_cost maps a cell to an additive non-negative cost for entering it.
    """
    sx, sy = start
    gx, gy = goal
    start_idx = sy * width + sx
    goal_idx = gy * width + gx
    dist: dict[int, float] = {start_idx: 0.0}
    prev: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, start_idx)]
    while heap:
        d, idx = heapq.heappop(heap)
        if d != dist.get(idx):
            continue
        if idx == goal_idx:
            break
        cy, cx = divmod(idx, width)
        for dy, dx in _NEIGHBOURS:
            ny, nx = cy + dy, cx + dx
            if not (0 <= ny < height and 0 <= nx < width):
                continue
            if not passable(nx, ny):
                continue
            nidx = ny * width + nx
            step = SQRT2 if dx != 0 and dy != 0 else 1.0
            nd = d + step + (extra_cost(nx, ny) if extra_cost is not None else 0.0)
            if nd < dist.get(nidx, math.inf):
                dist[nidx] = nd
                prev[nidx] = idx
                heapq.heappush(heap, (nd, nidx))
    if goal_idx not in dist:
        return None
    cells: list[tuple[int, int]] = []
    idx = goal_idx
    while True:
        cy, cx = divmod(idx, width)
        cells.append((cx, cy))
        if idx == start_idx:
            break
        idx = prev[idx]
    cells.reverse()
    straights = 0
    diagonals = 0
    for (x0, y0), (x1, y1) in zip(cells, cells[1:]):
        if x0 != x1 and y0 != y1:
            diagonals += 1
        else:
            straights += 1
    return cells, straights, diagonals


def plan_global(grid: OccupancyGrid, start: Point, goal: Point, config: NavConfig) -> Path:
    """Shortest 8-connected path over the radius-inflated grid."""
    blocked = inflate(grid, config.robot_radius)
    s = grid.cell_of(start)
    g = grid.cell_of(goal)
    if not grid.in_bounds(*g) or blocked[g[1], g[0]]:
        raise GoalBlocked(f"goal cell {g} is blocked")
    if not grid.in_bounds(*s) or blocked[s[1], s[0]]:
        raise NoPath(f"start cell {s} is blocked")
    if s == g:
        cx, cy = grid.center(*s)
        return Path(poses=((cx, cy, 0.0),), total_length=0.0)

    result = _dijkstra_cells(
        lambda x, y: not blocked[y, x], s, g, grid.width, grid.height,
    )
    if result is None:
        raise NoPath(f"no path from {s} to {g}")
    cells, straights, diagonals = result
    length = (straights + diagonals * SQRT2) * grid.resolution
    poses = _cells_to_poses(grid, cells)
    return Path(poses=tuple(poses), total_length=length)


def _cells_to_poses(grid: OccupancyGrid, cells: list[tuple[int, int]]) -> list[tuple[float, float, float]]:
    poses = []
    for i, (ix, iy) in enumerate(cells):
        cx, cy = grid.center(ix, iy)
        if i + 1 < len(cells):
            nx, ny = grid.center(*cells[i + 1])
            yaw = math.atan2(ny - cy, nx - cx)
        elif poses:
            yaw = poses[-1][2]
        else:
            yaw = 0.0
        poses.append((cx, cy, yaw))
    return poses


def step_local(
    pose: tuple[float, float, float],
    global_path: Path,
    humans: list[Point],
    grid: OccupancyGrid,
    config: NavConfig,
    dt: float,
) -> tuple[tuple[float, float, float], list[tuple[int, int]]]:
    """One control step: re-plan locally around the current humans, advance.

    Returns the next pose plus the local cell plan (possibly empty when
    holding). The hard d_safe constraint is enforced on the continuous pose;
    when every forward option violates it the robot holds position, and when
    pressed it retreats to the reachable cell farthest from the humans.
    """
    px, py, pyaw = pose
    blocked = inflate(grid, config.robot_radius)
    w, h = grid.width, grid.height
    cix, ciy = grid.cell_of((px, py))
    win = config.window_cells
    x_lo, x_hi = max(0, cix - win), min(w - 1, cix + win)
    y_lo, y_hi = max(0, ciy - win), min(h - 1, ciy + win)

    clearance = config.d_safe + config.predictive_margin

    def human_dist(x: float, y: float) -> float:
        if not humans:
            return math.inf
        return min(math.sqrt((x - hx) ** 2 + (y - hy) ** 2) for hx, hy in humans)

    def cell_passable(ix: int, iy: int) -> bool:
        if not (x_lo <= ix <= x_hi and y_lo <= iy <= y_hi) or blocked[iy, ix]:
            return False
        cx, cy = grid.center(ix, iy)
        return human_dist(cx, cy) > clearance

    def social_cost(ix: int, iy: int) -> float:
        if not humans:
            return 0.0
        cx, cy = grid.center(ix, iy)
        d = human_dist(cx, cy)
        if d >= config.social_radius:
            return 0.0
        return config.social_weight * (1.0 - d / config.social_radius)

    # local goal: the farthest global waypoint inside the window
    target_cell = None
    for gp in reversed(global_path.points()):
        gx, gy = grid.cell_of(gp)
        if x_lo <= gx <= x_hi and y_lo <= gy <= y_hi and cell_passable(gx, gy):
            target_cell = (gx, gy)
            break

    plan: list[tuple[int, int]] = []
    if target_cell is not None and cell_passable(cix, ciy):
        result = _dijkstra_cells(cell_passable, (cix, ciy), target_cell, w, h, extra_cost=social_cost)
        if result is not None:
            plan = result[0]

    at_plan_end = len(plan) == 1 and dist((px, py), grid.center(*plan[0])) <= 1e-9
    if not plan or at_plan_end:
        # no forward progress available: try to retreat if a human is inside
        # the clearance zone, otherwise hold
        if humans and human_dist(px, py) <= clearance:
            retreat = _retreat_cell(
                (cix, ciy), blocked, grid, humans, (x_lo, x_hi, y_lo, y_hi), config,
            )
            if retreat is not None and len(retreat) >= 2:
                plan = retreat
        if not plan or len(plan) < 2:
            return (px, py, pyaw), []

    nxt = _advance_along(grid, (px, py), plan, config.max_speed * dt)
    if humans and human_dist(nxt[0], nxt[1]) < config.d_safe:
        return (px, py, pyaw), plan  # hard stop: never close below d_safe
    yaw = math.atan2(nxt[1] - py, nxt[0] - px) if (nxt[0] != px or nxt[1] != py) else pyaw
    return (nxt[0], nxt[1], yaw), plan


def _retreat_cell(
    start: tuple[int, int],
    blocked,
    grid: OccupancyGrid,
    humans: list[Point],
    window: tuple[int, int, int, int],
    config: NavConfig,
) -> list[tuple[int, int]] | None:
    """BFS over statically-free cells toward the cell farthest from humans."""
    x_lo, x_hi, y_lo, y_hi = window

    def free(ix, iy):
        return x_lo <= ix <= x_hi and y_lo <= iy <= y_hi and not blocked[iy, ix]

    def hdist(ix, iy):
        cx, cy = grid.center(ix, iy)
        return min(math.sqrt((cx - hx) ** 2 + (cy - hy) ** 2) for hx, hy in humans)

    if not free(*start):
        return None
    seen = {start: None}
    frontier = [start]
    best = (hdist(*start), 0, start)
    depth = 0
    while frontier and depth < 6:
        depth += 1
        nxt_frontier = []
        for (cx, cy) in frontier:
            for dy, dx in _NEIGHBOURS:
                cell = (cx + dx, cy + dy)
                if cell in seen or not free(*cell):
                    continue
                seen[cell] = (cx, cy)
                nxt_frontier.append(cell)
                d = hdist(*cell)
                idx = cell[1] * grid.width + cell[0]
                cand = (d, -idx, cell)
                if cand > best:
                    best = cand
        frontier = nxt_frontier
    target = best[2]
    if target == start:
        return None
    cells = [target]
    while cells[-1] != start:
        cells.append(seen[cells[-1]])
    cells.reverse()
    return cells


def _advance_along(grid: OccupancyGrid, pos: Point, plan: list[tuple[int, int]], budget: float) -> Point:
    """Move up to `budget` metres along the polyline of cell centres."""
    x, y = pos
    skip_own = len(plan) > 1 and grid.cell_of(pos) == plan[0]
    for cell in plan[1:] if skip_own else plan:
        tx, ty = grid.center(*cell)
        seg = math.sqrt((tx - x) ** 2 + (ty - y) ** 2)
        if seg <= 1e-12:
            continue
        if seg >= budget:
            f = budget / seg
            return (x + f * (tx - x), y + f * (ty - y))
        x, y = tx, ty
        budget -= seg
    return (x, y)
