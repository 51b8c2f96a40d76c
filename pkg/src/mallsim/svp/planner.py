"""Shared-visual-perspective placement search and pointing geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DegenerateTarget, NoRobotPose, NoSharedPerspective
from ..geometry import Point, angular_offset, bearing
from .grid import OccupancyGrid, VisibilityGrid


@dataclass(frozen=True)
class SvpConfig:
    samples_per_landmark: int = 8
    v_min: float = 0.8
    travel_weight: float = 0.05   # beta, per metre of human travel
    visibility_weight: float = 1.0  # alpha
    robot_distance_min: float = 1.0
    robot_distance_max: float = 2.0
    conformation_max_angle: float = 2.1  # phi_max
    shoulder_height: float = 1.0

    def __post_init__(self):
        if self.samples_per_landmark < 1:
            raise ValueError("need at least one landmark sample point")
        if not 0.0 < self.v_min <= 1.0:
            raise ValueError("v_min must be in (0, 1]")
        if self.robot_distance_min >= self.robot_distance_max:
            raise ValueError("empty robot distance band")


@dataclass(frozen=True)
class Placement:
    landmark_id: str
    human_cell: tuple[int, int]
    human_target: Point
    robot_pose: tuple[float, float, float]  # x, y, yaw (facing the human)
    score: float
    visibility: float


def plan_svp(
    human_pose: Point,
    landmark_id: str,
    landmark_point: Point,
    vis: VisibilityGrid,
    config: SvpConfig,
) -> Placement:
    """Pick the human observation cell and a robot pose next to it.

    Human cell: maximises alpha * visibility - beta * distance from the
    human's current position, over free cells with visibility >= v_min
    (ties: nearer cell, then row-major order). Robot pose: free cell inside
    the distance band whose bearings to landmark and human differ by at most
    phi_max, minimising that difference; yaw faces the human.
    """
    grid = vis.grid
    hx, hy = human_pose
    best: tuple[float, float, int] | None = None  # (-score, distance, row-major idx)
    for iy in range(grid.height):
        for ix in range(grid.width):
            if grid.blocked[iy, ix]:
                continue
            v = float(vis.values[iy, ix])
            if v < config.v_min:
                continue
            cx, cy = grid.center(ix, iy)
            d = math.sqrt((cx - hx) * (cx - hx) + (cy - hy) * (cy - hy))
            score = config.visibility_weight * v - config.travel_weight * d
            key = (-score, d, iy * grid.width + ix)
            if best is None or key < best:
                best = key
    if best is None:
        raise NoSharedPerspective(landmark_id)
    idx = best[2]
    h_iy, h_ix = divmod(idx, grid.width)
    human_target = grid.center(h_ix, h_iy)
    score = -best[0]
    visibility = float(vis.values[h_iy, h_ix])

    robot = _robot_pose_for(human_target, landmark_point, grid, config)
    if robot is None:
        raise NoRobotPose(landmark_id)
    return Placement(
        landmark_id=landmark_id,
        human_cell=(h_ix, h_iy),
        human_target=human_target,
        robot_pose=robot,
        score=score,
        visibility=visibility,
    )


def _robot_pose_for(
    human_target: Point,
    landmark_point: Point,
    grid: OccupancyGrid,
    config: SvpConfig,
) -> tuple[float, float, float] | None:
    hx, hy = human_target
    band_cells = int(math.ceil(config.robot_distance_max / grid.resolution)) + 1
    h_ix, h_iy = grid.cell_of(human_target)
    best: tuple[float, int] | None = None
    best_pose: tuple[float, float, float] | None = None
    for iy in range(max(0, h_iy - band_cells), min(grid.height, h_iy + band_cells + 1)):
        for ix in range(max(0, h_ix - band_cells), min(grid.width, h_ix + band_cells + 1)):
            if grid.blocked[iy, ix]:
                continue
            cx, cy = grid.center(ix, iy)
            d = math.sqrt((cx - hx) * (cx - hx) + (cy - hy) * (cy - hy))
            if d < config.robot_distance_min or d > config.robot_distance_max:
                continue
            phi = angular_offset(bearing((cx, cy), landmark_point), bearing((cx, cy), (hx, hy)))
            if phi > config.conformation_max_angle:
                continue
            key = (phi, iy * grid.width + ix)
            if best is None or key < best:
                best = key
                best_pose = (cx, cy, bearing((cx, cy), (hx, hy)))
    return best_pose


def pointing_angles(
    robot_pose: tuple[float, float, float],
    target: Point,
    amplitude: float = 0.8,
    speed: float = 0.5,
    target_height: float | None = None,
    shoulder_height: float = 1.0,
) -> dict:
    """Base yaw and arm elevation for a pointing gesture, params passed through."""
    rx, ry = robot_pose[0], robot_pose[1]
    if target[0] == rx and target[1] == ry:
        raise DegenerateTarget("pointing target coincides with the robot")
    planar = math.sqrt((target[0] - rx) ** 2 + (target[1] - ry) ** 2)
    th = shoulder_height if target_height is None else target_height
    elevation = math.atan((th - shoulder_height) / planar)
    elevation = min(1.2, max(-0.5, elevation))
    return {
        "base_yaw": bearing((rx, ry), target),
        "arm_elevation": elevation,
        "amplitude": amplitude,
        "speed": speed,
    }
