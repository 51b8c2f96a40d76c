from .grid import OccupancyGrid, VisibilityGrid
from .planner import Placement, SvpConfig, plan_svp, pointing_angles
from .visibility import KERNEL, compute_visibility_grid

__all__ = [
    "OccupancyGrid",
    "VisibilityGrid",
    "Placement",
    "SvpConfig",
    "plan_svp",
    "pointing_angles",
    "KERNEL",
    "compute_visibility_grid",
]
