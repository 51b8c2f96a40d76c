"""Visibility grid computation with a compiled fast path.

The Cython kernel is preferred when built; set MALLSIM_PURE_PY=1 to force
the pure-Python fallback. Both produce bit-identical grids.
"""

from __future__ import annotations

import os

import numpy as np

from ..geometry import Point
from . import _visibility_py

if os.environ.get("MALLSIM_PURE_PY"):
    _kernel = _visibility_py
    KERNEL = "python"
else:
    try:
        from . import _visibility_cy as _kernel  # type: ignore[no-redef]

        KERNEL = "cython"
    except ImportError:
        _kernel = _visibility_py
        KERNEL = "python"

from .grid import OccupancyGrid, VisibilityGrid


def to_grid_coords(grid: OccupancyGrid, points: list[Point]) -> np.ndarray:
    ox, oy = grid.origin
    res = grid.resolution
    out = np.empty((len(points), 2), dtype=np.float64)
    for i, (x, y) in enumerate(points):
        out[i, 0] = (x - ox) / res
        out[i, 1] = (y - oy) / res
    return out


def compute_visibility_grid(
    grid: OccupancyGrid,
    landmark_id: str,
    sample_points: list[Point],
    kernel=None,
) -> VisibilityGrid:
    """Per-cell fraction of landmark sample points reachable by a clear ray."""
    if not sample_points:
        raise ValueError("need at least one landmark sample point")
    samples = to_grid_coords(grid, sample_points)
    impl = kernel if kernel is not None else _kernel
    values = impl.compute_visibility(np.asarray(grid.blocked, dtype=bool), samples)
    return VisibilityGrid(landmark_id=landmark_id, grid=grid, values=values)
