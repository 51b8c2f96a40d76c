"""Pure-Python visibility kernel.

The compiled extension (_visibility_cy) implements exactly the same cell
traversal; this module is the fallback selected at import when the extension
is unavailable. Both must produce bit-identical grids.

Traversal rule: a ray between two points (grid coordinates) crosses the set
of cells whose interior it passes through with positive length. Crossing
boundaries are computed by direct division against the integer gridline, so
an exact corner hit yields exactly equal crossing parameters and steps
diagonally without touching the two side cells.
"""

from __future__ import annotations

import math

import numpy as np

_INF = math.inf


def ray_blocked(blocked_rows, width: int, height: int,
                gx0: float, gy0: float, gx1: float, gy1: float) -> bool:
    """True when a blocked cell lies on the open segment between the points.

    blocked_rows is indexable as [iy][ix] (list of lists or ndarray).
    """
    ix = int(math.floor(gx0))
    iy = int(math.floor(gy0))
    if 0 <= ix < width and 0 <= iy < height and blocked_rows[iy][ix]:
        return True
    dx = gx1 - gx0
    dy = gy1 - gy0
    step_x = 1 if dx > 0.0 else (-1 if dx < 0.0 else 0)
    step_y = 1 if dy > 0.0 else (-1 if dy < 0.0 else 0)
    while True:
        if step_x > 0:
            tx = ((ix + 1) - gx0) / dx
        elif step_x < 0:
            tx = (ix - gx0) / dx
        else:
            tx = _INF
        if step_y > 0:
            ty = ((iy + 1) - gy0) / dy
        elif step_y < 0:
            ty = (iy - gy0) / dy
        else:
            ty = _INF
        if (tx if tx < ty else ty) >= 1.0:
            return False
        if tx < ty:
            ix += step_x
        elif ty < tx:
            iy += step_y
        else:
            ix += step_x
            iy += step_y
        if 0 <= ix < width and 0 <= iy < height and blocked_rows[iy][ix]:
            return True


def compute_visibility(blocked: np.ndarray, samples_grid: np.ndarray) -> np.ndarray:
    """Fraction of unoccluded rays per free cell, in grid coordinates.

    blocked: bool (height, width); samples_grid: float64 (k, 2) sample points
    already transformed into grid coordinates.
    """
    height, width = blocked.shape
    rows = np.asarray(blocked, dtype=bool).tolist()
    samples = [(float(s[0]), float(s[1])) for s in samples_grid]
    k = len(samples)
    values = np.zeros((height, width), dtype=np.float64)
    for iy in range(height):
        gy0 = iy + 0.5
        row = rows[iy]
        for ix in range(width):
            if row[ix]:
                continue
            gx0 = ix + 0.5
            clear = 0
            for sx, sy in samples:
                if not ray_blocked(rows, width, height, gx0, gy0, sx, sy):
                    clear += 1
            values[iy, ix] = clear / k
    return values
