"""Occupancy and visibility grids, plus their export formats."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Point


@dataclass(eq=False)
class OccupancyGrid:
    origin: Point
    resolution: float
    width: int
    height: int
    blocked: np.ndarray  # bool, shape (height, width), indexed [iy, ix]

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        self.blocked = np.asarray(self.blocked, dtype=bool)
        if self.blocked.shape != (self.height, self.width):
            raise ValueError("blocked array shape mismatch")

    @classmethod
    def empty(cls, origin: Point, resolution: float, width: int, height: int) -> "OccupancyGrid":
        return cls(origin, resolution, width, height, np.zeros((height, width), dtype=bool))

    @classmethod
    def from_region(cls, region) -> "OccupancyGrid":
        spec = region.grid
        if spec is None:
            raise ValueError(f"region {region.id!r} has no grid")
        g = cls.empty(
            (float(spec["origin"][0]), float(spec["origin"][1])),
            float(spec["resolution"]),
            int(spec["width"]),
            int(spec["height"]),
        )
        for x0, y0, x1, y1 in region.obstacles:
            g.block_rect(x0, y0, x1, y1)
        return g

    def block_rect(self, x0: float, y0: float, x1: float, y1: float) -> None:
        """Mark every cell whose open square overlaps the rectangle."""
        res = self.resolution
        ox, oy = self.origin
        ix0 = max(0, int(math.floor((x0 - ox) / res)))
        iy0 = max(0, int(math.floor((y0 - oy) / res)))
        ix1 = min(self.width - 1, int(math.ceil((x1 - ox) / res)) - 1)
        iy1 = min(self.height - 1, int(math.ceil((y1 - oy) / res)) - 1)
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                cx0 = ox + ix * res
                cy0 = oy + iy * res
                if cx0 < x1 and cx0 + res > x0 and cy0 < y1 and cy0 + res > y0:
                    self.blocked[iy, ix] = True

    def cell_of(self, p: Point) -> tuple[int, int]:
        ix = int(math.floor((p[0] - self.origin[0]) / self.resolution))
        iy = int(math.floor((p[1] - self.origin[1]) / self.resolution))
        return ix, iy

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def center(self, ix: int, iy: int) -> Point:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def is_free(self, ix: int, iy: int) -> bool:
        return self.in_bounds(ix, iy) and not self.blocked[iy, ix]


@dataclass(eq=False)
class VisibilityGrid:
    landmark_id: str
    grid: OccupancyGrid
    values: np.ndarray  # float64, shape (height, width)

    def value_at(self, p: Point) -> float:
        ix, iy = self.grid.cell_of(p)
        if not self.grid.in_bounds(ix, iy):
            return 0.0
        return float(self.values[iy, ix])

    # -- exports -------------------------------------------------------------

    def to_text_matrix(self) -> str:
        """Numeric text matrix, one grid row per line, row 0 first."""
        lines = []
        for iy in range(self.grid.height):
            lines.append(" ".join(repr(float(v)) for v in self.values[iy]))
        return "\n".join(lines) + "\n"

    def to_pgm(self) -> bytes:
        """Binary PGM (P5) greyscale image; row 0 of the grid is the top row."""
        h, w = self.values.shape
        header = f"P5\n{w} {h}\n255\n".encode("ascii")
        # flip vertically so north (high y) is up in the image
        pixels = np.flipud(np.rint(self.values * 255.0).astype(np.uint8))
        return header + pixels.tobytes()
