"""Small 2D geometry helpers used throughout the simulator.

All angles are radians, all lengths metres. Points are (x, y) tuples.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi

Point = tuple[float, float]


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a <= -math.pi:
        a += TWO_PI
    elif a > math.pi:
        a -= TWO_PI
    return a


def bearing(src: Point, dst: Point) -> float:
    """World-frame bearing of dst as seen from src."""
    return math.atan2(dst[1] - src[1], dst[0] - src[0])


def angular_offset(a: float, b: float) -> float:
    """Absolute smallest difference between two angles."""
    return abs(wrap_angle(a - b))


def dist(a: Point, b: Point) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def polygon_perimeter(poly: list[Point]) -> float:
    n = len(poly)
    return sum(dist(poly[i], poly[(i + 1) % n]) for i in range(n))


def polygon_centroid(poly: list[Point]) -> Point:
    """Area centroid (shoelace). Falls back to vertex mean for zero area."""
    area2 = 0.0
    cx = 0.0
    cy = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        cross = x0 * y1 - x1 * y0
        area2 += cross
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    if area2 == 0.0:
        return (sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)
    return (cx / (3.0 * area2), cy / (3.0 * area2))


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if cross != 0.0:
        return False
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def point_in_polygon(p: Point, poly: list[Point]) -> bool:
    """Point-in-polygon with boundary points counting as inside."""
    n = len(poly)
    for i in range(n):
        if _on_segment(p, poly[i], poly[(i + 1) % n]):
            return True
    inside = False
    px, py = p
    j = n - 1
    for i in range(n):
        xi, yi = poly[i]
        xj, yj = poly[j]
        if (yi > py) != (yj > py):
            x_at = (xj - xi) * (py - yi) / (yj - yi) + xi
            if px < x_at:
                inside = not inside
        j = i
    return inside


def perimeter_points(poly: list[Point], k: int) -> list[Point]:
    """k points evenly spaced along the polygon boundary, starting at vertex 0."""
    per = polygon_perimeter(poly)
    n = len(poly)
    pts: list[Point] = []
    step = per / k
    for j in range(k):
        s = j * step
        # walk edges until the arc length s is consumed
        for i in range(n):
            a = poly[i]
            b = poly[(i + 1) % n]
            e = dist(a, b)
            if s <= e or i == n - 1:
                t = 0.0 if e == 0.0 else s / e
                pts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
                break
            s -= e
    return pts


def square_around(center: Point, half: float) -> list[Point]:
    x, y = center
    return [(x - half, y - half), (x + half, y - half), (x + half, y + half), (x - half, y + half)]
