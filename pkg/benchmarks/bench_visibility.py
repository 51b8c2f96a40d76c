"""Benchmark: compiled visibility kernel vs the pure-Python fallback.

Run with `python3 benchmarks/bench_visibility.py`. Also verifies that both
kernels produce bit-identical grids on every case.
"""

import time
from importlib import resources

import numpy as np

from mallsim.geometry import perimeter_points
from mallsim.semantic_map import load_map
from mallsim.svp import OccupancyGrid, compute_visibility_grid
from mallsim.svp import _visibility_py
from mallsim.svp.visibility import KERNEL, to_grid_coords

try:
    from mallsim.svp import _visibility_cy
except ImportError:
    _visibility_cy = None


def _cases():
    doc = (resources.files("mallsim") / "data" / "maps" / "minimall.json").read_text()
    smap = load_map(doc)
    grid = OccupancyGrid.from_region(smap.regions["square"])
    yield "minimall shoe_shop (60x40, k=8)", grid, perimeter_points(
        list(smap.places["shoe_shop"].footprint), 8)
    yield "minimall esc_1 (60x40, k=8)", grid, perimeter_points(
        smap.landmark_polygon("esc_1"), 8)

    rng = np.random.default_rng(1)
    for side in (32, 64, 96):
        g = OccupancyGrid.empty((0.0, 0.0), 1.0, side, side)
        for _ in range(side):
            g.blocked[int(rng.integers(0, side)), int(rng.integers(0, side))] = True
        samples = [(int(rng.integers(0, side)) + 0.5, int(rng.integers(0, side)) + 0.5)
                   for _ in range(8)]
        yield f"random {side}x{side}, k=8", g, samples


def _time(fn, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    print(f"active kernel at import: {KERNEL}")
    if _visibility_cy is None:
        print("compiled kernel not built; timing the fallback only\n")
    header = f"{'case':34} {'python':>10} {'cython':>10} {'speedup':>9}  identical"
    print(header)
    print("-" * len(header))
    for name, grid, samples in _cases():
        blocked = np.asarray(grid.blocked, dtype=bool)
        sg = to_grid_coords(grid, samples)
        t_py, v_py = _time(lambda: _visibility_py.compute_visibility(blocked, sg))
        if _visibility_cy is not None:
            t_cy, v_cy = _time(lambda: _visibility_cy.compute_visibility(blocked, sg))
            same = bool((v_py == v_cy).all())
            print(f"{name:34} {t_py * 1e3:9.1f}ms {t_cy * 1e3:9.1f}ms {t_py / t_cy:8.1f}x  {same}")
            assert same, "kernel outputs diverged"
        else:
            print(f"{name:34} {t_py * 1e3:9.1f}ms {'-':>10} {'-':>9}")
    # the public entry point with whichever kernel import selected
    name, grid, samples = next(iter(_cases()))
    t, _ = _time(lambda: compute_visibility_grid(grid, "lm", samples))
    print(f"\ncompute_visibility_grid ({KERNEL} kernel): {t * 1e3:.1f} ms on {name}")


if __name__ == "__main__":
    main()
