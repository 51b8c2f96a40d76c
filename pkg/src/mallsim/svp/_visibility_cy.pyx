# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled visibility kernel.

Mirrors _visibility_py step for step; both must produce bit-identical
grids. Crossing parameters are recomputed by direct division against the
integer gridline each step so exact corner hits tie exactly and step
diagonally, the same as the pure-Python fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "math.h":
    double HUGE_VAL


cdef inline bint _ray_blocked(cnp.uint8_t[:, :] blocked, int width, int height,
                              double gx0, double gy0, double gx1, double gy1) nogil:
    cdef int ix = <int>gx0 if gx0 >= 0 else <int>gx0 - 1
    cdef int iy = <int>gy0 if gy0 >= 0 else <int>gy0 - 1
    cdef double dx, dy, tx, ty
    cdef int step_x, step_y
    if 0 <= ix < width and 0 <= iy < height and blocked[iy, ix]:
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
            tx = HUGE_VAL
        if step_y > 0:
            ty = ((iy + 1) - gy0) / dy
        elif step_y < 0:
            ty = (iy - gy0) / dy
        else:
            ty = HUGE_VAL
        if (tx if tx < ty else ty) >= 1.0:
            return False
        if tx < ty:
            ix += step_x
        elif ty < tx:
            iy += step_y
        else:
            ix += step_x
            iy += step_y
        if 0 <= ix < width and 0 <= iy < height and blocked[iy, ix]:
            return True


def compute_visibility(blocked_in, samples_grid_in):
    blocked_arr = np.ascontiguousarray(blocked_in, dtype=np.uint8)
    samples_arr = np.ascontiguousarray(samples_grid_in, dtype=np.float64)
    cdef cnp.uint8_t[:, :] blocked = blocked_arr
    cdef cnp.float64_t[:, :] samples = samples_arr
    cdef int height = blocked.shape[0]
    cdef int width = blocked.shape[1]
    cdef int k = samples.shape[0]
    values_arr = np.zeros((height, width), dtype=np.float64)
    cdef cnp.float64_t[:, :] values = values_arr
    cdef int ix, iy, j, clear
    cdef double gx0, gy0
    with nogil:
        for iy in range(height):
            gy0 = iy + 0.5
            for ix in range(width):
                if blocked[iy, ix]:
                    continue
                gx0 = ix + 0.5
                clear = 0
                for j in range(k):
                    if not _ray_blocked(blocked, width, height, gx0, gy0,
                                        samples[j, 0], samples[j, 1]):
                        clear += 1
                values[iy, ix] = (<double>clear) / (<double>k)
    return values_arr
