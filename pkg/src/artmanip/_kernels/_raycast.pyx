# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Moller-Trumbore ray casting over a triangle soup.

Keep the arithmetic in lockstep with raycast_numpy.cast_rays: same epsilons,
same operation order, strict `t < best` so equal distances keep the lowest
triangle index.
"""

from libc.math cimport INFINITY, fabs

import numpy as np

DET_EPSILON = 1e-12
EDGE_EPSILON = 1e-12
MIN_T = 1e-9


cdef void _cast(
    double[::1] origin,
    double[:, ::1] dirs,
    double[:, ::1] v0,
    double[:, ::1] e1,
    double[:, ::1] e2,
    double[::1] out_t,
    int[::1] out_tri,
) noexcept nogil:
    cdef Py_ssize_t n_rays = dirs.shape[0]
    cdef Py_ssize_t n_tris = v0.shape[0]
    cdef Py_ssize_t r, k
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double dx, dy, dz
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double sx, sy, sz
    cdef double px, py, pz, qx, qy, qz
    cdef double det, inv, u, v, t, best_t
    cdef int best
    for r in range(n_rays):
        dx = dirs[r, 0]
        dy = dirs[r, 1]
        dz = dirs[r, 2]
        best_t = INFINITY
        best = -1
        for k in range(n_tris):
            e1x = e1[k, 0]
            e1y = e1[k, 1]
            e1z = e1[k, 2]
            e2x = e2[k, 0]
            e2y = e2[k, 1]
            e2z = e2[k, 2]
            px = dy * e2z - dz * e2y
            py = dz * e2x - dx * e2z
            pz = dx * e2y - dy * e2x
            det = e1x * px + e1y * py + e1z * pz
            if fabs(det) < 1e-12:
                continue
            inv = 1.0 / det
            sx = ox - v0[k, 0]
            sy = oy - v0[k, 1]
            sz = oz - v0[k, 2]
            u = (sx * px + sy * py + sz * pz) * inv
            if u < -1e-12 or u > 1.0 + 1e-12:
                continue
            qx = sy * e1z - sz * e1y
            qy = sz * e1x - sx * e1z
            qz = sx * e1y - sy * e1x
            v = (dx * qx + dy * qy + dz * qz) * inv
            if v < -1e-12 or u + v > 1.0 + 1e-12:
                continue
            t = (e2x * qx + e2y * qy + e2z * qz) * inv
            if t <= 1e-9:
                continue
            if t < best_t:
                best_t = t
                best = <int>k
        out_t[r] = best_t
        out_tri[r] = best


def cast_rays(origin, dirs, v0, e1, e2):
    """Nearest-hit (t, tri_index) per ray; t=+inf, index=-1 on a miss."""
    origin = np.ascontiguousarray(origin, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    v0 = np.ascontiguousarray(v0, dtype=np.float64)
    e1 = np.ascontiguousarray(e1, dtype=np.float64)
    e2 = np.ascontiguousarray(e2, dtype=np.float64)
    out_t = np.full(dirs.shape[0], np.inf, dtype=np.float64)
    out_tri = np.full(dirs.shape[0], -1, dtype=np.int32)
    if v0.shape[0]:
        _cast(origin, dirs, v0, e1, e2, out_t, out_tri)
    return out_t, out_tri
