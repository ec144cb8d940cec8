"""Vectorized NumPy ray casting; mirrors the compiled kernel op-for-op.

Both backends use the same Moller-Trumbore arithmetic with inclusive edge
tolerances and a strict `t < best` comparison, so the nearest hit and the
lowest-index tie-break agree bit-for-bit between them.
"""

from __future__ import annotations

import numpy as np

DET_EPSILON = 1e-12
EDGE_EPSILON = 1e-12
MIN_T = 1e-9

_CHUNK = 4096


def _cross(a, b):
    # explicit components to match the compiled kernel's operation order
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=float)
    out[..., 0] = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    out[..., 1] = a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2]
    out[..., 2] = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    return out


def cast_rays(origin, dirs, v0, e1, e2):
    """Nearest-hit distances for rays from one origin.

    Returns (t, tri_index); t is +inf and tri_index is -1 where a ray misses.
    The reported t is in units of the (not necessarily normalized) direction
    vectors.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    n_rays = dirs.shape[0]
    out_t = np.full(n_rays, np.inf)
    out_tri = np.full(n_rays, -1, dtype=np.int32)
    if len(v0) == 0:
        return out_t, out_tri
    svec = origin - v0  # (T, 3), shared by every ray
    q = _cross(svec, e1)  # (T, 3)
    e2q = (e2 * q).sum(axis=1)  # (T,)
    for start in range(0, n_rays, _CHUNK):
        d = dirs[start:start + _CHUNK]  # (c, 3)
        p = _cross(d[:, None, :], e2[None, :, :])  # (c, T, 3)
        det = (e1[None, :, :] * p).sum(axis=2)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            u = (svec[None, :, :] * p).sum(axis=2) * inv
            v = (d[:, None, :] * q[None, :, :]).sum(axis=2) * inv
            t = e2q[None, :] * inv
        ok = (
            (np.abs(det) >= DET_EPSILON)
            & (u >= -EDGE_EPSILON)
            & (u <= 1.0 + EDGE_EPSILON)
            & (v >= -EDGE_EPSILON)
            & (u + v <= 1.0 + EDGE_EPSILON)
            & (t > MIN_T)
        )
        t = np.where(ok, t, np.inf)
        best = np.argmin(t, axis=1)  # first minimum == lowest triangle index
        rows = np.arange(len(d))
        best_t = t[rows, best]
        hit = np.isfinite(best_t)
        sl = slice(start, start + len(d))
        out_t[sl] = np.where(hit, best_t, np.inf)
        out_tri[sl] = np.where(hit, best, -1).astype(np.int32)
    return out_t, out_tri
