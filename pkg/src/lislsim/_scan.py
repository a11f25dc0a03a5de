"""Compiled coarse scan of the in-range predicate over a uniform time grid."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def scan_block(
    ref_pos,
    other_p,
    other_q,
    other_radius,
    cos_u0,
    sin_u0,
    motion_idx,
    cos_nt,
    sin_nt,
    range_sq,
    shell_radius_sq,
    starts,
    stops,
    counts,
):
    """Record in-range runs as (first, last) sample indices.

    ref_pos: (T, 3) reference positions. Other satellites are propagated
    with the angle-addition form of cos/sin(u0 + n t), where the per-motion
    tables ``cos_nt``/``sin_nt`` have shape (M, T). For range k and pair j,
    runs are written to ``starts[k, j, :]``/``stops[k, j, :]``; ``counts``
    holds the true run count even when it exceeds the buffer capacity.
    """
    n_ranges = range_sq.shape[0]
    n_pairs = other_p.shape[0]
    n_times = ref_pos.shape[0]
    cap = starts.shape[2]
    state = np.zeros(n_ranges, dtype=np.bool_)
    for j in range(n_pairs):
        m = motion_idx[j]
        r = other_radius[j]
        px, py, pz = other_p[j, 0], other_p[j, 1], other_p[j, 2]
        qx, qy, qz = other_q[j, 0], other_q[j, 1], other_q[j, 2]
        for k in range(n_ranges):
            state[k] = False
            counts[k, j] = 0
        for i in range(n_times):
            c = r * (cos_u0[j] * cos_nt[m, i] - sin_u0[j] * sin_nt[m, i])
            s = r * (sin_u0[j] * cos_nt[m, i] + cos_u0[j] * sin_nt[m, i])
            bx = c * px + s * qx
            by = c * py + s * qy
            bz = c * pz + s * qz
            ax, ay, az = ref_pos[i, 0], ref_pos[i, 1], ref_pos[i, 2]
            dx, dy, dz = bx - ax, by - ay, bz - az
            dd = dx * dx + dy * dy + dz * dz
            if dd > 0.0:
                t = -(ax * dx + ay * dy + az * dz) / dd
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            cx, cy, cz = ax + t * dx, ay + t * dy, az + t * dz
            clear = cx * cx + cy * cy + cz * cz >= shell_radius_sq
            for k in range(n_ranges):
                inside = clear and dd <= range_sq[k]
                if inside and not state[k]:
                    n = counts[k, j]
                    if n < cap:
                        starts[k, j, n] = i
                    counts[k, j] = n + 1
                elif state[k] and not inside:
                    n = counts[k, j] - 1
                    if n < cap:
                        stops[k, j, n] = i - 1
                state[k] = inside
        for k in range(n_ranges):
            if state[k]:
                n = counts[k, j] - 1
                if n < cap:
                    stops[k, j, n] = n_times - 1
