"""Numba implementation of the vertical kernel integrals.

Mirrors _vertical_numpy exactly (same continuous antiderivatives, same slab
difference scheme); the backend dispatcher asserts agreement in tests.  The
mode loop is parallel, since modes are independent.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _q(j: int, kappa: float, u: float) -> float:
    e = np.exp(-kappa * abs(u))
    if j == 1:
        if u >= 0.0:
            return -e / kappa
        return e / kappa - 2.0 / kappa
    if j == 2:
        return -e / kappa
    if j == 3:
        if u >= 0.0:
            return -e * (u + 2.0 / kappa)
        return e * (2.0 / kappa - u) - 4.0 / kappa
    if j == 4:
        if u >= 0.0:
            return -e * (u + 1.0 / kappa)
        return e * (u - 1.0 / kappa)
    return u * e


@njit(cache=True, inline="always")
def _q_minus_inf(j: int, kappa: float) -> float:
    if j == 1:
        return -2.0 / kappa
    if j == 3:
        return -4.0 / kappa
    return 0.0


@njit(cache=True, parallel=True)
def _apply(j, sign, kappa, g_slabs, g_tail, has_tail, edges, heights, out):
    n_modes = kappa.shape[0]
    n_heights = heights.shape[0]
    n_slabs = edges.shape[0] - 1
    x_top = edges[n_slabs]
    s = float(sign)
    for kk in prange(n_modes):
        kap = kappa[kk]
        for hh in range(n_heights):
            x = heights[hh]
            qm_prev = _q(j, kap, x - edges[0])
            qp_prev = _q(j, kap, x + edges[0])
            acc = 0.0 + 0.0j
            for m in range(n_slabs):
                qm_next = _q(j, kap, x - edges[m + 1])
                qp_next = _q(j, kap, x + edges[m + 1])
                w = (qm_prev - qm_next) + s * (qp_next - qp_prev)
                acc += w * g_slabs[kk, m]
                qm_prev = qm_next
                qp_prev = qp_next
            if has_tail:
                minus_tail = _q(j, kap, x - x_top) - _q_minus_inf(j, kap)
                plus_tail = -_q(j, kap, x + x_top)
                acc += (minus_tail + s * plus_tail) * g_tail[kk]
            out[kk, hh] = acc


def vertical_apply(
    j: int,
    sign: int,
    kappa: np.ndarray,
    g_slabs: np.ndarray,
    g_tail: np.ndarray | None,
    edges: np.ndarray,
    heights: np.ndarray,
) -> np.ndarray:
    out = np.empty((kappa.shape[0], heights.shape[0]), dtype=np.complex128)
    if g_tail is None:
        tail = np.zeros(kappa.shape[0], dtype=np.complex128)
        has_tail = False
    else:
        tail = np.ascontiguousarray(g_tail, dtype=np.complex128)
        has_tail = True
    _apply(
        j,
        sign,
        np.ascontiguousarray(kappa, dtype=np.float64),
        np.ascontiguousarray(g_slabs, dtype=np.complex128),
        tail,
        has_tail,
        np.ascontiguousarray(edges, dtype=np.float64),
        np.ascontiguousarray(heights, dtype=np.float64),
        out,
    )
    return out
