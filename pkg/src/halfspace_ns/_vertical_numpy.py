"""Pure-numpy evaluation of the vertical kernel integrals.

The five convolution kernels on the vertical line, with kappa > 0:

    K1(z) = exp(-kappa |z|)
    K2(z) = sgn(z) exp(-kappa |z|)
    K3(z) = (1 + kappa |z|) exp(-kappa |z|)
    K4(z) = kappa z exp(-kappa |z|)
    K5(z) = (1 - kappa |z|) exp(-kappa |z|)

Each has a closed antiderivative Q_j, made continuous across z = 0 so that the
integral over any slab is a plain difference of endpoint values even when the
slab straddles the kink.  All exponentials are evaluated at non-positive
arguments, so nothing overflows regardless of kappa * x_max.
"""

from __future__ import annotations

import numpy as np


def antiderivative(j: int, kappa: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Continuous antiderivative Q_j of K_j(kappa, .) evaluated at u (broadcast)."""
    kappa, u = np.broadcast_arrays(kappa, u)
    e = np.exp(-kappa * np.abs(u))
    pos = u >= 0.0
    if j == 1:
        return np.where(pos, -e / kappa, e / kappa - 2.0 / kappa)
    if j == 2:
        return -e / kappa
    if j == 3:
        return np.where(pos, -e * (u + 2.0 / kappa), e * (2.0 / kappa - u) - 4.0 / kappa)
    if j == 4:
        return np.where(pos, -e * (u + 1.0 / kappa), e * (u - 1.0 / kappa))
    if j == 5:
        return u * e
    raise ValueError(f"kernel index must be 1..5, got {j}")


def antiderivative_at_minus_inf(j: int, kappa: np.ndarray) -> np.ndarray:
    """lim_{u -> -inf} Q_j(kappa, u): -2/kappa for j=1, -4/kappa for j=3, else 0."""
    if j == 1:
        return -2.0 / kappa
    if j == 3:
        return -4.0 / kappa
    return np.zeros_like(kappa)


def vertical_apply(
    j: int,
    sign: int,
    kappa: np.ndarray,
    g_slabs: np.ndarray,
    g_tail: np.ndarray | None,
    edges: np.ndarray,
    heights: np.ndarray,
    block: int = 8,
) -> np.ndarray:
    """integral_0^inf (K_j(x - y) + sign * K_j(x + y)) g(y) dy per mode and height.

    kappa: (K,) strictly positive; g_slabs: (K, M) complex slab values;
    g_tail: (K,) complex or None; edges: (M+1,); heights: (H,).
    Returns (K, H) complex.
    """
    K = kappa.shape[0]
    H = heights.shape[0]
    out = np.empty((K, H), dtype=np.complex128)
    kap = kappa[:, None, None]
    for h0 in range(0, H, block):
        xs = heights[h0 : h0 + block]
        qm = antiderivative(j, kap, (xs[:, None] - edges[None, :])[None])
        qp = antiderivative(j, kap, (xs[:, None] + edges[None, :])[None])
        w = (qm[..., :-1] - qm[..., 1:]) + sign * (qp[..., 1:] - qp[..., :-1])
        out[:, h0 : h0 + xs.size] = np.einsum("khm,km->kh", w, g_slabs)
    if g_tail is not None:
        x_top = edges[-1]
        minus_tail = antiderivative(j, kappa[:, None], (heights - x_top)[None, :])
        minus_tail -= antiderivative_at_minus_inf(j, kappa)[:, None]
        plus_tail = -antiderivative(j, kappa[:, None], (heights + x_top)[None, :])
        out += (minus_tail + sign * plus_tail) * g_tail[:, None]
    return out
