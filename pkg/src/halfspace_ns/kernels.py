"""Vertical convolution kernels, their traces, and the Poisson semigroup.

Every Fourier mode xi' of a field on the half space sees a one-dimensional
problem in the vertical coordinate, governed by five exponential kernels
K_1..K_5 parameterized by kappa = |xi'|.  This module exposes:

  * closed kernel values and a quadrature oracle tying each kernel to its
    rational Fourier symbol,
  * the signed operators L^(j,+/-)[g](x) = int_0^inf (K_j(x-y) +/- K_j(x+y)) g(y) dy
    evaluated slab-exactly through the backend dispatcher,
  * boundary traces of the three kernels with nonzero trace, via independent
    closed antiderivatives in y,
  * the Poisson multiplier exp(-x kappa) acting on boundary fields.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import backend
from ._vertical_numpy import antiderivative, antiderivative_at_minus_inf
from .fields import HalfSpaceField, TangentialField
from .grid import Grid

__all__ = [
    "KernelId",
    "kernel_value",
    "inverse_ft_oracle",
    "l_apply",
    "l_operator",
    "trace_t1",
    "trace_t3",
    "trace_t4",
    "poisson_multiplier",
    "poisson_apply",
    "antiderivative",
    "antiderivative_at_minus_inf",
]


@dataclass(frozen=True)
class KernelId:
    """One of the five vertical kernels together with a reflection sign."""

    j: int
    sign: int

    def __post_init__(self):
        if self.j not in (1, 2, 3, 4, 5):
            raise ValueError(f"kernel index must be 1..5, got {self.j}")
        if self.sign not in (1, -1):
            raise ValueError(f"kernel sign must be +1 or -1, got {self.sign}")


def kernel_value(j: int, kappa, z):
    """Closed form of K_j(kappa, z), vectorized over kappa and z."""
    kappa = np.asarray(kappa, dtype=float)
    z = np.asarray(z, dtype=float)
    e = np.exp(-kappa * np.abs(z))
    if j == 1:
        return e
    if j == 2:
        return np.sign(z) * e
    if j == 3:
        return (1.0 + kappa * np.abs(z)) * e
    if j == 4:
        return kappa * z * e
    if j == 5:
        return (1.0 - kappa * np.abs(z)) * e
    raise ValueError(f"kernel index must be 1..5, got {j}")


def _closed_inverse_ft(j: int, kappa: float, z: float) -> float:
    """Closed inverse Fourier transform of the rational symbol paired with K_j."""
    if j == 1:
        return kernel_value(1, kappa, z) / (2.0 * kappa)
    if j == 2:
        return -kernel_value(2, kappa, z) / 2.0
    if j == 3:
        return kernel_value(3, kappa, z) / (4.0 * kappa**3)
    if j == 4:
        return -kernel_value(4, kappa, z) / (4.0 * kappa**2)
    if j == 5:
        return kernel_value(5, kappa, z) / (4.0 * kappa)
    raise ValueError(f"kernel index must be 1..5, got {j}")


def inverse_ft_oracle(j: int, kappa: float, z: float) -> tuple[float, float, float]:
    """Quadrature inverse Fourier transform of the symbol paired with K_j.

    Symbols, with f^(z) = (1/2pi) int f(xi) exp(i z xi) dxi:

        j=1: 1/(kappa^2+xi^2)        j=2: i xi/(kappa^2+xi^2)
        j=3: 1/(kappa^2+xi^2)^2      j=4: i xi/(kappa^2+xi^2)^2
        j=5: xi^2/(kappa^2+xi^2)^2

    Returns (quadrature value, closed-form value, quadrature error estimate),
    using the oscillatory-weight rule on (0, inf) when z != 0.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    k2 = kappa * kappa
    even = {
        1: lambda xi: 1.0 / (k2 + xi * xi),
        3: lambda xi: 1.0 / (k2 + xi * xi) ** 2,
        5: lambda xi: xi * xi / (k2 + xi * xi) ** 2,
    }
    odd = {
        2: lambda xi: xi / (k2 + xi * xi),
        4: lambda xi: xi / (k2 + xi * xi) ** 2,
    }
    closed = _closed_inverse_ft(j, kappa, z)
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400, limlst=200)
    with warnings.catch_warnings():
        # Tolerances are pushed to the floor on purpose; the returned error
        # estimate is what callers should judge by.
        warnings.simplefilter("ignore", IntegrationWarning)
        if j in even:
            h = even[j]
            if z == 0.0:
                val, err = quad(h, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
            else:
                val, err = quad(h, 0.0, np.inf, weight="cos", wvar=abs(z), **opts)
            return val / np.pi, closed, err / np.pi
        h = odd[j]
        if z == 0.0:
            return 0.0, closed, 0.0
        val, err = quad(h, 0.0, np.inf, weight="sin", wvar=abs(z), **opts)
    signed = -np.sign(z) * val / np.pi
    return signed, closed, err / np.pi


def l_apply(
    j: int,
    sign: int,
    grid: Grid,
    slab_coeffs: np.ndarray,
    tail_coeffs: np.ndarray | None,
    heights: np.ndarray,
    backend_name: str | None = None,
) -> np.ndarray:
    """Apply L^(j, sign) to one scalar source given by slab coefficients.

    slab_coeffs: (M, *grid.shape) complex, piecewise constant in y; tail_coeffs
    extends the source by a constant beyond x_max.  Returns (H, *grid.shape).
    Zero and Nyquist modes of the result are zeroed; sources are expected to be
    clean there already.
    """
    heights = np.atleast_1d(np.asarray(heights, dtype=float))
    if slab_coeffs.shape != (grid.M, *grid.shape):
        raise ValueError(
            f"slab coefficients must have shape {(grid.M, *grid.shape)}, "
            f"got {slab_coeffs.shape}"
        )
    mode_count = grid.mode_count
    g = np.ascontiguousarray(
        slab_coeffs.reshape(grid.M, mode_count).T, dtype=np.complex128
    )
    tail = None
    if tail_coeffs is not None:
        tail = np.ascontiguousarray(
            np.asarray(tail_coeffs, dtype=np.complex128).reshape(mode_count)
        )
    out = backend.vertical_apply(
        j,
        sign,
        grid.kappa_safe.ravel(),
        g,
        tail,
        grid.edges(),
        heights,
        backend=backend_name,
    )
    result = out.T.reshape(heights.size, *grid.shape)
    result[:, grid.dead] = 0.0
    return result


def l_operator(kid: KernelId, source: HalfSpaceField, heights) -> np.ndarray:
    """L^(j, sign) applied componentwise; returns (ncomp, H, *grid.shape)."""
    grid = source.grid
    heights = np.atleast_1d(np.asarray(heights, dtype=float))
    out = np.empty(
        (source.ncomp, heights.size, *grid.shape), dtype=np.complex128
    )
    for c in range(source.ncomp):
        tail = None if source.tail is None else source.tail[c]
        out[c] = l_apply(kid.j, kid.sign, grid, source.slabs[c], tail, heights)
    return out


def _trace_core(grid: Grid, slabs: np.ndarray, tail: np.ndarray | None, a) -> np.ndarray:
    """sum_m g_m (a(y_m) - a(y_{m+1})) + g_tail a(x_max) for an antiderivative a
    with a(y) -> 0 as y -> inf; a is a callable of the edge array, broadcast
    against kappa_safe."""
    kappa = grid.kappa_safe
    edges = grid.edges()
    vals = a(kappa[None, ...], edges.reshape((-1,) + (1,) * grid.d))
    out = np.einsum("m...,m...->...", vals[:-1] - vals[1:], slabs)
    if tail is not None:
        out = out + vals[-1] * tail
    out[grid.dead] = 0.0
    return out


def trace_t1(grid: Grid, slabs: np.ndarray, tail: np.ndarray | None) -> np.ndarray:
    """2 int_0^inf exp(-kappa y) g(y) dy, slab-exact."""
    return 2.0 * _trace_core(grid, slabs, tail, lambda k, y: np.exp(-k * y) / k)


def trace_t3(grid: Grid, slabs: np.ndarray, tail: np.ndarray | None) -> np.ndarray:
    """2 int_0^inf (1 + kappa y) exp(-kappa y) g(y) dy, slab-exact."""
    return 2.0 * _trace_core(
        grid, slabs, tail, lambda k, y: np.exp(-k * y) * (y + 2.0 / k)
    )


def trace_t4(grid: Grid, slabs: np.ndarray, tail: np.ndarray | None) -> np.ndarray:
    """-2 int_0^inf kappa y exp(-kappa y) g(y) dy, slab-exact."""
    return -2.0 * _trace_core(
        grid, slabs, tail, lambda k, y: np.exp(-k * y) * (y + 1.0 / k)
    )


def poisson_multiplier(grid: Grid, x: float) -> np.ndarray:
    """Symbol exp(-x kappa) of the Poisson semigroup at height x >= 0."""
    if x < 0:
        raise ValueError("Poisson semigroup height must be nonnegative")
    return np.exp(-x * grid.kappa)


def poisson_apply(f: TangentialField, x: float) -> TangentialField:
    """Harmonic extension of a boundary field to height x."""
    sym = poisson_multiplier(f.grid, x)
    return TangentialField(f.grid, f.coeffs * sym, _trust=True)
