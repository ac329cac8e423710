"""Tangential spectral operators: multipliers, Riesz transforms, dyadic blocks,
derivatives, and dealiased pointwise products.

All operators act mode-wise on TangentialField coefficients.  Products are
computed on a zero-padded 3N/2 grid (exact for quadratic nonlinearities of
band-limited fields) and the result is truncated back and re-centered so the
zero-mode invariant is preserved.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .fields import HalfSpaceField, TangentialField, clean_coeffs
from .grid import Grid

Symbol = Union[np.ndarray, Callable[[Grid], np.ndarray]]


def resolve_symbol(grid: Grid, symbol: Symbol) -> np.ndarray:
    """Materialize a multiplier on the mode array and validate it.

    The symbol must be finite at every represented nonzero frequency; its value
    on dead modes (mean, Nyquist) is irrelevant and is forced to zero.
    """
    sym = symbol(grid) if callable(symbol) else np.asarray(symbol)
    sym = np.broadcast_to(sym, grid.shape)
    if not np.all(np.isfinite(sym[grid.nonzero & ~grid.dead])):
        raise ValueError("multiplier symbol is not finite at a represented frequency")
    out = np.array(sym, dtype=np.complex128)
    out[grid.dead] = 0.0
    out[~grid.nonzero] = 0.0
    return out


def apply_multiplier(f: TangentialField, symbol: Symbol) -> TangentialField:
    sym = resolve_symbol(f.grid, symbol)
    return TangentialField(f.grid, f.coeffs * sym, _trust=True)


def riesz_symbol(grid: Grid, axis: int) -> np.ndarray:
    """Symbol i xi_axis / |xi'| of the tangential Riesz transform (axis is 0-based)."""
    sym = 1j * grid.xi[axis] / grid.kappa_safe
    return np.where(grid.nonzero, sym, 0.0)


def riesz_transform(f: TangentialField, axis: int) -> TangentialField:
    if not 0 <= axis < f.grid.d:
        raise ValueError(f"axis {axis} out of range for d={f.grid.d}")
    return apply_multiplier(f, riesz_symbol(f.grid, axis))


def lp_block(f: TangentialField, j: int) -> TangentialField:
    """Dyadic block: multiply by phi0(2^-j |xi'|); zero outside the grid's range."""
    if j not in f.grid.dyadic_range():
        return TangentialField.zeros(f.grid, f.ncomp)
    return TangentialField(f.grid, f.coeffs * f.grid.lp_symbol(j), _trust=True)


def tangential_grad(f: TangentialField) -> TangentialField:
    """Gradient of a scalar field: d components i xi_a f."""
    if f.ncomp != 1:
        raise ValueError("tangential_grad expects a scalar field")
    grid = f.grid
    parts = [f.coeffs[0] * (1j * grid.xi[a]) for a in range(grid.d)]
    return TangentialField(grid, np.stack(parts), _trust=True)

def tangential_div(v: TangentialField) -> TangentialField:
    """Divergence of a d-component field: sum_a i xi_a v_a."""
    grid = v.grid
    if v.ncomp != grid.d:
        raise ValueError(f"tangential_div expects {grid.d} components, got {v.ncomp}")
    acc = np.zeros(grid.shape, dtype=np.complex128)
    for a in range(grid.d):
        acc += v.coeffs[a] * (1j * grid.xi[a])
    return TangentialField(grid, acc[None], _trust=True)


# --- dealiased products ---------------------------------------------------


def _pad_positions(N: int, Np: int) -> np.ndarray:
    k = np.rint(np.fft.fftfreq(N) * N).astype(np.int64)
    return np.mod(k, Np)


def pad_spectrum(coeffs: np.ndarray, grid: Grid, Np: int) -> np.ndarray:
    """Embed (..., N^d) coefficients into the (..., Np^d) fft layout."""
    pos = _pad_positions(grid.N, Np)
    out = np.zeros(coeffs.shape[: coeffs.ndim - grid.d] + (Np,) * grid.d, dtype=np.complex128)
    out[(Ellipsis,) + np.ix_(*([pos] * grid.d))] = coeffs
    return out


def truncate_spectrum(coeffs: np.ndarray, grid: Grid, Np: int) -> np.ndarray:
    """Extract the grid's modes from a (..., Np^d) fft layout and clean them."""
    pos = _pad_positions(grid.N, Np)
    out = coeffs[(Ellipsis,) + np.ix_(*([pos] * grid.d))]
    return clean_coeffs(np.ascontiguousarray(out), grid)


def dealiased_product_coeffs(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """Pointwise product of two coefficient stacks via the 3/2 padding rule.

    a and b are (..., N^d) stacks broadcastable against each other; the product
    is formed on the padded grid, transformed back, truncated, and re-centered.
    """
    Np = (3 * grid.N) // 2
    axes = tuple(range(-grid.d, 0))
    pa = np.fft.ifftn(pad_spectrum(a, grid, Np), axes=axes)
    pb = np.fft.ifftn(pad_spectrum(b, grid, Np), axes=axes)
    prod = np.fft.fftn(pa.real * pb.real, axes=axes) * (Np**grid.d)
    return truncate_spectrum(prod, grid, Np)


def dealiased_product(f: TangentialField, g: TangentialField) -> TangentialField:
    """Product of two scalar fields, modulo constants (the mean is removed)."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.ncomp != 1 or g.ncomp != 1:
        raise ValueError("dealiased_product expects scalar fields")
    return TangentialField(f.grid, dealiased_product_coeffs(f.coeffs, g.coeffs, f.grid), _trust=True)


def tensor_product(u: HalfSpaceField, v: HalfSpaceField) -> HalfSpaceField:
    """Slab-wise dealiased tensor (u (x) v)_{k,l} = u_k v_l, n^2 components.

    Tails multiply tail-by-tail; a missing tail counts as zero, and the result
    has a tail only when both factors carry one.
    """
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    grid = u.grid
    nu, nv = u.ncomp, v.ncomp
    out = np.empty((nu * nv, grid.M) + grid.shape, dtype=np.complex128)
    for k in range(nu):
        # broadcast one row of u against all components of v, slab-batched
        out[k * nv : (k + 1) * nv] = dealiased_product_coeffs(
            u.slabs[k : k + 1], v.slabs, grid
        )
    tail = None
    if u.tail is not None and v.tail is not None:
        tail = np.empty((nu * nv,) + grid.shape, dtype=np.complex128)
        for k in range(nu):
            tail[k * nv : (k + 1) * nv] = dealiased_product_coeffs(
                u.tail[k : k + 1], v.tail, grid
            )
    return HalfSpaceField(grid, out, tail, _trust=True)
