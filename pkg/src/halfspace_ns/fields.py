"""Field containers: spectral tangential fields and slab-resolved half-space fields.

A TangentialField stores Fourier coefficients c_k (numpy fft layout) of a real
vector field on the tangential torus, normalized so that

    f(x') = sum_k c_k exp(i k . (2 pi / L) x').

Invariants: the zero mode is zero (fields live modulo constants) and Nyquist
planes are zero (every mode has its conjugate partner on the grid).

A HalfSpaceField stacks one TangentialField per vertical slab (piecewise
constant in x_n) plus an optional constant tail for x_n > x_max.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .grid import Grid

_HERMITIAN_TOL = 1e-10


def _conj_reverse(coeffs: np.ndarray, d: int) -> np.ndarray:
    """conj(c_{-k}) with the fft index layout (flip then roll by one per axis)."""
    out = coeffs
    for a in range(coeffs.ndim - d, coeffs.ndim):
        out = np.roll(np.flip(out, axis=a), 1, axis=a)
    return np.conj(out)


def clean_coeffs(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero the dead modes (mean + Nyquist) in place and return the array."""
    coeffs[..., grid.dead] = 0.0
    return coeffs


class TangentialField:
    """ncomp-component field on the tangential torus, stored spectrally."""

    __slots__ = ("grid", "coeffs", "_phys_payload")

    def __init__(self, grid: Grid, coeffs: np.ndarray, _trust: bool = False):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim == grid.d:
            coeffs = coeffs[None]
        if coeffs.shape[1:] != grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
        if not _trust:
            coeffs = clean_coeffs(coeffs.copy(), grid)
            mirror = _conj_reverse(coeffs, grid.d)
            scale = np.max(np.abs(coeffs)) or 1.0
            if np.max(np.abs(coeffs - mirror)) > _HERMITIAN_TOL * scale:
                raise ValueError("coefficients are not Hermitian symmetric (field must be real)")
            coeffs = 0.5 * (coeffs + mirror)
        self.grid = grid
        self.coeffs = coeffs
        self._phys_payload: Optional[np.ndarray] = None  # set by file loads only

    # --- constructors ---------------------------------------------------

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int) -> "TangentialField":
        return cls(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128), _trust=True)

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "TangentialField":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == grid.d:
            values = values[None]
        if values.shape[1:] != grid.shape:
            raise ValueError(f"value shape {values.shape} does not match grid {grid.shape}")
        axes = tuple(range(1, 1 + grid.d))
        coeffs = np.fft.fftn(values, axes=axes) / grid.mode_count
        return cls(grid, clean_coeffs(coeffs, grid), _trust=True)

    @classmethod
    def random(
        cls,
        grid: Grid,
        ncomp: int,
        rng: np.random.Generator,
        band: Optional[tuple[float, float]] = None,
        amplitude: float = 1.0,
    ) -> "TangentialField":
        """Seeded random band-limited field, unit-normalized then scaled."""
        vals = rng.standard_normal((ncomp,) + grid.shape)
        f = cls.from_physical(grid, vals)
        if band is not None:
            lo, hi = band
            mask = ((grid.kappa >= lo) & (grid.kappa <= hi)).astype(np.float64)
            f = cls(grid, f.coeffs * mask, _trust=True)
        peak = np.max(np.abs(f.coeffs))
        if peak > 0.0:
            f = f * (amplitude / peak)
        return f

    # --- basic queries ---------------------------------------------------

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def physical(self) -> np.ndarray:
        """Real point values on the grid (inverse transform of the coefficients)."""
        axes = tuple(range(1, 1 + self.grid.d))
        vals = np.fft.ifftn(self.coeffs, axes=axes) * self.grid.mode_count
        return np.ascontiguousarray(vals.real)

    def copy(self) -> "TangentialField":
        return TangentialField(self.grid, self.coeffs.copy(), _trust=True)

    # --- algebra ---------------------------------------------------

    def _check_compatible(self, other: "TangentialField"):
        if self.grid != other.grid or self.ncomp != other.ncomp:
            raise ValueError("fields live on different grids or component counts")

    def __add__(self, other: "TangentialField") -> "TangentialField":
        self._check_compatible(other)
        return TangentialField(self.grid, self.coeffs + other.coeffs, _trust=True)

    def __sub__(self, other: "TangentialField") -> "TangentialField":
        self._check_compatible(other)
        return TangentialField(self.grid, self.coeffs - other.coeffs, _trust=True)

    def __mul__(self, scalar: float) -> "TangentialField":
        return TangentialField(self.grid, self.coeffs * float(scalar), _trust=True)

    __rmul__ = __mul__

    def __neg__(self) -> "TangentialField":
        return TangentialField(self.grid, -self.coeffs, _trust=True)

    def component(self, k: int) -> "TangentialField":
        return TangentialField(self.grid, self.coeffs[k : k + 1], _trust=True)

    def __repr__(self):
        return f"TangentialField(ncomp={self.ncomp}, grid={self.grid!r})"


class HalfSpaceField:
    """Piecewise-constant-in-x_n field: M slab values plus an optional tail."""

    __slots__ = ("grid", "slabs", "tail", "_phys_payload")

    def __init__(
        self,
        grid: Grid,
        slabs: np.ndarray,
        tail: Optional[np.ndarray] = None,
        _trust: bool = False,
    ):
        slabs = np.asarray(slabs, dtype=np.complex128)
        if slabs.ndim == 1 + grid.d:
            slabs = slabs[None]
        if slabs.shape[1] != grid.M or slabs.shape[2:] != grid.shape:
            raise ValueError(
                f"slab array shape {slabs.shape} does not match (*, M={grid.M}, {grid.shape})"
            )
        if tail is not None:
            tail = np.asarray(tail, dtype=np.complex128)
            if tail.ndim == grid.d:
                tail = tail[None]
            if tail.shape != (slabs.shape[0],) + grid.shape:
                raise ValueError("tail shape does not match slab components")
        if not _trust:
            slabs = clean_coeffs(slabs.copy(), grid)
            if tail is not None:
                tail = clean_coeffs(tail.copy(), grid)
        self.grid = grid
        self.slabs = slabs
        self.tail = tail
        self._phys_payload: Optional[np.ndarray] = None

    # --- constructors ---------------------------------------------------

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int, with_tail: bool = False) -> "HalfSpaceField":
        tail = np.zeros((ncomp,) + grid.shape, dtype=np.complex128) if with_tail else None
        return cls(grid, np.zeros((ncomp, grid.M) + grid.shape, dtype=np.complex128), tail, _trust=True)

    @classmethod
    def from_slab_fields(
        cls, fields: list[TangentialField], tail: Optional[TangentialField] = None
    ) -> "HalfSpaceField":
        grid = fields[0].grid
        if len(fields) != grid.M:
            raise ValueError(f"need one field per slab ({grid.M}), got {len(fields)}")
        slabs = np.stack([f.coeffs for f in fields], axis=1)
        return cls(grid, slabs, None if tail is None else tail.coeffs.copy(), _trust=True)

    @classmethod
    def constant_in_x(cls, profile: TangentialField, with_tail: bool = True) -> "HalfSpaceField":
        """Same tangential profile on every slab (and, optionally, as the tail)."""
        grid = profile.grid
        slabs = np.broadcast_to(
            profile.coeffs[:, None], (profile.ncomp, grid.M) + grid.shape
        ).copy()
        tail = profile.coeffs.copy() if with_tail else None
        return cls(grid, slabs, tail, _trust=True)

    @classmethod
    def random(
        cls,
        grid: Grid,
        ncomp: int,
        rng: np.random.Generator,
        band: Optional[tuple[float, float]] = None,
        amplitude: float = 1.0,
        with_tail: bool = False,
    ) -> "HalfSpaceField":
        """Seeded random field: band-limited tangential noise, smooth vertical envelope."""
        base = TangentialField.random(grid, ncomp * grid.M, rng, band=band, amplitude=1.0)
        slabs = base.coeffs.reshape((ncomp, grid.M) + grid.shape).copy()
        env = 0.5 + 0.5 * np.cos(np.pi * grid.centers() / grid.x_max)
        env *= rng.uniform(0.5, 1.0, size=grid.M)
        slabs *= env.reshape((1, grid.M) + (1,) * grid.d)
        tail = None
        if with_tail:
            tail = TangentialField.random(grid, ncomp, rng, band=band, amplitude=1.0).coeffs
        f = cls(grid, slabs, tail, _trust=True)
        peak = f.amplitude()
        return f * (amplitude / peak) if peak > 0.0 else f

    # --- queries ---------------------------------------------------

    @property
    def ncomp(self) -> int:
        return self.slabs.shape[0]

    def slab(self, m: int) -> TangentialField:
        return TangentialField(self.grid, self.slabs[:, m], _trust=True)

    def tail_field(self) -> Optional[TangentialField]:
        if self.tail is None:
            return None
        return TangentialField(self.grid, self.tail, _trust=True)

    def tail_or_zero(self) -> np.ndarray:
        if self.tail is None:
            return np.zeros((self.ncomp,) + self.grid.shape, dtype=np.complex128)
        return self.tail

    def amplitude(self) -> float:
        peak = float(np.max(np.abs(self.slabs)))
        if self.tail is not None:
            peak = max(peak, float(np.max(np.abs(self.tail))))
        return peak

    def physical(self) -> np.ndarray:
        """Real slab values, shape (ncomp, M + tail?, N, ..., N); tail block last."""
        axes = tuple(range(2, 2 + self.grid.d))
        blocks = self.slabs
        if self.tail is not None:
            blocks = np.concatenate([blocks, self.tail[:, None]], axis=1)
        vals = np.fft.ifftn(blocks, axes=axes) * self.grid.mode_count
        return np.ascontiguousarray(vals.real)

    # --- algebra (None tails are treated as exact zeros) -----------------

    def _combine_tails(self, other: "HalfSpaceField", sign: float):
        if self.tail is None and other.tail is None:
            return None
        return self.tail_or_zero() + sign * other.tail_or_zero()

    def __add__(self, other: "HalfSpaceField") -> "HalfSpaceField":
        if self.grid != other.grid or self.ncomp != other.ncomp:
            raise ValueError("fields live on different grids or component counts")
        return HalfSpaceField(
            self.grid, self.slabs + other.slabs, self._combine_tails(other, +1.0), _trust=True
        )

    def __sub__(self, other: "HalfSpaceField") -> "HalfSpaceField":
        if self.grid != other.grid or self.ncomp != other.ncomp:
            raise ValueError("fields live on different grids or component counts")
        return HalfSpaceField(
            self.grid, self.slabs - other.slabs, self._combine_tails(other, -1.0), _trust=True
        )

    def __mul__(self, scalar: float) -> "HalfSpaceField":
        tail = None if self.tail is None else self.tail * float(scalar)
        return HalfSpaceField(self.grid, self.slabs * float(scalar), tail, _trust=True)

    __rmul__ = __mul__

    def copy(self) -> "HalfSpaceField":
        tail = None if self.tail is None else self.tail.copy()
        return HalfSpaceField(self.grid, self.slabs.copy(), tail, _trust=True)

    def __repr__(self):
        return (
            f"HalfSpaceField(ncomp={self.ncomp}, tail={'yes' if self.tail is not None else 'no'}, "
            f"grid={self.grid!r})"
        )
