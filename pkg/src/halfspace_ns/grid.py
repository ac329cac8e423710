"""Discrete geometry: periodic tangential grid, vertical slabs, dyadic frequency range.

The tangential variable lives on a d-dimensional torus of period L sampled at N
points per axis (d = n - 1 for a flow in n space dimensions).  The vertical
variable x_n >= 0 is split into M slabs of width h = x_max / M on which fields
are piecewise constant, with an optional constant tail beyond x_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def smooth_cutoff(rho):
    """Radial cutoff chi: 1 on [0,1], smooth decay on (1,2), 0 on [2,inf).

    On 1 < rho < 2 the value is exp(1 - 1/(1 - (rho-1)^2)), which glues
    C^inf-flat to both plateaus.
    """
    rho = np.asarray(rho, dtype=np.float64)
    out = np.zeros(rho.shape)
    out[rho <= 1.0] = 1.0
    mid = (rho > 1.0) & (rho < 2.0)
    if np.any(mid):
        s = rho[mid] - 1.0
        out[mid] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


def dyadic_bump(rho):
    """Annular bump phi0(rho) = chi(rho) - chi(2 rho), supported on 1/2 <= rho <= 2.

    Translates {phi0(2^-j rho)}_j into a partition of unity on rho > 0.
    """
    return smooth_cutoff(rho) - smooth_cutoff(2.0 * np.asarray(rho, dtype=np.float64))


@dataclass(frozen=True)
class DyadicRange:
    """Closed integer range [j_min, j_max] of dyadic blocks resolved by a grid."""

    j_min: int
    j_max: int

    def __post_init__(self):
        if self.j_min > self.j_max:
            raise ValueError("empty dyadic range")

    def __iter__(self):
        return iter(range(self.j_min, self.j_max + 1))

    def __len__(self):
        return self.j_max - self.j_min + 1

    def __contains__(self, j):
        return self.j_min <= j <= self.j_max


class Grid:
    """Tangential torus [0,L)^d at N points per axis plus M vertical slabs on [0, x_max]."""

    def __init__(self, d: int, N: int, L: float, M: int, x_max: float):
        if d not in (2, 3):
            raise ValueError(f"tangential dimension d must be 2 or 3, got {d}")
        if N < 4 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 4, got {N}")
        if not (L > 0.0 and math.isfinite(L)):
            raise ValueError(f"period L must be positive and finite, got {L}")
        if M < 1:
            raise ValueError(f"slab count M must be >= 1, got {M}")
        if not (x_max > 0.0 and math.isfinite(x_max)):
            raise ValueError(f"x_max must be positive and finite, got {x_max}")
        self.d = d
        self.N = N
        self.L = float(L)
        self.M = M
        self.x_max = float(x_max)
        self.h = self.x_max / M
        self.shape = (N,) * d
        self.mode_count = N**d

        # integer mode indices along one axis in numpy fft order
        k1 = np.rint(np.fft.fftfreq(N) * N).astype(np.int64)
        self._k1 = k1
        freq = TWO_PI / self.L
        # xi[a] broadcasts the frequency along axis a over the full mode array
        self.xi = []
        for a in range(d):
            sh = [1] * d
            sh[a] = N
            self.xi.append((k1 * freq).reshape(sh))
        ksq = np.zeros(self.shape)
        for a in range(d):
            ksq = ksq + self.xi[a] ** 2
        self.kappa = np.sqrt(ksq)
        self.kappa_safe = np.where(self.kappa > 0.0, self.kappa, 1.0)
        self.nonzero = self.kappa > 0.0

        # Nyquist planes have no conjugate partner; fields keep them at zero
        nyq = np.zeros(self.shape, dtype=bool)
        for a in range(d):
            idx = [slice(None)] * d
            idx[a] = np.where(k1 == -N // 2)[0]
            nyq[tuple(idx)] = True
        self.nyquist = nyq
        self.dead = nyq.copy()
        self.dead[(0,) * d] = True  # zero mode is always excluded too

        self.kappa_min = freq
        self.kappa_max = math.pi * N * math.sqrt(d) / self.L
        self._lp_cache: dict[int, np.ndarray] = {}

    # --- dyadic structure ---------------------------------------------------

    def dyadic_range(self) -> DyadicRange:
        """Block range wide enough that every represented frequency is fully covered.

        2^(j_min-1) <= kappa_min and 2^(j_max+1) >= kappa_max, with one block of
        margin so the partition of unity is complete on the grid.
        """
        j_min = math.floor(math.log2(self.kappa_min)) - 1
        j_max = math.ceil(math.log2(self.kappa_max)) + 1
        return DyadicRange(j_min, j_max)

    def lp_symbol(self, j: int) -> np.ndarray:
        """Multiplier phi0(2^-j |xi'|) on the mode array (cached)."""
        sym = self._lp_cache.get(j)
        if sym is None:
            sym = dyadic_bump(self.kappa / float(2.0**j))
            sym[self.dead] = 0.0
            self._lp_cache[j] = sym
        return sym

    def points(self) -> list[np.ndarray]:
        """Tangential sample coordinates, one broadcastable array per axis."""
        coord = self.L / self.N * np.arange(self.N)
        out = []
        for a in range(self.d):
            shape = [1] * self.d
            shape[a] = self.N
            out.append(coord.reshape(shape))
        return out

    # --- vertical structure ---------------------------------------------------

    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.M + 1)

    def centers(self) -> np.ndarray:
        return (np.arange(self.M) + 0.5) * self.h

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.d

    # --- companions ---------------------------------------------------

    def rescaled(self, lam: float = 2.0) -> "Grid":
        """Companion grid for the dyadic data rescaling x -> lam x."""
        return Grid(self.d, self.N, self.L / lam, self.M, self.x_max / lam)

    def key(self) -> str:
        return f"d{self.d}_N{self.N}_L{self.L:.9g}_M{self.M}_X{self.x_max:.9g}"

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.d == other.d
            and self.N == other.N
            and self.L == other.L
            and self.M == other.M
            and self.x_max == other.x_max
        )

    def __hash__(self):
        return hash((self.d, self.N, self.L, self.M, self.x_max))

    def __repr__(self):
        return f"Grid(d={self.d}, N={self.N}, L={self.L:.6g}, M={self.M}, x_max={self.x_max:.6g})"


def desk_grid(n: int = 3) -> Grid:
    """Default verification grid: n=3 -> (d=2, N=64), n=4 -> (d=3, N=32)."""
    if n == 3:
        return Grid(2, 64, 16.0 * math.pi, 64, 8.0)
    if n == 4:
        return Grid(3, 32, 16.0 * math.pi, 32, 8.0)
    raise ValueError(f"supported dimensions are n=3 and n=4, got n={n}")
