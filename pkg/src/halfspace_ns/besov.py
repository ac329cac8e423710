"""Homogeneous Besov and mixed vertical-Besov norms on the discrete half space.

besov_norm computes  || {2^{sj} ||Delta_j f||_{L^p}} ||_{l^r}  over the grid's
dyadic range, with L^p evaluated by physical-space Riemann quadrature (exact
Parseval shortcut for p = 2).  chemin_lerner_norm puts an L^q norm in x_n
inside the dyadic sum, evaluated exactly on the piecewise-constant slabs.
+inf is a representable norm value, not an error.

bony_decompose splits a product into two paraproducts and the resonant part;
bilinear_estimate_check measures the product estimate

    ||fg|| <= C ||f|| ||g||

in the critical indices over seeded random trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import HalfSpaceField, TangentialField
from .grid import Grid
from .spectral import dealiased_product, dealiased_product_coeffs, lp_block

INF = math.inf


@dataclass(frozen=True)
class BesovIndex:
    """Indices (s, p, r) of the homogeneous Besov space B^s_{p,r}."""

    s: float
    p: float
    r: float

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ValueError(f"regularity s must be finite, got {self.s}")
        for name, val in (("p", self.p), ("r", self.r)):
            if not (1.0 <= val):
                raise ValueError(f"index {name} must lie in [1, inf], got {val}")


@dataclass(frozen=True)
class CLIndex:
    """Vertical integrability q over an interval (a, b) with 0 <= a < b <= inf."""

    q: float
    interval: tuple[float, float] = (0.0, INF)

    def __post_init__(self):
        if not (1.0 <= self.q):
            raise ValueError(f"index q must lie in [1, inf], got {self.q}")
        a, b = self.interval
        if not (0.0 <= a < b):
            raise ValueError(f"interval must satisfy 0 <= a < b, got {self.interval}")


def lr_accumulate(values: np.ndarray, r: float) -> float:
    """l^r norm of a nonnegative sequence; propagates +inf."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    if np.any(np.isinf(values)):
        return INF
    if math.isinf(r):
        return float(np.max(values))
    return float(np.sum(values**r) ** (1.0 / r))


def lp_quadrature(values: np.ndarray, p: float, cell_volume: float) -> float:
    """Riemann L^p norm of pointwise magnitudes (components already collapsed)."""
    if math.isinf(p):
        return float(np.max(values)) if values.size else 0.0
    return float((np.sum(values**p) * cell_volume) ** (1.0 / p))


def _pointwise_magnitude(phys: np.ndarray, d: int) -> np.ndarray:
    """Euclidean length over the component axis of (..., ncomp, N^d) values."""
    return np.sqrt(np.sum(phys**2, axis=-d - 1))


def block_lp_norm(f: TangentialField, j: int, p: float) -> float:
    """||Delta_j f||_{L^p} with component-wise l^2 collapse before the L^p norm."""
    grid = f.grid
    if j not in grid.dyadic_range():
        return 0.0
    blocked = f.coeffs * grid.lp_symbol(j)
    if p == 2.0:
        # Parseval: the quadrature of |f|^2 equals L^d * sum |c_k|^2 exactly
        return float(math.sqrt(grid.L**grid.d * np.sum(np.abs(blocked) ** 2)))
    axes = tuple(range(1, 1 + grid.d))
    phys = (np.fft.ifftn(blocked, axes=axes) * grid.mode_count).real
    return lp_quadrature(_pointwise_magnitude(phys[None], grid.d)[0], p, grid.cell_volume)


def besov_norm(f: TangentialField, idx: BesovIndex) -> float:
    grid = f.grid
    rng_j = grid.dyadic_range()
    vals = [2.0 ** (idx.s * j) * block_lp_norm(f, j, idx.p) for j in rng_j]
    return lr_accumulate(np.array(vals), idx.r)


def _slab_block_norms(u: HalfSpaceField, j: int, p: float) -> tuple[np.ndarray, float]:
    """Per-slab ||Delta_j u(., x_n)||_{L^p} plus the tail block norm (0 if absent)."""
    grid = u.grid
    if j not in grid.dyadic_range():
        return np.zeros(grid.M), 0.0
    sym = grid.lp_symbol(j)
    slabs = u.slabs * sym
    tail = None if u.tail is None else u.tail * sym
    if p == 2.0:
        scale = grid.L**grid.d
        per_slab = np.sqrt(scale * np.sum(np.abs(slabs) ** 2, axis=(0,) + tuple(range(2, 2 + grid.d))))
        t = 0.0 if tail is None else float(math.sqrt(scale * np.sum(np.abs(tail) ** 2)))
        return per_slab, t
    axes = tuple(range(2, 2 + grid.d))
    phys = (np.fft.ifftn(slabs, axes=axes) * grid.mode_count).real
    mags = np.sqrt(np.sum(phys**2, axis=0))  # (M, N^d)
    per_slab = np.array(
        [lp_quadrature(mags[m], p, grid.cell_volume) for m in range(grid.M)]
    )
    t = 0.0
    if tail is not None:
        tphys = (np.fft.ifftn(tail, axes=tuple(range(1, 1 + grid.d)))* grid.mode_count).real
        t = lp_quadrature(np.sqrt(np.sum(tphys**2, axis=0)), p, grid.cell_volume)
    return per_slab, t


def _vertical_lq(
    per_slab: np.ndarray, tail_norm: float, grid: Grid, cl: CLIndex, has_tail: bool
) -> float:
    """Exact L^q of a piecewise-constant profile over the interval (a, b)."""
    a, b = cl.interval
    q = cl.q
    edges = grid.edges()
    weights = np.clip(np.minimum(b, edges[1:]) - np.maximum(a, edges[:-1]), 0.0, None)
    tail_weight = 0.0
    if b > grid.x_max and has_tail:
        tail_weight = b - max(a, grid.x_max)  # inf when b is inf
    if math.isinf(q):
        vals = per_slab[weights > 0.0]
        out = float(np.max(vals)) if vals.size else 0.0
        if tail_weight > 0.0:
            out = max(out, tail_norm)
        return out
    acc = float(np.sum(weights * per_slab**q))
    if tail_weight > 0.0 and tail_norm > 0.0:
        if math.isinf(tail_weight):
            return INF
        acc += tail_weight * tail_norm**q
    return acc ** (1.0 / q)


def chemin_lerner_norm(u: HalfSpaceField, cl: CLIndex, idx: BesovIndex) -> float:
    """l^r over j of 2^{sj} || ||Delta_j u(., x_n)||_{L^p} ||_{L^q(a,b)}."""
    grid = u.grid
    has_tail = u.tail is not None
    vals = []
    for j in grid.dyadic_range():
        per_slab, tail_norm = _slab_block_norms(u, j, idx.p)
        vals.append(2.0 ** (idx.s * j) * _vertical_lq(per_slab, tail_norm, grid, cl, has_tail))
    return lr_accumulate(np.array(vals), idx.r)


# --- paraproduct decomposition ---------------------------------------------


@dataclass
class BonyParts:
    """fg split into f-low paraproduct, g-low paraproduct, and the resonant part."""

    f_low_g_high: TangentialField
    g_low_f_high: TangentialField
    resonant: TangentialField

    def total(self) -> TangentialField:
        return self.f_low_g_high + self.g_low_f_high + self.resonant


def bony_decompose(f: TangentialField, g: TangentialField) -> BonyParts:
    """Paraproduct split of the (dealiased) product of two scalar fields.

    f_low_g_high collects sum_k (S_{k-3} f)(Delta_k g), g_low_f_high the mirror
    image, and resonant the pairs with |k - l| <= 2.  The three parts sum to the
    dealiased product exactly because the block pairs partition the index set.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.ncomp != 1 or g.ncomp != 1:
        raise ValueError("bony_decompose expects scalar fields")
    grid = f.grid
    rng_j = grid.dyadic_range()
    js = list(rng_j)
    fb = {j: f.coeffs * grid.lp_symbol(j) for j in js}
    gb = {j: g.coeffs * grid.lp_symbol(j) for j in js}

    def paraproduct(low_blocks, high_blocks):
        acc = np.zeros((1,) + grid.shape, dtype=np.complex128)
        running = np.zeros((1,) + grid.shape, dtype=np.complex128)
        for k in js:
            if k - 3 in low_blocks:
                running = running + low_blocks[k - 3]
            if np.any(running) and np.any(high_blocks[k]):
                acc += dealiased_product_coeffs(running, high_blocks[k], grid)
        return acc

    t_fg = paraproduct(fb, gb)
    t_gf = paraproduct(gb, fb)
    res = np.zeros((1,) + grid.shape, dtype=np.complex128)
    for k in js:
        if not np.any(fb[k]):
            continue
        for l in js:
            if abs(k - l) <= 2 and np.any(gb[l]):
                res += dealiased_product_coeffs(fb[k], gb[l], grid)
    return BonyParts(
        TangentialField(grid, t_fg, _trust=True),
        TangentialField(grid, t_gf, _trust=True),
        TangentialField(grid, res, _trust=True),
    )


# --- product estimate battery ------------------------------------------------


def validate_product_exponents(n: int, p: float, q: float):
    """Hypotheses under which the critical product estimate is asserted."""
    if n not in (3, 4):
        raise ValueError(f"supported dimensions are n=3 and n=4, got n={n}")
    if not (1.0 <= p):
        raise ValueError(f"index p must lie in [1, inf), got {p}")
    if not (1.0 <= q):
        raise ValueError(f"index q must lie in [1, inf], got {q}")
    q_star = max(2.0, q)
    q_star_conj = 1.0 if math.isinf(q_star) else q_star / (q_star - 1.0)
    if not p < q_star_conj * (n - 1):
        raise ValueError(
            f"violated constraint: p < (n-1) * conj(q*) requires p < {q_star_conj * (n - 1)}, got p={p}"
        )
    if n == 3 and math.isinf(q):
        raise ValueError("violated constraint: q < inf is required when n = 3")


def product_norm_indices(n: int, p: float, q: float, r: float):
    """Critical factor and product indices for the bilinear estimate."""
    d = n - 1
    q_star = max(2.0, q)
    factor_cl = CLIndex(q_star)
    factor_idx = BesovIndex(d / p + (0.0 if math.isinf(q_star) else 1.0 / q_star) - 1.0, p, r)
    prod_q = q_star / 2.0 if not math.isinf(q_star) else INF
    prod_cl = CLIndex(prod_q)
    prod_idx = BesovIndex(d / p + (0.0 if math.isinf(q_star) else 2.0 / q_star) - 2.0, p, r)
    return factor_cl, factor_idx, prod_cl, prod_idx


@dataclass
class BilinearReport:
    n: int
    p: float
    q: float
    r: float
    ratios: list = field(default_factory=list)

    @property
    def max(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios else 0.0


def slab_product(f: HalfSpaceField, g: HalfSpaceField) -> HalfSpaceField:
    """Slab-wise dealiased product of two scalar half-space fields."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.ncomp != 1 or g.ncomp != 1:
        raise ValueError("slab_product expects scalar fields")
    slabs = dealiased_product_coeffs(f.slabs, g.slabs, f.grid)
    tail = None
    if f.tail is not None and g.tail is not None:
        tail = dealiased_product_coeffs(f.tail, g.tail, f.grid)
    return HalfSpaceField(f.grid, slabs, tail, _trust=True)


def bilinear_estimate_check(
    n: int,
    p: float,
    q: float,
    r: float,
    trials: int = 100,
    seed: int = 0,
    grid: Grid | None = None,
) -> BilinearReport:
    """Measure ||fg|| / (||f|| ||g||) in the critical indices over seeded trials."""
    validate_product_exponents(n, p, q)
    if grid is None:
        from .grid import desk_grid

        grid = desk_grid(n)
    factor_cl, factor_idx, prod_cl, prod_idx = product_norm_indices(n, p, q, r)
    rng = np.random.default_rng(seed)
    report = BilinearReport(n, p, q, r)
    for _ in range(trials):
        lo = rng.uniform(grid.kappa_min, grid.kappa_max / 4.0)
        hi = rng.uniform(2.0 * lo, grid.kappa_max)
        f = HalfSpaceField.random(grid, 1, rng, band=(lo, hi))
        g = HalfSpaceField.random(grid, 1, rng, band=(lo, hi))
        nf = chemin_lerner_norm(f, factor_cl, factor_idx)
        ng = chemin_lerner_norm(g, factor_cl, factor_idx)
        if nf == 0.0 or ng == 0.0:
            continue
        nh = chemin_lerner_norm(slab_product(f, g), prod_cl, prod_idx)
        report.ratios.append(nh / (nf * ng))
    return report


# --- dyadic rescaling helpers -------------------------------------------------


def dyadic_rescale_tangential(f: TangentialField, power: float) -> TangentialField:
    """f_lam(x) = lam^power f(lam x) for lam = 2, on the companion grid."""
    return TangentialField(f.grid.rescaled(2.0), (2.0**power) * f.coeffs, _trust=True)


def dyadic_rescale_half(u: HalfSpaceField, power: float) -> HalfSpaceField:
    """Same rescaling for slab fields; slab m maps to slab m on the halved extent."""
    tail = None if u.tail is None else (2.0**power) * u.tail
    return HalfSpaceField(u.grid.rescaled(2.0), (2.0**power) * u.slabs, tail, _trust=True)
