"""The x-independent limit system and asymptotic-profile diagnostics.

Far from the boundary the velocity approaches a tangential profile u_bar that
solves the reduced (x-independent) system: modewise

    kappa^2 u_bar' = P' w,        w_m = sum_l i xi_l g_{m l},
    kappa^2 u_bar_n = sum_l i xi_l g_{n l},

where P' is the tangential Leray projector and g the n x d block of forcing
columns tangent to the boundary (constant tails only; x-dependence has died
off).  The nonlinear limit system feeds g - u_bar (x) u_bar' back through the
same solve.  profile_distance measures how far a half-space field sits from a
candidate profile in the sup-in-x critical norm beyond a cutoff height R.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .besov import INF, BesovIndex, CLIndex, besov_norm, chemin_lerner_norm
from .calibration import CalibrationRecord, get_limit_calibration, get_solver_calibration
from .fields import HalfSpaceField, TangentialField
from .grid import Grid, desk_grid
from .spectral import dealiased_product_coeffs


def _require_limit_dimension(grid: Grid):
    n = grid.d + 1
    if n != 4:
        raise ValueError(f"the limit system is defined for n = 4 only, got n = {n}")


def limit_force_solve(g: TangentialField) -> TangentialField:
    """Solve the linear limit system for an n x d forcing block (row-major)."""
    grid = g.grid
    d = grid.d
    n = d + 1
    if g.ncomp != n * d:
        raise ValueError(f"limit forcing needs {n * d} components, got {g.ncomp}")
    kap2 = grid.kappa_safe**2
    w = np.empty((n,) + grid.shape, dtype=np.complex128)
    for k in range(n):
        w[k] = sum(1j * grid.xi[ell] * g.coeffs[k * d + ell] for ell in range(d))
    stretch = sum(grid.xi[ell] * w[ell] for ell in range(d))
    out = np.empty_like(w)
    for ell in range(d):
        out[ell] = (w[ell] - grid.xi[ell] * stretch / kap2) / kap2
    out[d] = w[d] / kap2
    out[:, grid.dead] = 0.0
    return TangentialField(grid, out, _trust=True)


def limit_quadratic(u: TangentialField) -> TangentialField:
    """Tensor block u_k u_l (l tangential only), dealiased, row-major n x d."""
    grid = u.grid
    d = grid.d
    n = u.ncomp
    prod = np.empty((n * d,) + grid.shape, dtype=np.complex128)
    for k in range(n):
        for ell in range(d):
            prod[k * d + ell] = dealiased_product_coeffs(
                u.coeffs[k][None], u.coeffs[ell][None], grid
            )[0]
    return TangentialField(grid, prod, _trust=True)


def pde_residual(
    u: TangentialField, g: TangentialField, p: float = 2.0, r: float = 2.0
) -> float:
    """Besov norm of kappa^2 u - P' div' g at regularity d/p - 2."""
    grid = u.grid
    d = grid.d
    n = u.ncomp
    if g.ncomp != n * d:
        raise ValueError("forcing block does not match the velocity components")
    kap2 = grid.kappa_safe**2
    w = np.empty_like(u.coeffs)
    for k in range(n):
        w[k] = sum(1j * grid.xi[ell] * g.coeffs[k * d + ell] for ell in range(d))
    stretch = sum(grid.xi[ell] * w[ell] for ell in range(d))
    resid = kap2 * u.coeffs - w
    for ell in range(d):
        resid[ell] += grid.xi[ell] * stretch / kap2
    resid[:, grid.dead] = 0.0
    return besov_norm(
        TangentialField(grid, resid, _trust=True), BesovIndex(d / p - 2.0, p, r)
    )


class LimitSmallnessError(ValueError):
    """Limit-system data exceeds the calibrated threshold delta1."""

    def __init__(self, data_norm: float, threshold: float):
        self.data_norm = data_norm
        self.threshold = threshold
        super().__init__(
            f"limit data norm {data_norm:.6g} exceeds threshold {threshold:.6g}"
        )


@dataclass
class LimitResult:
    u_bar: TangentialField
    iterations: int
    converged: bool
    diffs: list[float]
    data_norm: float
    calibration: CalibrationRecord | None
    wall_times: list[float] = field(default_factory=list, repr=False)


def limit_system_solve(
    g: TangentialField,
    tol: float = 1e-12,
    max_iter: int = 100,
    enforce_smallness: bool = True,
    p: float = 2.0,
    r: float = 2.0,
) -> LimitResult:
    """Picard iteration u <- solve(g - u (x) u') for the nonlinear limit system."""
    from .fixed_point import NonconvergenceError

    grid = g.grid
    _require_limit_dimension(grid)
    d = grid.d
    idx_u = BesovIndex(d / p - 1.0, p, r)
    idx_g = BesovIndex(d / p - 2.0, p, r)
    dn = besov_norm(g, idx_g)
    calib = None
    if enforce_smallness:
        calib = get_limit_calibration(grid)
        delta1 = min(calib.delta0, get_solver_calibration(4, p, math.inf, r, grid).delta0)
        if not dn <= delta1:
            raise LimitSmallnessError(dn, delta1)

    u = limit_force_solve(g)
    diffs: list[float] = []
    times: list[float] = []
    converged = False
    for _ in range(max_iter):
        t0 = time.perf_counter()
        u_next = limit_force_solve(g - limit_quadratic(u))
        diff = besov_norm(u_next - u, idx_u)
        times.append(time.perf_counter() - t0)
        diffs.append(diff)
        u = u_next
        if diff <= tol:
            converged = True
            break
    if not converged:
        raise NonconvergenceError(diffs, tol)
    return LimitResult(
        u_bar=u,
        iterations=len(diffs),
        converged=converged,
        diffs=diffs,
        data_norm=dn,
        calibration=calib,
        wall_times=times,
    )


def limit_residual_report(result: LimitResult, g: TangentialField) -> dict[str, float]:
    """Residual of the full nonlinear limit system for a claimed solution."""
    g_eff = g - limit_quadratic(result.u_bar)
    return {
        "pde": pde_residual(result.u_bar, g_eff),
        "fixed_point": besov_norm(
            limit_force_solve(g_eff) - result.u_bar,
            BesovIndex(g.grid.d / 2.0 - 1.0, 2.0, 2.0),
        ),
    }


# --- distance to a profile --------------------------------------------------


def profile_distance(
    u: HalfSpaceField,
    profile: TangentialField,
    R: float = 0.0,
    p: float = 2.0,
    r: float = 2.0,
) -> float:
    """sup-in-x critical-norm distance to the constant profile beyond height R.

    The tail block participates whenever the window is unbounded, so for
    R >= x_max this is exactly the tail-block mismatch.
    """
    grid = u.grid
    if R < 0.0:
        raise ValueError("cutoff height R must be nonnegative")
    ext = HalfSpaceField.constant_in_x(profile, with_tail=True)
    diff = u - ext
    d = grid.d
    return chemin_lerner_norm(
        diff, CLIndex(INF, (R, INF)), BesovIndex(d / p - 1.0, p, r)
    )


@dataclass
class ProfileLadder:
    cutoffs: list[float]
    distances: list[float]

    @property
    def initial(self) -> float:
        return self.distances[0]

    @property
    def final(self) -> float:
        return self.distances[-1]

    def monotone(self, slack: float = 1e-12) -> bool:
        scale = max(self.initial, 1e-300)
        return all(
            b <= a + slack * scale
            for a, b in zip(self.distances, self.distances[1:])
        )

    def decay_ratio(self) -> float:
        return self.final / self.initial if self.initial > 0.0 else 0.0


def profile_ladder(
    u: HalfSpaceField,
    profile: TangentialField,
    steps: int = 8,
    p: float = 2.0,
    r: float = 2.0,
) -> ProfileLadder:
    """Distances D(R) on the ladder R = k x_max / steps, k = 0 .. steps - 1."""
    grid = u.grid
    _require_limit_dimension(grid)
    cutoffs = [k * grid.x_max / steps for k in range(steps)]
    distances = [profile_distance(u, profile, R, p=p, r=r) for R in cutoffs]
    return ProfileLadder(cutoffs, distances)
