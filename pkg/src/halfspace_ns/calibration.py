"""Calibrated constants for the contraction gates.

The smallness thresholds that guarantee Picard convergence depend on operator
norms of the linear solvers and the product estimate on a concrete grid.
Rather than trusting pencil-and-paper constants, this module measures them:

  * c0: twice the largest observed ratio among boundary-data response,
    forcing response, and the quadratic response, in the solution norm;
  * delta0 = 1 / (12 c0^2): admissible data size;
  * eps0 = 1 / (4 c0): radius of the contraction ball.

Constants for the standard grids and exponents live in data/calibration.json,
regenerated by `python3 -m halfspace_ns.calibration --write`.  Lookups for
other (grid, exponent) combinations are measured on the fly and cached for
the process lifetime.  Frozen bilinear-ratio and a-priori-estimate baselines
for the regression criteria live in the same file.
"""

from __future__ import annotations

import argparse
import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .besov import (
    BesovIndex,
    CLIndex,
    besov_norm,
    bilinear_estimate_check,
    chemin_lerner_norm,
    product_norm_indices,
    validate_product_exponents,
)
from .fields import HalfSpaceField, TangentialField
from .grid import Grid, desk_grid
from .spectral import tensor_product

SOLVER_KEYS = [
    (3, 2.0, 2.0, 2.0),
    (4, 2.0, 2.0, 2.0),
    (4, 2.0, math.inf, 2.0),
]
BILINEAR_REGIMES = [
    (3, 2.0, 2.0, 2.0),
    (3, 2.0, 1.0, 2.0),
    (3, 1.0, 2.0, 2.0),
]
MAXREG_PAIRS = [(1.0, 2.0), (2.0, 2.0), (2.0, math.inf), (math.inf, math.inf)]

_BATTERY_SEED = 27182818
_memory: dict[str, "CalibrationRecord"] = {}
_frozen_cache: dict | None = None


@dataclass(frozen=True)
class CalibrationRecord:
    c0: float
    delta0: float
    eps0: float
    ratio_boundary: float
    ratio_forcing: float
    ratio_quadratic: float
    trials: int


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:g}"


def solver_key(n: int, p: float, q: float, r: float, grid: Grid) -> str:
    return f"n{n}_p{_fmt(p)}_q{_fmt(q)}_r{_fmt(r)}_{grid.key()}"


def solution_norm_indices(n: int, p: float, q: float, r: float):
    """Stopping-norm indices: q* = max(2, q) averaging at critical regularity."""
    d = n - 1
    q_star = max(2.0, q)
    return CLIndex(q_star), BesovIndex(d / p + 1.0 / q_star - 1.0, p, r)


def data_norm_indices(n: int, p: float, q: float, r: float):
    d = n - 1
    idx_a = BesovIndex(d / p - 1.0, p, r)
    cl_f = CLIndex(q)
    idx_f = BesovIndex(d / p + 1.0 / q - 2.0, p, r)
    return idx_a, cl_f, idx_f


def solver_battery(
    n: int,
    p: float,
    q: float,
    r: float,
    grid: Grid | None = None,
    trials: int = 20,
    seed: int = _BATTERY_SEED,
) -> CalibrationRecord:
    """Measure the three operator-norm ratios over a seeded trial battery."""
    from .stokes import force_operator, linear_solve

    validate_product_exponents(n, p, q)
    if grid is None:
        grid = desk_grid(n)
    cl_u, idx_u = solution_norm_indices(n, p, q, r)
    idx_a, cl_f, idx_f = data_norm_indices(n, p, q, r)
    nv = grid.d + 1
    rng = np.random.default_rng(seed)
    r_bnd, r_force, r_quad = 0.0, 0.0, 0.0
    for t in range(trials):
        tail_ok = math.isinf(q)
        with_tail = tail_ok and t % 2 == 1
        a = TangentialField.random(grid, nv, rng, band=(grid.kappa_min, grid.kappa_max))
        u_b = linear_solve(a).sample()
        na = besov_norm(a, idx_a)
        if na > 0.0:
            r_bnd = max(r_bnd, chemin_lerner_norm(u_b, cl_u, idx_u) / na)

        F = HalfSpaceField.random(
            grid, nv * nv, rng, band=(grid.kappa_min, grid.kappa_max), with_tail=with_tail
        )
        u_f = force_operator(F).sample()
        nf = chemin_lerner_norm(F, cl_f, idx_f)
        if 0.0 < nf < math.inf:
            r_force = max(r_force, chemin_lerner_norm(u_f, cl_u, idx_u) / nf)

        v = HalfSpaceField.random(grid, nv, rng, band=(grid.kappa_min, grid.kappa_max), with_tail=with_tail)
        w = HalfSpaceField.random(grid, nv, rng, band=(grid.kappa_min, grid.kappa_max), with_tail=with_tail)
        nv_norm = chemin_lerner_norm(v, cl_u, idx_u)
        nw_norm = chemin_lerner_norm(w, cl_u, idx_u)
        if nv_norm > 0.0 and nw_norm > 0.0:
            u_q = force_operator(tensor_product(v, w)).sample()
            r_quad = max(r_quad, chemin_lerner_norm(u_q, cl_u, idx_u) / (nv_norm * nw_norm))

    c0 = 2.0 * max(r_bnd, r_force, r_quad)
    return CalibrationRecord(
        c0=c0,
        delta0=1.0 / (12.0 * c0 * c0),
        eps0=1.0 / (4.0 * c0),
        ratio_boundary=r_bnd,
        ratio_forcing=r_force,
        ratio_quadratic=r_quad,
        trials=trials,
    )


def limit_battery(
    grid: Grid | None = None, trials: int = 20, seed: int = _BATTERY_SEED
) -> CalibrationRecord:
    """Same battery for the tangential limit system (n = 4)."""
    from .profile import limit_force_solve

    if grid is None:
        grid = desk_grid(4)
    d = grid.d
    n = d + 1
    idx_u = BesovIndex(d / 2.0 - 1.0, 2.0, 2.0)
    idx_g = BesovIndex(d / 2.0 - 2.0, 2.0, 2.0)
    rng = np.random.default_rng(seed)
    r_force, r_quad = 0.0, 0.0
    for _ in range(trials):
        g = TangentialField.random(grid, n * d, rng, band=(grid.kappa_min, grid.kappa_max))
        u = limit_force_solve(g)
        ng = besov_norm(g, idx_g)
        if ng > 0.0:
            r_force = max(r_force, besov_norm(u, idx_u) / ng)
        v = TangentialField.random(grid, n, rng, band=(grid.kappa_min, grid.kappa_max))
        w = TangentialField.random(grid, n, rng, band=(grid.kappa_min, grid.kappa_max))
        nv_ = besov_norm(v, idx_u)
        nw_ = besov_norm(w, idx_u)
        if nv_ > 0.0 and nw_ > 0.0:
            from .spectral import dealiased_product_coeffs

            prod = np.empty((n * d,) + grid.shape, dtype=np.complex128)
            for k in range(n):
                for m in range(d):
                    prod[k * d + m] = dealiased_product_coeffs(
                        v.coeffs[k][None], w.coeffs[m][None], grid
                    )[0]
            uq = limit_force_solve(TangentialField(grid, prod, _trust=True))
            r_quad = max(r_quad, besov_norm(uq, idx_u) / (nv_ * nw_))
    c0 = 2.0 * max(r_force, r_quad)
    return CalibrationRecord(
        c0=c0,
        delta0=1.0 / (12.0 * c0 * c0),
        eps0=1.0 / (4.0 * c0),
        ratio_boundary=0.0,
        ratio_forcing=r_force,
        ratio_quadratic=r_quad,
        trials=trials,
    )


# --- frozen storage -------------------------------------------------------------


def _data_path() -> Path:
    return Path(str(resources.files("halfspace_ns") / "data" / "calibration.json"))


def load_frozen() -> dict:
    global _frozen_cache
    if _frozen_cache is None:
        path = _data_path()
        if path.exists():
            _frozen_cache = json.loads(path.read_text())
        else:
            _frozen_cache = {"version": 1, "solver": {}, "limit": {}, "bilinear": {}, "maxreg": {}}
    return _frozen_cache


def get_solver_calibration(
    n: int, p: float, q: float, r: float, grid: Grid | None = None
) -> CalibrationRecord:
    """Frozen constants when available, else a measured-and-cached battery."""
    if grid is None:
        grid = desk_grid(n)
    key = solver_key(n, p, q, r, grid)
    if key in _memory:
        return _memory[key]
    frozen = load_frozen().get("solver", {})
    if key in frozen:
        rec = CalibrationRecord(**frozen[key])
    else:
        rec = solver_battery(n, p, q, r, grid)
    _memory[key] = rec
    return rec


def get_limit_calibration(grid: Grid | None = None) -> CalibrationRecord:
    if grid is None:
        grid = desk_grid(4)
    key = f"limit_{grid.key()}"
    if key in _memory:
        return _memory[key]
    frozen = load_frozen().get("limit", {})
    if key in frozen:
        rec = CalibrationRecord(**frozen[key])
    else:
        rec = limit_battery(grid)
    _memory[key] = rec
    return rec


def bilinear_key(n: int, p: float, q: float, r: float) -> str:
    return f"n{n}_p{_fmt(p)}_q{_fmt(q)}_r{_fmt(r)}"


def get_bilinear_baseline(n: int, p: float, q: float, r: float) -> float | None:
    entry = load_frozen().get("bilinear", {}).get(bilinear_key(n, p, q, r))
    return None if entry is None else float(entry["max_ratio"])


def maxreg_key(q: float, q1: float) -> str:
    return f"q{_fmt(q)}_q1{_fmt(q1)}"


def get_maxreg_baseline(q: float, q1: float) -> float | None:
    entry = load_frozen().get("maxreg", {}).get(maxreg_key(q, q1))
    return None if entry is None else float(entry["max_ratio"])


def write_frozen(path: Path | None = None, trials: int = 20) -> dict:
    """Measure every standard battery and write the frozen JSON."""
    from .stokes import max_regularity_check

    out: dict = {"version": 1, "solver": {}, "limit": {}, "bilinear": {}, "maxreg": {}}
    for n, p, q, r in SOLVER_KEYS:
        grid = desk_grid(n)
        rec = solver_battery(n, p, q, r, grid, trials=trials)
        out["solver"][solver_key(n, p, q, r, grid)] = asdict(rec)
    grid4 = desk_grid(4)
    out["limit"][f"limit_{grid4.key()}"] = asdict(limit_battery(grid4, trials=trials))
    for n, p, q, r in BILINEAR_REGIMES:
        report = bilinear_estimate_check(n, p, q, r, trials=100, seed=_BATTERY_SEED)
        out["bilinear"][bilinear_key(n, p, q, r)] = {
            "max_ratio": report.max,
            "median_ratio": report.median,
            "trials": len(report.ratios),
        }
    for q, q1 in MAXREG_PAIRS:
        report = max_regularity_check(3, q, q1, trials=20, seed=_BATTERY_SEED)
        out["maxreg"][maxreg_key(q, q1)] = {
            "max_ratio": report.max,
            "median_ratio": report.median,
            "trials": len(report.ratios),
        }
    if path is None:
        path = _data_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    global _frozen_cache
    _frozen_cache = out
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python3 -m halfspace_ns.calibration",
        description="Measure and freeze the contraction-gate constants.",
    )
    parser.add_argument("--write", action="store_true", help="regenerate the frozen JSON")
    parser.add_argument("--out", type=Path, default=None, help="alternative output path")
    parser.add_argument("--trials", type=int, default=20)
    args = parser.parse_args(argv)
    if not args.write:
        parser.error("nothing to do; pass --write")
    data = write_frozen(args.out, trials=args.trials)
    for section in ("solver", "limit", "bilinear", "maxreg"):
        for key, val in data[section].items():
            print(f"{section}:{key}: {val}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
