"""Numbered verification gates over the whole package.

Each criterion is a self-contained battery with explicit tolerances (and a
runtime cap where one applies).  `run_all` prints one line per criterion and
is shared by the acceptance tests and the `verify` CLI subcommand.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .besov import (
    BesovIndex,
    besov_norm,
    bilinear_estimate_check,
    block_lp_norm,
    bony_decompose,
    chemin_lerner_norm,
    dyadic_rescale_half,
    dyadic_rescale_tangential,
    product_norm_indices,
)
from .calibration import (
    _BATTERY_SEED,
    BILINEAR_REGIMES,
    MAXREG_PAIRS,
    get_bilinear_baseline,
    get_maxreg_baseline,
)
from .fields import HalfSpaceField, TangentialField
from .fixed_point import SolverConfig, nonlinear_map, picard_solve, residual_report
from .grid import desk_grid
from .kernels import inverse_ft_oracle, l_apply, poisson_apply
from .presets import make_preset
from .profile import pde_residual, profile_ladder
from .spectral import dealiased_product, tensor_product
from .stokes import (
    evolution_relation_check,
    linear_solve,
    max_regularity_check,
    whole_space_reflection_oracle,
    whole_space_solution,
)

ORACLE_SEED = 20260818
_BASELINE_SLACK = 1.0 + 1e-6  # allow reduction-order jitter against frozen maxima


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.index:2d}/10] {self.name:<32} {status}  ({self.elapsed:6.1f}s)  {self.details}"


def _few_mode_forcing(grid, rng, n_modes=5, band=(1.5, 3.2)):
    """Band-limited tail-free forcing on a handful of Hermitian-paired modes."""
    nv = grid.d + 1
    F = HalfSpaceField.random(grid, nv * nv, rng, band=band, with_tail=False)
    mask = np.zeros(grid.shape, bool)
    live_idx = np.argwhere(~grid.dead & (grid.kappa >= band[0]) & (grid.kappa <= band[1]))
    sel = live_idx[rng.choice(len(live_idx), size=n_modes, replace=False)]
    for ij in sel:
        mask[tuple(ij)] = True
        mask[tuple((-np.asarray(ij)) % grid.N)] = True
    return HalfSpaceField(grid, F.slabs * mask, None, _trust=True)


class VerificationSuite:
    """Runs the ten gates; numba is warmed once so caps measure steady state."""

    def __init__(self, echo=None):
        self.echo = echo
        self._warmed = False

    def _warmup(self):
        if not self._warmed:
            backend.warmup()
            self._warmed = True

    # --- criterion bodies -------------------------------------------------

    def _c1_kernel_oracle(self):
        rng = np.random.default_rng(ORACLE_SEED)
        worst = 0.0
        for j in (1, 2, 3, 4, 5):
            checked = 0
            while checked < 50:
                kappa = rng.uniform(0.1, 10.0)
                z = rng.uniform(-5.0, 5.0)
                if kappa * abs(z) > 10.0:
                    continue  # keep closed values above the quadrature floor
                quad_val, closed, _ = inverse_ft_oracle(j, kappa, z)
                worst = max(worst, abs(quad_val - closed) / max(abs(closed), 1e-300))
                checked += 1
        return worst <= 1e-6, f"worst relative error {worst:.2e} (gate 1e-06)"

    def _c2_trace_identities(self):
        grid = desk_grid(3)
        rng = np.random.default_rng(ORACLE_SEED + 2)
        x0 = np.array([0.0])
        worst = 0.0
        for _ in range(10):
            f = HalfSpaceField.random(grid, 1, rng)
            vals = {
                (j, s): l_apply(j, s, grid, f.slabs[0], None, x0)[0]
                for j, s in [(4, +1), (5, -1), (2, -1), (1, +1)]
            }
            worst = max(worst, float(np.abs(vals[(4, +1)]).max()))
            worst = max(worst, float(np.abs(vals[(5, -1)]).max()))
            worst = max(worst, float(np.abs(vals[(2, -1)] + vals[(1, +1)]).max()))
        return worst <= 1e-12, f"worst identity residual {worst:.2e} (gate 1e-12)"

    def _c3_poisson_envelope(self):
        grid = desk_grid(3)
        rng = np.random.default_rng(ORACLE_SEED + 3)
        # eigenfunction exactness on a single mode
        coeffs = np.zeros((1,) + grid.shape, dtype=np.complex128)
        coeffs[0, 8, 0] = 0.5
        coeffs[0, -8, 0] = 0.5
        mode = TangentialField(grid, coeffs)
        kap = grid.kappa[8, 0]
        eig_err = 0.0
        for x in (0.3, 1.0, 4.0):
            got = poisson_apply(mode, x).coeffs
            eig_err = max(eig_err, float(np.abs(got - np.exp(-x * kap) * mode.coeffs).max()))
        # composition law
        f = TangentialField.random(grid, 1, rng)
        comp = poisson_apply(poisson_apply(f, 0.7), 1.1).coeffs - poisson_apply(f, 1.8).coeffs
        comp_err = float(np.abs(comp).max())
        # envelope constant at decay rate c = 0.4
        xs = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0]
        c_fit = 0.0
        for j in grid.dyadic_range():
            base = {p: block_lp_norm(f, j, p) for p in (1.0, 2.0, math.inf)}
            if base[2.0] == 0.0:
                continue
            for x in xs:
                g = poisson_apply(f, x)
                for p in (1.0, 2.0, math.inf):
                    if base[p] > 0.0:
                        ratio = block_lp_norm(g, j, p) / base[p]
                        c_fit = max(c_fit, ratio * math.exp(0.4 * 2.0**j * x))
        ok = eig_err <= 1e-12 and comp_err <= 1e-13 and c_fit <= 4.0
        return ok, (
            f"eigenfunction {eig_err:.1e} (1e-12), composition {comp_err:.1e} (1e-13), "
            f"envelope C {c_fit:.3f} at c=0.4 (gate 4)"
        )

    def _c4_linear_solver(self):
        grid = desk_grid(3)
        rng = np.random.default_rng(ORACLE_SEED + 4)
        heights = np.array([0.0, 0.25, 1.0, 3.0, 6.0])
        # boundary point plus slab centers spread over the column; the full
        # center grid is exercised by the unit tests, a spread keeps this
        # battery inside its runtime budget
        div_heights = np.array(
            [0.0, 0.0625, 0.4375, 1.0625, 2.0625, 3.0625, 4.5625, 6.0625, 7.4375, 7.9375]
        )
        worst = {"trace": 0.0, "divergence": 0.0, "evolution": 0.0, "reflection": 0.0}
        for _ in range(10):
            a = TangentialField.random(grid, 3, rng, band=(grid.kappa_min, grid.kappa_max))
            F = _few_mode_forcing(grid, rng)
            sol = linear_solve(a, F)
            worst["trace"] = max(worst["trace"], sol.trace_residual())
            worst["divergence"] = max(
                worst["divergence"], sol.divergence_residual(heights=div_heights)
            )
            ev = evolution_relation_check(a, F)
            worst["evolution"] = max(
                worst["evolution"], max(ev["tangential"], ev["normal"]) / ev["scale"]
            )
            plan = whole_space_solution(F)
            oracle = whole_space_reflection_oracle(F, heights)
            ours = plan.at_heights(heights)
            worst["reflection"] = max(
                worst["reflection"],
                float(np.abs(oracle - ours).max() / np.abs(ours).max()),
            )
        ok = (
            worst["trace"] <= 1e-10
            and worst["divergence"] <= 1e-10
            and worst["evolution"] <= 1e-10
            and worst["reflection"] <= 1e-6
        )
        return ok, (
            f"trace {worst['trace']:.1e}, div {worst['divergence']:.1e}, "
            f"evolution {worst['evolution']:.1e} (gates 1e-10), "
            f"reflection {worst['reflection']:.1e} (gate 1e-06)"
        )

    def _c5_boundary_regression(self):
        grid = desk_grid(3)
        coeffs = np.zeros((3,) + grid.shape, dtype=np.complex128)
        coeffs[2, 8, 0] = 0.5
        coeffs[2, -8, 0] = 0.5
        a = TangentialField(grid, coeffs)
        a_scale = float(np.abs(coeffs[2]).max())
        good = linear_solve(a, variant="corrected").divergence_residual()
        bad = linear_solve(a, variant="uncorrected").divergence_residual()
        ok = good <= 1e-12 and bad >= 1e-3 * a_scale
        return ok, (
            f"amended divergence {good:.1e} (gate 1e-12), "
            f"as-printed {bad:.2e} (must exceed {1e-3 * a_scale:.1e})"
        )

    def _c6_max_regularity(self):
        parts = []
        ok = True
        for q, q1 in MAXREG_PAIRS:
            rep = max_regularity_check(3, q, q1, trials=20, seed=_BATTERY_SEED)
            baseline = get_maxreg_baseline(q, q1)
            finite = len(rep.ratios) == 20 and all(math.isfinite(x) for x in rep.ratios)
            spread = rep.max <= 10.0 * rep.median
            frozen = baseline is not None and rep.max <= baseline * _BASELINE_SLACK
            ok = ok and finite and spread and frozen
            parts.append(
                f"(q={q:g},q1={q1:g}): max {rep.max:.3f} vs baseline "
                f"{baseline if baseline is not None else float('nan'):.3f}"
            )
        return ok, "; ".join(parts)

    def _c7_bilinear(self):
        grid = desk_grid(3)
        rng = np.random.default_rng(ORACLE_SEED + 7)
        # exactness of the paraproduct split
        bony_err = 0.0
        for _ in range(5):
            f = TangentialField.random(grid, 1, rng)
            g = TangentialField.random(grid, 1, rng)
            total = bony_decompose(f, g).total()
            direct = dealiased_product(f, g)
            scale = max(float(np.abs(direct.coeffs).max()), 1e-300)
            bony_err = max(bony_err, float(np.abs(total.coeffs - direct.coeffs).max()) / scale)
        # frozen ratio baselines per exponent regime
        parts = []
        ok = bony_err <= 1e-12
        for n, p, q, r in BILINEAR_REGIMES:
            rep = bilinear_estimate_check(n, p, q, r, trials=100, seed=_BATTERY_SEED)
            baseline = get_bilinear_baseline(n, p, q, r)
            finite = all(math.isfinite(x) for x in rep.ratios) and rep.ratios
            frozen = baseline is not None and rep.max <= baseline * _BASELINE_SLACK
            ok = ok and bool(finite) and frozen
            parts.append(f"(p={p:g},q={q:g}): max {rep.max:.3f}")
        # ratio invariance under the dyadic rescaling
        factor_cl, factor_idx, prod_cl, prod_idx = product_norm_indices(3, 2.0, 2.0, 2.0)
        from .besov import slab_product

        f = HalfSpaceField.random(grid, 1, rng, band=(0.5, 4.0))
        g = HalfSpaceField.random(grid, 1, rng, band=(0.5, 4.0))

        def ratio(ff, gg):
            return chemin_lerner_norm(slab_product(ff, gg), prod_cl, prod_idx) / (
                chemin_lerner_norm(ff, factor_cl, factor_idx)
                * chemin_lerner_norm(gg, factor_cl, factor_idx)
            )

        base_ratio = ratio(f, g)
        scaled_ratio = ratio(dyadic_rescale_half(f, 1.0), dyadic_rescale_half(g, 1.0))
        invariance = abs(scaled_ratio - base_ratio) / base_ratio
        ok = ok and invariance <= 1e-9
        return ok, (
            f"identity {bony_err:.1e} (1e-12); " + "; ".join(parts)
            + f"; rescale drift {invariance:.1e} (gate 1e-09)"
        )

    def _c8_nonlinear_solve(self):
        cfg = SolverConfig(n=3)
        data = make_preset("gaussian-bump", cfg, amplitude=0.5)
        res = picard_solve(data.a, data.F, cfg)
        ratios = [b / a for a, b in zip(res.diffs, res.diffs[1:]) if a > 0.0]
        rep = residual_report(res, data.a, data.F, cfg)
        calib = cfg.calibration()
        rng = np.random.default_rng(ORACLE_SEED + 8)
        raw = HalfSpaceField.random(cfg.grid, 3, rng, band=(0.25, 4.0))
        u0 = raw * (0.5 * calib.eps0 / cfg.solution_norm(raw))
        res2 = picard_solve(data.a, data.F, cfg, u0=u0)
        init_gap = cfg.solution_norm(res2.u - res.u)
        ok = (
            res.converged
            and res.iterations <= 30
            and all(x <= 0.5 for x in ratios)
            and all(v <= 1e-9 for v in rep.values())
            and init_gap <= 1e-9
        )
        return ok, (
            f"{res.iterations} iterations, worst ratio "
            f"{max(ratios) if ratios else 0.0:.2e} (gate 0.5), residuals fp "
            f"{rep['fixed_point']:.1e} div {rep['divergence']:.1e} trace "
            f"{rep['trace']:.1e} (gates 1e-09), two-start gap {init_gap:.1e} (gate 1e-09)"
        )

    def _c9_scaling(self):
        cfg = SolverConfig(n=3)
        pa = make_preset("single-mode", cfg, amplitude=0.25)
        pf = make_preset("gaussian-bump", cfg, amplitude=0.25)
        a, F = pa.a, pf.F
        res = picard_solve(a, F, cfg)
        idx_a, cl_f, idx_f = cfg.data_indices()
        a2 = dyadic_rescale_tangential(a, 1.0)
        F2 = dyadic_rescale_half(F, 2.0)
        cfg2 = SolverConfig(n=3, grid=cfg.grid.rescaled(2.0), enforce_smallness=False)
        res2 = picard_solve(a2, F2, cfg2)
        drifts = {
            "boundary-data": abs(besov_norm(a2, idx_a) - besov_norm(a, idx_a))
            / besov_norm(a, idx_a),
            "forcing-data": abs(
                chemin_lerner_norm(F2, cl_f, idx_f) - chemin_lerner_norm(F, cl_f, idx_f)
            )
            / chemin_lerner_norm(F, cl_f, idx_f),
            "solution": abs(res2.solution_norm - res.solution_norm) / res.solution_norm,
        }
        field_gap = cfg2.solution_norm(res2.u - dyadic_rescale_half(res.u, 1.0))
        drifts["field"] = field_gap / res.solution_norm
        ok = all(v <= 1e-8 for v in drifts.values())
        detail = ", ".join(f"{k} {v:.1e}" for k, v in drifts.items())
        return ok, detail + " (gates 1e-08 relative)"

    def _c10_profile(self):
        cfg = SolverConfig(n=4, q=math.inf)
        tol = cfg.tol
        exact = make_preset("profile-consistent", cfg, amplitude=0.5, perturb=0.0)
        res = picard_solve(exact.a, exact.F, cfg)
        ladder = profile_ladder(res.u, exact.profile)
        self_consistent = max(ladder.distances) <= 10.0 * tol

        # limit-system residual of the far field actually reached
        eff = exact.F - tensor_product(res.u, res.u)
        grid = cfg.grid
        d, n = grid.d, grid.d + 1
        g_eff = np.empty((n * d,) + grid.shape, dtype=np.complex128)
        tail = eff.tail_or_zero()
        for k in range(n):
            for m in range(d):
                g_eff[k * d + m] = tail[k * n + m]
        resid = pde_residual(
            res.u.tail_field(), TangentialField(grid, g_eff, _trust=True)
        )

        perturbed = make_preset("profile-consistent", cfg, amplitude=0.5, perturb=0.2)
        res_p = picard_solve(perturbed.a, perturbed.F, cfg)
        ladder_p = profile_ladder(res_p.u, perturbed.profile)
        decay = ladder_p.decay_ratio()
        ok = (
            self_consistent
            and resid <= 1e-9
            and ladder_p.monotone()
            and decay <= 0.2
        )
        return ok, (
            f"self-consistency max D {max(ladder.distances):.1e} (gate {10 * tol:.0e}), "
            f"limit residual {resid:.1e} (gate 1e-09), perturbed decay "
            f"{decay:.4f} (gate 0.2), monotone {ladder_p.monotone()}"
        )

    # --- orchestration ------------------------------------------------------

    CRITERIA = [
        (1, "kernel quadrature oracle", "_c1_kernel_oracle", 10.0),
        (2, "vertical trace identities", "_c2_trace_identities", None),
        (3, "poisson block envelope", "_c3_poisson_envelope", None),
        (4, "linear solver residuals", "_c4_linear_solver", 60.0),
        (5, "boundary correction regression", "_c5_boundary_regression", None),
        (6, "vertical-gain a priori bound", "_c6_max_regularity", None),
        (7, "critical product bound", "_c7_bilinear", None),
        (8, "nonlinear contraction solve", "_c8_nonlinear_solve", 300.0),
        (9, "dyadic scaling criticality", "_c9_scaling", None),
        (10, "far-field profile ladder", "_c10_profile", 600.0),
    ]

    def run(self, index: int) -> CriterionResult:
        for idx, name, attr, cap in self.CRITERIA:
            if idx == index:
                self._warmup()
                t0 = time.perf_counter()
                passed, details = getattr(self, attr)()
                elapsed = time.perf_counter() - t0
                if cap is not None and elapsed > cap:
                    # Keep details deterministic on the passing path; the cap
                    # message appears only when the budget is blown.
                    details += f"; exceeded runtime cap {cap:.0f}s"
                    passed = False
                result = CriterionResult(idx, name, passed, details, elapsed)
                if self.echo is not None:
                    self.echo(result.line())
                return result
        raise ValueError(f"no criterion {index}; valid indices are 1..10")

    def run_all(self, indices=None) -> list[CriterionResult]:
        if indices is None:
            indices = [idx for idx, *_ in self.CRITERIA]
        return [self.run(i) for i in indices]


def run_all(echo=print) -> list[CriterionResult]:
    return VerificationSuite(echo=echo).run_all()
