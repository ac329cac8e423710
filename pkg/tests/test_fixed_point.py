"""Picard iteration for the nonlinear problem: gates, convergence, residuals."""

import math

import numpy as np
import pytest

from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.fixed_point import (
    NonconvergenceError,
    SmallnessError,
    SolverConfig,
    nonlinear_map,
    picard_solve,
    residual_report,
)
from halfspace_ns.grid import desk_grid
from halfspace_ns.presets import make_preset


@pytest.fixture(scope="module")
def cfg3():
    return SolverConfig(n=3)


@pytest.fixture(scope="module")
def solved3(cfg3):
    data = make_preset("gaussian-bump", cfg3, amplitude=0.5)
    res = picard_solve(data.a, data.F, cfg3)
    return data, res


def test_config_rejects_bad_exponents():
    with pytest.raises(ValueError):
        SolverConfig(n=3, q=math.inf)  # q must be finite in three dimensions
    with pytest.raises(ValueError):
        SolverConfig(n=3, p=4.0)  # p < q*'(n-1) fails
    with pytest.raises(ValueError):
        SolverConfig(n=5)
    with pytest.raises(ValueError):
        SolverConfig(n=3, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(n=3, grid=desk_grid(4))


def test_tail_forcing_needs_sup_exponent(cfg3):
    grid = cfg3.grid
    rng = np.random.default_rng(5)
    a = TangentialField.zeros(grid, 3)
    F = HalfSpaceField.random(grid, 9, rng, amplitude=1e-4, with_tail=True)
    with pytest.raises(ValueError, match="tail"):
        picard_solve(a, F, cfg3)


def test_zero_data_gives_zero_solution(cfg3):
    a = TangentialField.zeros(cfg3.grid, 3)
    res = picard_solve(a, None, cfg3)
    assert res.converged
    assert res.solution_norm == 0.0
    assert np.all(res.u.slabs == 0.0)


def test_convergence_and_residuals(cfg3, solved3):
    data, res = solved3
    assert res.converged
    assert res.iterations <= 30
    assert res.diffs[-1] <= cfg3.tol
    rep = residual_report(res, data.a, data.F, cfg3)
    assert rep["fixed_point"] < 1e-9
    assert rep["divergence"] < 1e-9
    assert rep["trace"] < 1e-9


def test_contraction_from_second_iteration(solved3):
    _, res = solved3
    ratios = res.contraction_ratios()
    assert all(r <= 0.5 for r in ratios)


def test_solution_smaller_than_data_scale(cfg3, solved3):
    data, res = solved3
    cal = cfg3.calibration()
    assert res.data_norm <= cal.delta0 * 0.5001
    assert res.solution_norm <= cal.eps0


def test_smallness_gate_trips_and_can_be_bypassed(cfg3):
    data = make_preset("single-mode", cfg3, amplitude=2.0)
    with pytest.raises(SmallnessError):
        picard_solve(data.a, data.F, cfg3)
    loose = SolverConfig(n=3, enforce_smallness=False)
    res = picard_solve(data.a, data.F, loose)
    assert res.converged
    assert res.calibration is None  # gate off, no battery run


def test_two_starts_agree(cfg3, solved3):
    data, res = solved3
    rng = np.random.default_rng(77)
    cal = cfg3.calibration()
    u0 = HalfSpaceField.random(cfg3.grid, 3, rng, band=(0.3, 3.0))
    u0 = u0 * (0.5 * cal.eps0 / cfg3.solution_norm(u0))
    res2 = picard_solve(data.a, data.F, cfg3, u0=u0)
    assert res2.converged
    drift = cfg3.solution_norm(res.u - res2.u)
    assert drift <= 1e-9


def test_nonconvergence_raises():
    cfg = SolverConfig(n=3, max_iter=1, enforce_smallness=False)
    data = make_preset("gaussian-bump", cfg, amplitude=0.5)
    with pytest.raises(NonconvergenceError) as err:
        picard_solve(data.a, data.F, cfg)
    assert len(err.value.diffs) == 1


def test_nonlinear_map_matches_manual_composition(cfg3, solved3):
    data, res = solved3
    sol = nonlinear_map(res.u, data.a, data.F)
    diff = cfg3.solution_norm(sol.sample() - res.u)
    assert diff <= cfg3.tol * 10


def test_four_dimensional_solve_with_tail():
    cfg = SolverConfig(n=4, q=math.inf)
    data = make_preset("tail-constant-force", cfg, amplitude=0.4, seed=11)
    res = picard_solve(data.a, data.F, cfg)
    assert res.converged
    assert res.u.tail is not None
    rep = residual_report(res, data.a, data.F, cfg)
    assert rep["fixed_point"] < 1e-9
