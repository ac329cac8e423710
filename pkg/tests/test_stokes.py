"""Linear half-space flow: boundary part, whole-space part, traces, oracle."""

import numpy as np
import pytest

from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.grid import desk_grid
from halfspace_ns.stokes import (
    boundary_operator,
    evolution_relation_check,
    force_operator,
    linear_solve,
    max_regularity_check,
    trace_whole_space,
    whole_space_reflection_oracle,
    whole_space_solution,
)


def _random_data(n, seed, band=(0.2, 5.0), with_tail=True):
    grid = desk_grid(n)
    rng = np.random.default_rng(seed)
    nv = grid.d + 1
    a = TangentialField.random(grid, nv, rng, band=band)
    F = HalfSpaceField.random(grid, nv * nv, rng, band=band, with_tail=with_tail)
    return grid, a, F


def test_boundary_flow_trace_and_divergence():
    grid, a, _ = _random_data(3, 0)
    sol = linear_solve(a)
    assert sol.trace_residual() == 0.0
    scale = np.abs(sol.boundary.A).max()
    assert sol.divergence_residual() / scale < 1e-14


def test_uncorrected_variant_leaves_divergence():
    grid, a, _ = _random_data(3, 1)
    scale = np.abs(a.coeffs).max()
    sol = linear_solve(a, variant="uncorrected")
    # the normal trace is order-one here, so the residual must be macroscopic
    assert sol.divergence_residual() / scale > 1e-3
    with pytest.raises(ValueError):
        boundary_operator(a, variant="bogus")


def test_boundary_flow_closed_derivatives():
    grid, a, _ = _random_data(3, 2)
    bnd = boundary_operator(a)
    xs = np.array([0.5625, 2.0625, 5.0625])
    e1, e2 = 1e-3, 5e-4
    for fn, dfn in ((bnd.at_heights, bnd.ddx_heights), (bnd.ddx_heights, bnd.d2dx2_heights)):
        fd1 = (fn(xs + e1) - fn(xs - e1)) / (2 * e1)
        fd2 = (fn(xs + e2) - fn(xs - e2)) / (2 * e2)
        rich = (4 * fd2 - fd1) / 3
        ana = dfn(xs)
        assert np.abs(rich - ana).max() / np.abs(ana).max() < 1e-9


def test_whole_space_closed_derivative():
    grid, _, F = _random_data(3, 3)
    plan = whole_space_solution(F)
    xs = np.array([0.5625, 2.0625, 5.0625])  # slab centers, away from edges
    e1, e2 = 1e-3, 5e-4
    fd1 = (plan.at_heights(xs + e1) - plan.at_heights(xs - e1)) / (2 * e1)
    fd2 = (plan.at_heights(xs + e2) - plan.at_heights(xs - e2)) / (2 * e2)
    rich = (4 * fd2 - fd1) / 3
    ana = plan.ddx_heights(xs)
    assert np.abs(rich - ana).max() / np.abs(ana).max() < 1e-9


def test_whole_space_trace_matches_height_zero():
    grid, _, F = _random_data(3, 4)
    plan = whole_space_solution(F)
    t0 = plan.trace0().coeffs
    at0 = plan.at_heights(np.array([0.0]))[:, 0]
    scale = np.abs(t0).max()
    np.testing.assert_allclose(t0, at0, atol=1e-13 * scale)
    tr = trace_whole_space(F)
    np.testing.assert_allclose(tr.coeffs, t0)


def test_whole_space_tail_is_far_field_limit():
    grid, _, F = _random_data(3, 5)
    plan = whole_space_solution(F)
    tail = plan.tail()
    # far beyond the slab region every kernel has decayed except the tail part
    far = plan.at_heights(np.array([300.0]))[:, 0]
    scale = max(np.abs(tail).max(), 1e-300)
    assert np.abs(far - tail).max() / scale < 1e-10


def test_full_solve_trace_divergence_tail():
    grid, a, F = _random_data(3, 6)
    sol = linear_solve(a, F)
    scale = max(np.abs(a.coeffs).max(), 1.0)
    assert sol.trace_residual() / scale < 1e-13
    u = sol.sample()
    assert u.tail is not None
    assert sol.divergence_residual() / u.amplitude() < 1e-12


def test_force_operator_zero_trace():
    grid, _, F = _random_data(4, 7)
    sol = force_operator(F)
    assert sol.trace_residual() < 1e-13 * max(np.abs(sol.tail()).max(), 1.0)


def test_forced_solve_splits_into_boundary_and_whole_space():
    grid, a, F = _random_data(3, 8)
    sol = linear_solve(a, F)
    xs = np.array([0.0, 0.8, 2.5])
    total = sol.at_heights(xs)
    parts = sol.boundary.at_heights(xs) + sol.plan.at_heights(xs)
    np.testing.assert_allclose(total, parts)


def test_evolution_relation_discriminates():
    grid, a, F = _random_data(3, 9)
    ok = evolution_relation_check(a, F)
    scale = ok["scale"]
    assert ok["tangential"] / scale < 1e-10
    assert ok["normal"] / scale < 1e-10
    assert ok["wiring"] / scale < 1e-12
    bad = evolution_relation_check(a, F, variant="uncorrected")
    assert bad["tangential"] / bad["scale"] > 1e-3


def _few_mode_forcing(grid, rng, n_modes=5, band=(1.5, 3.2)):
    nv = grid.d + 1
    F = HalfSpaceField.random(grid, nv * nv, rng, band=band, with_tail=False)
    mask = np.zeros(grid.shape, bool)
    live_idx = np.argwhere(~grid.dead & (grid.kappa >= band[0]) & (grid.kappa <= band[1]))
    sel = live_idx[rng.choice(len(live_idx), size=n_modes, replace=False)]
    for ij in sel:
        mask[tuple(ij)] = True
        mask[tuple((-np.asarray(ij)) % grid.N)] = True
    return HalfSpaceField(grid, F.slabs * mask, None, _trust=True)


@pytest.mark.parametrize("n", [3, 4])
def test_reflection_oracle_agreement(n):
    grid = desk_grid(n)
    rng = np.random.default_rng(100 + n)
    F = _few_mode_forcing(grid, rng)
    plan = whole_space_solution(F)
    heights = np.array([0.0, 0.25, 1.0, 3.0, 6.0])
    oracle = whole_space_reflection_oracle(F, heights)
    ours = plan.at_heights(heights)
    scale = np.abs(ours).max()
    assert np.abs(oracle - ours).max() / scale < 1e-6


def test_reflection_oracle_rejects_tail():
    grid = desk_grid(3)
    rng = np.random.default_rng(11)
    nv = grid.d + 1
    F = HalfSpaceField.random(grid, nv * nv, rng, band=(1.5, 3.0), with_tail=True)
    with pytest.raises(ValueError):
        whole_space_reflection_oracle(F, np.array([0.5]))


def test_max_regularity_smoke():
    report = max_regularity_check(3, 2.0, 2.0, trials=3, seed=0)
    assert len(report.ratios) == 3
    assert 0.0 < report.max < np.inf
    with pytest.raises(ValueError):
        max_regularity_check(3, 2.0, 1.0)


def test_component_count_validation():
    grid = desk_grid(3)
    rng = np.random.default_rng(12)
    bad_a = TangentialField.random(grid, 2, rng)
    with pytest.raises(ValueError):
        linear_solve(bad_a)
    bad_f = HalfSpaceField.random(grid, 4, rng)
    with pytest.raises(ValueError):
        whole_space_solution(bad_f)
