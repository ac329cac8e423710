"""Vertical kernels: oracle identities, slab integration, traces, Poisson."""

import numpy as np
import pytest
from scipy.integrate import quad

from halfspace_ns import backend
from halfspace_ns._vertical_numpy import antiderivative, antiderivative_at_minus_inf
from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.grid import Grid, desk_grid
from halfspace_ns.kernels import (
    KernelId,
    inverse_ft_oracle,
    kernel_value,
    l_apply,
    l_operator,
    poisson_apply,
    trace_t1,
    trace_t3,
    trace_t4,
)


def test_kernel_closed_forms():
    kap, z = 1.7, -0.8
    e = np.exp(-kap * abs(z))
    np.testing.assert_allclose(kernel_value(1, kap, z), e)
    np.testing.assert_allclose(kernel_value(2, kap, z), -e)
    np.testing.assert_allclose(kernel_value(3, kap, z), (1 + kap * abs(z)) * e)
    np.testing.assert_allclose(kernel_value(4, kap, z), kap * z * e)
    np.testing.assert_allclose(kernel_value(5, kap, z), (1 - kap * abs(z)) * e)
    assert kernel_value(2, kap, 0.0) == 0.0
    with pytest.raises(ValueError):
        kernel_value(6, kap, z)


def test_kernel_id_validation():
    KernelId(1, 1)
    with pytest.raises(ValueError):
        KernelId(0, 1)
    with pytest.raises(ValueError):
        KernelId(3, 2)


def test_inverse_ft_oracle_seeded_battery():
    """Each kernel matches the quadrature inverse transform of its symbol."""
    rng = np.random.default_rng(20260818)
    checked = 0
    while checked < 50:
        kappa = rng.uniform(0.1, 10.0)
        z = rng.uniform(-5.0, 5.0)
        if kappa * abs(z) > 10.0:
            continue  # keep the closed value well above the quadrature floor
        j = int(rng.integers(1, 6))
        quad_val, closed, err = inverse_ft_oracle(j, kappa, z)
        denom = max(abs(closed), 1e-300)
        assert abs(quad_val - closed) / denom < 1e-6, (j, kappa, z, quad_val, closed)
        checked += 1


def test_inverse_ft_oracle_at_zero():
    for j in (1, 3, 5):
        q, c, _ = inverse_ft_oracle(j, 2.3, 0.0)
        np.testing.assert_allclose(q, c, rtol=1e-10)
    for j in (2, 4):
        q, c, _ = inverse_ft_oracle(j, 2.3, 0.0)
        assert q == 0.0 and c == 0.0


def test_antiderivatives_differentiate_to_kernels():
    rng = np.random.default_rng(1)
    eps = 1e-6
    for j in range(1, 6):
        kap = rng.uniform(0.2, 5.0)
        us = rng.uniform(-4.0, 4.0, 40)
        us = us[np.abs(us) > 1e-2]
        fd = (antiderivative(j, kap, us + eps) - antiderivative(j, kap, us - eps)) / (
            2 * eps
        )
        np.testing.assert_allclose(fd, kernel_value(j, kap, us), atol=5e-9)
        # continuity across the kink and the correct limit at -inf
        jump = antiderivative(j, kap, 1e-13) - antiderivative(j, kap, -1e-13)
        assert abs(jump) < 1e-11
        far = antiderivative(j, np.array(kap), np.array(-60.0 / kap))
        np.testing.assert_allclose(
            far, antiderivative_at_minus_inf(j, np.array(kap)), atol=1e-15
        )


def test_backends_agree():
    rng = np.random.default_rng(7)
    K, M, H = 120, 32, 17
    kappa = rng.uniform(0.05, 6.0, K)
    g = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    tail = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    edges = np.linspace(0.0, 8.0, M + 1)
    heights = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 8.0, H - 1))])
    try:
        backend.vertical_apply(1, 1, kappa[:2], g[:2], None, edges, heights, backend="numba")
    except ImportError:
        pytest.skip("numba backend unavailable")
    for j in range(1, 6):
        for sign in (1, -1):
            for t in (tail, None):
                a = backend.vertical_apply(j, sign, kappa, g, t, edges, heights, backend="numba")
                b = backend.vertical_apply(j, sign, kappa, g, t, edges, heights, backend="numpy")
                scale = max(np.abs(b).max(), 1e-300)
                assert np.abs(a - b).max() / scale < 1e-13


def _quad_l_value(j, sign, kappa, x, g_vals, edges, tail_val):
    """Direct quadrature of int (K_j(x-y) + sign K_j(x+y)) g(y) dy."""

    def integrand(y):
        return kernel_value(j, kappa, x - y) + sign * kernel_value(j, kappa, x + y)

    total = 0.0
    for m in range(len(edges) - 1):
        pieces = [(edges[m], edges[m + 1])]
        if edges[m] < x < edges[m + 1]:
            pieces = [(edges[m], x), (x, edges[m + 1])]  # kink of K_j at y = x
        for a, b in pieces:
            val, _ = quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val * g_vals[m]
    if tail_val is not None:
        top = edges[-1]
        val, _ = quad(integrand, top, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val * tail_val
    return total


def test_slab_integration_matches_quadrature():
    rng = np.random.default_rng(3)
    edges = np.linspace(0.0, 4.0, 9)
    g_vals = rng.standard_normal(8)
    tail_val = 0.7
    for j, sign, x in [(1, 1, 0.0), (2, -1, 1.3), (3, 1, 2.05), (4, -1, 3.7), (5, -1, 0.5), (4, 1, 6.0)]:
        kappa = rng.uniform(0.3, 3.0)
        got = backend.vertical_apply(
            j,
            sign,
            np.array([kappa]),
            g_vals[None].astype(np.complex128),
            np.array([tail_val], dtype=np.complex128),
            edges,
            np.array([x]),
            backend="numpy",
        )[0, 0]
        want = _quad_l_value(j, sign, kappa, x, g_vals, edges, tail_val)
        np.testing.assert_allclose(got.real, want, rtol=1e-10, atol=1e-12)
        assert abs(got.imag) < 1e-12


def test_constant_data_identities():
    """With g identically 1 (slabs and tail), the signed integrals collapse."""
    grid = desk_grid(3)
    ones = np.ones((grid.M,) + grid.shape, dtype=np.complex128)
    ones_tail = np.ones(grid.shape, dtype=np.complex128)
    heights = np.array([0.0, 0.37, 1.0, 5.5])
    live = ~grid.dead
    kap = grid.kappa[live]

    def check(j, sign, expected_fn, atol=1e-12):
        vals = l_apply(j, sign, grid, ones, ones_tail, heights)
        for i, x in enumerate(heights):
            expect = expected_fn(kap, x)
            scale = max(np.abs(expect).max(), 1.0)
            np.testing.assert_allclose(
                vals[i][live], expect, atol=atol * scale, rtol=0
            )

    check(1, 1, lambda k, x: 2.0 / k)
    check(2, -1, lambda k, x: -2.0 * np.exp(-k * x) / k)
    check(3, 1, lambda k, x: 4.0 / k)
    check(4, 1, lambda k, x: np.zeros_like(k))
    check(4, -1, lambda k, x: -2.0 * np.exp(-k * x) * (x + 1.0 / k))
    check(5, -1, lambda k, x: 2.0 * x * np.exp(-k * x))


def test_traces_match_operators_at_zero():
    grid = desk_grid(3)
    rng = np.random.default_rng(5)
    u = HalfSpaceField.random(grid, 1, rng, with_tail=True, band=(0.2, 5.0))
    slabs, tail = u.slabs[0], u.tail[0]
    zero = np.array([0.0])

    at0 = lambda j, sign: l_apply(j, sign, grid, slabs, tail, zero)[0]
    scale = max(np.abs(at0(1, 1)).max(), 1e-300)

    t1 = trace_t1(grid, slabs, tail)
    t3 = trace_t3(grid, slabs, tail)
    t4 = trace_t4(grid, slabs, tail)
    np.testing.assert_allclose(t1, at0(1, 1), atol=1e-13 * scale)
    np.testing.assert_allclose(t3, at0(3, 1), atol=1e-12 * scale)
    np.testing.assert_allclose(t4, at0(4, -1), atol=1e-13 * scale)
    # kernels with vanishing trace, and the odd-kernel pairing
    np.testing.assert_allclose(at0(4, 1), 0.0, atol=1e-13 * scale)
    np.testing.assert_allclose(at0(5, -1), 0.0, atol=1e-13 * scale)
    np.testing.assert_allclose(at0(2, -1), -t1, atol=1e-13 * scale)


def test_l_operator_component_layout():
    grid = Grid(d=2, N=8, L=2 * np.pi, M=6, x_max=2.0)
    rng = np.random.default_rng(6)
    u = HalfSpaceField.random(grid, 3, rng, with_tail=True, band=(0.9, 3.0))
    heights = np.array([0.1, 1.9])
    out = l_operator(KernelId(2, -1), u, heights)
    assert out.shape == (3, 2, 8, 8)
    for c in range(3):
        single = l_apply(2, -1, grid, u.slabs[c], u.tail[c], heights)
        np.testing.assert_allclose(out[c], single)


def test_poisson_semigroup():
    grid = desk_grid(3)
    rng = np.random.default_rng(8)
    f = TangentialField.random(grid, 2, rng, band=(0.2, 5.0))
    a, b = 0.6, 1.1
    left = poisson_apply(poisson_apply(f, a), b)
    right = poisson_apply(f, a + b)
    np.testing.assert_allclose(left.coeffs, right.coeffs, atol=1e-15)
    np.testing.assert_allclose(poisson_apply(f, 0.0).coeffs, f.coeffs)
    # discrete harmonicity: d^2/dx^2 e^{-x kappa} = kappa^2 e^{-x kappa}
    eps = 1e-4
    fd = (
        poisson_apply(f, a + eps).coeffs
        - 2 * poisson_apply(f, a).coeffs
        + poisson_apply(f, a - eps).coeffs
    ) / eps**2
    expect = grid.kappa[None] ** 2 * poisson_apply(f, a).coeffs
    np.testing.assert_allclose(fd, expect, atol=1e-6 * np.abs(expect).max())
    with pytest.raises(ValueError):
        poisson_apply(f, -0.1)
