"""Besov and Chemin-Lerner norms, paraproducts, product-estimate indices."""

import math

import numpy as np
import pytest

from halfspace_ns.besov import (
    INF,
    BesovIndex,
    CLIndex,
    besov_norm,
    bilinear_estimate_check,
    block_lp_norm,
    bony_decompose,
    chemin_lerner_norm,
    dyadic_rescale_half,
    dyadic_rescale_tangential,
    lr_accumulate,
    product_norm_indices,
    slab_product,
    validate_product_exponents,
)
from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.grid import Grid, desk_grid
from halfspace_ns.spectral import dealiased_product, lp_block


def _single_mode_field(grid, k_index, coeff=0.5):
    """Real field with coefficients coeff at +/-k_index (a pure cosine)."""
    coeffs = np.zeros((1,) + grid.shape, dtype=np.complex128)
    coeffs[(0, *k_index)] = coeff
    coeffs[(0, *(-np.asarray(k_index) % grid.N))] = np.conj(coeff)
    return TangentialField(grid, coeffs)


def test_lr_accumulate():
    v = np.array([3.0, 4.0])
    np.testing.assert_allclose(lr_accumulate(v, 1.0), 7.0)
    np.testing.assert_allclose(lr_accumulate(v, 2.0), 5.0)
    np.testing.assert_allclose(lr_accumulate(v, math.inf), 4.0)
    assert lr_accumulate(np.array([1.0, INF]), 2.0) == INF
    assert lr_accumulate(np.array([1.0, INF]), math.inf) == INF


def test_single_mode_besov_norm():
    grid = desk_grid(3)
    # |k| = 8 means kappa = 1.0, which lies in block j = 0 with weight 1
    f = _single_mode_field(grid, (8, 0))
    l2 = grid.L / np.sqrt(2.0)
    for s in (-0.5, 0.0, 1.3):
        for r in (1.0, 2.0, math.inf):
            np.testing.assert_allclose(
                besov_norm(f, BesovIndex(s, 2.0, r)), l2, rtol=1e-13
            )
    np.testing.assert_allclose(
        besov_norm(f, BesovIndex(0.7, math.inf, 1.0)), 1.0, rtol=1e-12
    )
    # s-weight appears once the mode sits in a nonzero block: kappa = 2 is block 1
    g = _single_mode_field(grid, (16, 0))
    np.testing.assert_allclose(
        besov_norm(g, BesovIndex(1.5, 2.0, 2.0)), 2.0**1.5 * l2, rtol=1e-13
    )


def test_block_norm_p2_matches_quadrature():
    grid = desk_grid(3)
    rng = np.random.default_rng(0)
    f = TangentialField.random(grid, 2, rng, band=(0.2, 5.0))
    for j in (-1, 0, 2):
        fast = block_lp_norm(f, j, 2.0)
        phys = lp_block(f, j).physical()
        slow = np.sqrt(grid.cell_volume * np.sum(phys**2))
        np.testing.assert_allclose(fast, slow, rtol=1e-12)


def test_besov_norm_homogeneity_and_triangle():
    grid = desk_grid(3)
    rng = np.random.default_rng(1)
    f = TangentialField.random(grid, 1, rng, band=(0.2, 5.0))
    g = TangentialField.random(grid, 1, rng, band=(0.2, 5.0))
    idx = BesovIndex(0.5, 2.0, 1.0)
    np.testing.assert_allclose(besov_norm(2.0 * f, idx), 2.0 * besov_norm(f, idx), rtol=1e-13)
    assert besov_norm(f + g, idx) <= besov_norm(f, idx) + besov_norm(g, idx) + 1e-12


def test_tangential_rescale_norm_factor():
    grid = desk_grid(3)
    rng = np.random.default_rng(2)
    f = TangentialField.random(grid, 1, rng, band=(0.3, 2.0))
    for s, p in ((0.0, 2.0), (0.5, 2.0), (-1.0, 1.0), (1.0, math.inf)):
        idx = BesovIndex(s, p, 2.0)
        lhs = besov_norm(dyadic_rescale_tangential(f, 1.0), idx)
        factor = 2.0 ** (1.0 + s - grid.d / p)
        np.testing.assert_allclose(lhs, factor * besov_norm(f, idx), rtol=1e-11)


def test_chemin_lerner_constant_profile():
    grid = desk_grid(3)
    rng = np.random.default_rng(3)
    profile = TangentialField.random(grid, 1, rng, band=(0.3, 4.0))
    u = HalfSpaceField.constant_in_x(profile, with_tail=True)
    idx = BesovIndex(0.25, 2.0, 2.0)
    base = besov_norm(profile, idx)

    np.testing.assert_allclose(
        chemin_lerner_norm(u, CLIndex(math.inf), idx), base, rtol=1e-13
    )
    np.testing.assert_allclose(
        chemin_lerner_norm(u, CLIndex(math.inf, (0.0, grid.x_max)), idx),
        base,
        rtol=1e-13,
    )
    # a constant with a tail is not q-integrable for finite q
    assert chemin_lerner_norm(u, CLIndex(2.0), idx) == INF
    # finite window: exact interval weight, here aligned with slab edges
    np.testing.assert_allclose(
        chemin_lerner_norm(u, CLIndex(1.0, (2.0, 6.0)), idx), 4.0 * base, rtol=1e-13
    )
    np.testing.assert_allclose(
        chemin_lerner_norm(u, CLIndex(2.0, (2.03, 5.99)), idx),
        np.sqrt(3.96) * base,
        rtol=1e-12,
    )
    # without the tail the full-line q-norm is finite
    v = HalfSpaceField.constant_in_x(profile, with_tail=False)
    np.testing.assert_allclose(
        chemin_lerner_norm(v, CLIndex(2.0), idx), np.sqrt(grid.x_max) * base, rtol=1e-13
    )


def test_chemin_lerner_matches_manual_assembly():
    grid = Grid(d=2, N=16, L=4 * np.pi, M=8, x_max=2.0)
    rng = np.random.default_rng(4)
    u = HalfSpaceField.random(grid, 2, rng, with_tail=False, band=(0.4, 3.0))
    s, p, q, r = -0.3, 2.0, 2.0, 1.0
    total = []
    for j in grid.dyadic_range():
        per_slab = np.array(
            [block_lp_norm(u.slab(m), j, p) for m in range(grid.M)]
        )
        vq = (grid.h * np.sum(per_slab**q)) ** (1.0 / q)
        total.append(2.0 ** (s * j) * vq)
    manual = float(np.sum(total))
    lib = chemin_lerner_norm(u, CLIndex(q), BesovIndex(s, p, r))
    np.testing.assert_allclose(lib, manual, rtol=1e-12)


def test_half_space_rescale_norm_factor():
    grid = desk_grid(3)
    rng = np.random.default_rng(5)
    u = HalfSpaceField.random(grid, 1, rng, with_tail=True, band=(0.3, 2.0))
    s, p, q, r = 0.5, 2.0, 2.0, 2.0
    idx = BesovIndex(s, p, r)
    # lam = 2, power = 1: norm scales by 2^{1 + s - d/p - 1/q}
    lhs = chemin_lerner_norm(dyadic_rescale_half(u, 1.0), CLIndex(q), idx)
    rhs = chemin_lerner_norm(u, CLIndex(q), idx)
    factor = 2.0 ** (1.0 + s - grid.d / p - 1.0 / q)
    np.testing.assert_allclose(lhs, factor * rhs, rtol=1e-11)


def test_bony_identity():
    grid = desk_grid(3)
    rng = np.random.default_rng(6)
    f = TangentialField.random(grid, 1, rng, band=(0.2, 5.0))
    g = TangentialField.random(grid, 1, rng, band=(0.2, 5.0))
    parts = bony_decompose(f, g)
    prod = dealiased_product(f, g)
    scale = np.abs(prod.coeffs).max()
    np.testing.assert_allclose(
        parts.total().coeffs, prod.coeffs, atol=1e-12 * max(scale, 1.0)
    )


def test_bony_separated_bands():
    # one factor five blocks below the other: only one paraproduct survives
    grid = Grid(d=2, N=128, L=2 * np.pi, M=2, x_max=1.0)
    f = _single_mode_field(grid, (1, 0))  # kappa 1, block 0
    g = _single_mode_field(grid, (24, 0))  # kappa 24, blocks 4 and 5
    parts = bony_decompose(f, g)
    prod = dealiased_product(f, g)
    assert np.abs(parts.g_low_f_high.coeffs).max() < 1e-15
    assert np.abs(parts.resonant.coeffs).max() < 1e-15
    np.testing.assert_allclose(parts.f_low_g_high.coeffs, prod.coeffs, atol=1e-15)


def test_validate_product_exponents():
    validate_product_exponents(3, 2.0, 2.0)
    validate_product_exponents(3, 3.9, 2.0)
    validate_product_exponents(4, 2.0, math.inf)
    validate_product_exponents(4, 1.0, 1.0)
    with pytest.raises(ValueError):
        validate_product_exponents(3, 4.0, 2.0)  # p must stay below q*'(n-1)
    with pytest.raises(ValueError):
        validate_product_exponents(3, 2.0, math.inf)  # q finite when n = 3
    with pytest.raises(ValueError):
        validate_product_exponents(4, 3.0, math.inf)  # q* = inf forces p < 3
    with pytest.raises(ValueError):
        validate_product_exponents(3, 0.5, 2.0)  # p >= 1
    with pytest.raises(ValueError):
        validate_product_exponents(5, 2.0, 2.0)  # n in {3, 4}


def test_product_norm_indices():
    factor_cl, factor_idx, prod_cl, prod_idx = product_norm_indices(3, 2.0, 2.0, 2.0)
    assert factor_cl.q == 2.0
    np.testing.assert_allclose(factor_idx.s, 0.5)
    assert prod_cl.q == 1.0
    np.testing.assert_allclose(prod_idx.s, 0.0)

    factor_cl, factor_idx, prod_cl, prod_idx = product_norm_indices(3, 2.0, 1.0, 2.0)
    # q* = max(2, q) = 2: same indices as q = 2
    assert factor_cl.q == 2.0
    np.testing.assert_allclose(factor_idx.s, 0.5)

    factor_cl, factor_idx, prod_cl, prod_idx = product_norm_indices(4, 2.0, math.inf, 2.0)
    assert math.isinf(factor_cl.q)
    np.testing.assert_allclose(factor_idx.s, 3.0 / 2.0 - 1.0)
    assert math.isinf(prod_cl.q)
    np.testing.assert_allclose(prod_idx.s, 3.0 / 2.0 - 2.0)


def test_slab_product_matches_per_slab():
    grid = Grid(d=2, N=16, L=4 * np.pi, M=4, x_max=2.0)
    rng = np.random.default_rng(7)
    f = HalfSpaceField.random(grid, 1, rng, with_tail=True, band=(0.4, 3.0))
    g = HalfSpaceField.random(grid, 1, rng, with_tail=True, band=(0.4, 3.0))
    h = slab_product(f, g)
    for m in range(grid.M):
        direct = dealiased_product(f.slab(m), g.slab(m))
        np.testing.assert_allclose(h.slabs[:, m], direct.coeffs, atol=1e-14)
    direct_tail = dealiased_product(f.tail_field(), g.tail_field())
    np.testing.assert_allclose(h.tail, direct_tail.coeffs, atol=1e-14)


def test_bilinear_check_smoke():
    report = bilinear_estimate_check(3, 2.0, 2.0, 2.0, trials=5, seed=11)
    assert len(report.ratios) == 5
    assert report.max < INF and report.max > 0.0
    assert report.median <= report.max
