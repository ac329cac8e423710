"""End-to-end verification gates, one test per criterion.

Each test drives the corresponding gate in halfspace_ns.verify and prints its
pass/fail line, so `pytest -v tests/test_acceptance.py` doubles as the
acceptance report.  The gates carry their own tolerances and runtime caps.
"""

import pytest

from halfspace_ns.verify import VerificationSuite


@pytest.fixture(scope="module")
def suite():
    return VerificationSuite(echo=print)


def _check(suite, index):
    result = suite.run(index)
    assert result.passed, f"criterion {index} failed: {result.details}"


def test_criterion_01_kernel_quadrature_oracle(suite):
    _check(suite, 1)


def test_criterion_02_vertical_trace_identities(suite):
    _check(suite, 2)


def test_criterion_03_poisson_block_envelope(suite):
    _check(suite, 3)


def test_criterion_04_linear_solver_residuals(suite):
    _check(suite, 4)


def test_criterion_05_boundary_correction_regression(suite):
    _check(suite, 5)


def test_criterion_06_vertical_gain_a_priori_bound(suite):
    _check(suite, 6)


def test_criterion_07_critical_product_bound(suite):
    _check(suite, 7)


def test_criterion_08_nonlinear_contraction_solve(suite):
    _check(suite, 8)


def test_criterion_09_dyadic_scaling_criticality(suite):
    _check(suite, 9)


def test_criterion_10_far_field_profile_ladder(suite):
    _check(suite, 10)
