import math
from fractions import Fraction

import mpmath
import pytest

from services.combinatorics_service import (
    alpha_coefficients, alpha_from_newton, alpha_orthogonality, b_coefficient, b_coefficient_exact,
    b_coefficient_partition, build_eulerian_table, eulerian_by_descents, eulerian_number, eulerian_poly,
    low_order_corollaries, polylog_neg, polylog_neg_series, polylog_neg_stirling, stirling_second,
    verify_delta_identity, verify_worpitzky, worpitzky_integer_residuals
)
from utils.errors import ArgumentError, SingularityError


def test_small_eulerian_rows():
    assert [eulerian_number(3, k) for k in range(3)] == [1, 4, 1]
    assert [eulerian_number(4, k) for k in range(4)] == [1, 11, 11, 1]
    assert eulerian_number(1, 0) == 1


@pytest.mark.parametrize("s", range(1, 8))
def test_eulerian_matches_descent_census(s):
    assert [eulerian_number(s, k) for k in range(s)] == [eulerian_by_descents(s, k) for k in range(s)]


@pytest.mark.parametrize("s", range(1, 25))
def test_row_sums_and_symmetry(s):
    row = build_eulerian_table(24).row(s)
    assert sum(row) == math.factorial(s)
    assert row == row[::-1]


def test_table_value_outside_row():
    table = build_eulerian_table(5)
    assert table.value(5, 5) == 0
    with pytest.raises(ArgumentError):
        table.value(5, 6)


def test_with_entry_copies_table():
    table = build_eulerian_table(4)
    broken = table.with_entry(3, 1, 5)
    assert broken.value(3, 1) == 5
    assert table.value(3, 1) == 4


def test_eulerian_poly_at_one_is_factorial():
    assert eulerian_poly(6, 1) == math.factorial(6)
    assert eulerian_poly(6, 1.0) == pytest.approx(720.0)


def test_stirling_second_known_values():
    assert stirling_second(4, 2) == 7
    assert stirling_second(5, 3) == 25
    with pytest.raises(ArgumentError):
        stirling_second(3, 0)


@pytest.mark.parametrize("s", [0, 1, 2, 5, 9])
@pytest.mark.parametrize("z", [0.3, -0.5, 0.4j, 0.2 - 0.3j])
def test_polylog_rational_matches_series(s, z):
    rational = polylog_neg(s, z)
    scale = max(1.0, abs(polylog_neg(s, abs(z))))
    assert abs(rational - polylog_neg_series(s, z)) / scale < 1e-10
    assert abs(rational - polylog_neg_stirling(s, z)) / scale < 1e-10


def test_polylog_against_mpmath():
    assert polylog_neg(3, 0.5) == pytest.approx(complex(mpmath.polylog(-3, 0.5)), rel=1e-12)


def test_polylog_zero_order_closed_form():
    assert polylog_neg(0, 0.5) == pytest.approx(1.0)


def test_polylog_singular_point():
    with pytest.raises(SingularityError):
        polylog_neg(2, 1.0)


def test_polylog_outside_unit_disc():
    with pytest.raises(ArgumentError):
        polylog_neg(1, 1.5)


def test_alpha_expansion_small_case():
    # (z + 1)(z)(z - 1) at k = 1, s = 3
    assert alpha_coefficients(3, 1).coeffs == (0, -1, 0, 1)
    assert alpha_coefficients(3, 1).evaluate(2) == 6


@pytest.mark.parametrize("s", range(1, 9))
def test_newton_route_matches_product(s):
    for k in range(s):
        assert alpha_from_newton(s, k) == alpha_coefficients(s, k).coeffs


@pytest.mark.parametrize("s", range(1, 9))
def test_b_coefficient_routes_agree(s):
    for k in range(s):
        for m in range(0, s + 1):
            assert b_coefficient_partition(m, s, k) == math.factorial(m) * alpha_coefficients(s, k).coeffs[m]


def test_b_coefficient_against_finite_derivative():
    # d^2/dz^2 [z log z] at 1 = 1
    assert b_coefficient_exact(1, 2, 1) == Fraction(1)
    assert b_coefficient(1, 2, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("s", range(1, 13))
def test_worpitzky(s):
    assert verify_worpitzky(s, [0.5, -1.3, 2.0 + 1.0j, 3.7]) < 1e-9


@pytest.mark.parametrize("s", range(1, 9))
def test_delta_identity(s):
    for m in range(1, 9):
        assert verify_delta_identity(s, m) < 1e-9


def test_injected_fault_breaks_worpitzky():
    broken = build_eulerian_table(6).with_entry(5, 2, 67)
    assert verify_worpitzky(5, [0.5], broken) > 1e-3


@pytest.mark.parametrize("s", range(2, 10))
def test_integer_corollaries(s):
    for r in range(s):
        assert worpitzky_integer_residuals(s, r) == (0, 0)
    assert low_order_corollaries(s) == (0, 0)


@pytest.mark.parametrize("s", range(1, 10))
def test_alpha_orthogonality(s):
    assert alpha_orthogonality(s) == [0] * s + [math.factorial(s)]
