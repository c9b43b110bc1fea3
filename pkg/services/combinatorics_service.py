"""
Exact combinatorics used as weights by the evolution-operator trace formula:
Eulerian numbers and polynomials, Stirling numbers, product-polynomial coefficients,
log-derivative coefficients, and negative-order polylogarithms.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from config import PARTITION_MAX_ORDER, POLYLOG_SINGULAR_TOLERANCE
from utils.errors import ArgumentError, NumericalError, SingularityError
from utils.validators import ensure_valid, validate_integer_range

logger = logging.getLogger(__name__)

POLYLOG_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class EulerianTable:
    """Triangular table A(s, k), 0 <= k < s <= max_order."""
    max_order: int
    values: tuple

    def value(self, s: int, k: int) -> int:
        if k < 0 or k > s:
            raise ArgumentError(f"k must lie in 0..{s} (got {k})")
        if k == s:
            return 0
        return self.values[s - 1][k]

    def row(self, s: int) -> tuple:
        return self.values[s - 1]

    def with_entry(self, s: int, k: int, value: int) -> 'EulerianTable':
        """Copy of the table with one entry replaced."""
        rows = [list(r) for r in self.values]
        rows[s - 1][k] = value
        return EulerianTable(self.max_order, tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class AlphaCoefficients:
    """Coefficients alpha_j(s, k), j = 0..s, of prod_{l=1}^{s} (z + k + 1 - l)."""
    s: int
    k: int
    coeffs: tuple

    def evaluate(self, z):
        result = 0
        for c in reversed(self.coeffs):
            result = result * z + c
        return result


@lru_cache(maxsize=None)
def eulerian_number(s: int, k: int) -> int:
    """
    Eulerian number A(s, k) from the alternating sum over binomials.
    Exact Python integers, so there is no overflow for large s.
    """
    ensure_valid(validate_integer_range(s, "s", low=1))
    ensure_valid(validate_integer_range(k, "k", low=0, high=s))

    return sum((-1) ** m * math.comb(s + 1, m) * (k + 1 - m) ** s for m in range(k + 1))


def eulerian_by_descents(s: int, k: int) -> int:
    """Count permutations of s elements with exactly k descents (brute force)."""
    count = 0
    for perm in itertools.permutations(range(s)):
        descents = sum(1 for a, b in zip(perm, perm[1:]) if a > b)
        if descents == k:
            count += 1
    return count


@lru_cache(maxsize=None)
def build_eulerian_table(max_order: int) -> EulerianTable:
    """Build the memoized Eulerian table up to max_order."""
    ensure_valid(validate_integer_range(max_order, "max_order", low=1))
    rows = tuple(tuple(eulerian_number(s, k) for k in range(s)) for s in range(1, max_order + 1))
    return EulerianTable(max_order=max_order, values=rows)


def eulerian_poly(s: int, z):
    """
    Evaluate A_s(z) = sum_k A(s, k) z^k by Horner's rule.
    Accepts scalars or numpy arrays.
    """
    ensure_valid(validate_integer_range(s, "s", low=1))
    # numpy cannot hold integers beyond 64 bits
    as_float = isinstance(z, (np.ndarray, float, complex, np.floating, np.complexfloating))
    result = 0
    for k in reversed(range(s)):
        coefficient = eulerian_number(s, k)
        result = result * z + (float(coefficient) if as_float else coefficient)
    return result


@lru_cache(maxsize=None)
def stirling_second(n: int, k: int) -> int:
    """Stirling number of the second kind S(n, k) by the alternating-sum formula."""
    ensure_valid(validate_integer_range(n, "n", low=1))
    ensure_valid(validate_integer_range(k, "k", low=1, high=n))

    total = sum((-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1))
    return total // math.factorial(k)


def _check_polylog_argument(z):
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(1 - z_arr) < POLYLOG_SINGULAR_TOLERANCE):
        raise SingularityError("Polylogarithm evaluated at the singular point z = 1")
    if np.any(np.abs(z_arr) >= 1 + POLYLOG_DOMAIN_SLACK):
        raise ArgumentError("Polylogarithm argument must satisfy |z| < 1")
    return z_arr


def polylog_neg(s: int, z):
    """
    Li_{-s}(z) = sum_{n>=1} n^s z^n in its rational form z A_s(z) / (1-z)^{s+1}.
    Returns a complex scalar for scalar z, an array otherwise.
    """
    ensure_valid(validate_integer_range(s, "s", low=0))
    z_arr = _check_polylog_argument(z)

    if s == 0:
        value = z_arr / (1 - z_arr)
    else:
        value = z_arr * eulerian_poly(s, z_arr) / (1 - z_arr) ** (s + 1)

    return complex(value) if np.ndim(z) == 0 else value


def polylog_neg_series(s: int, z: complex, terms: int = 2000) -> complex:
    """Direct partial sum of sum_{n>=1} n^s z^n."""
    n = np.arange(1, terms + 1, dtype=float)
    return complex(np.sum(n ** s * np.asarray(z, dtype=complex) ** n))


def polylog_neg_stirling(s: int, z: complex) -> complex:
    """Li_{-s}(z) through Stirling numbers: sum_k k! S(s+1, k+1) (z/(1-z))^{k+1}."""
    ensure_valid(validate_integer_range(s, "s", low=0))
    z_arr = _check_polylog_argument(z)
    w = z_arr / (1 - z_arr)
    value = sum(float(math.factorial(k) * stirling_second(s + 1, k + 1)) * w ** (k + 1) for k in range(s + 1))
    return complex(value) if np.ndim(z) == 0 else value


@lru_cache(maxsize=None)
def alpha_coefficients(s: int, k: int) -> AlphaCoefficients:
    """Expand prod_{l=1}^{s} (z + k + 1 - l) by exact convolution."""
    ensure_valid(validate_integer_range(s, "s", low=1))
    ensure_valid(validate_integer_range(k, "k", low=0, high=s - 1))

    coeffs = [1]
    for l in range(1, s + 1):
        shift = k + 1 - l
        nxt = [0] * (len(coeffs) + 1)
        for j, c in enumerate(coeffs):
            nxt[j] += shift * c
            nxt[j + 1] += c
        coeffs = nxt
    return AlphaCoefficients(s=s, k=k, coeffs=tuple(coeffs))


def alpha_from_newton(s: int, k: int) -> tuple:
    """
    Same coefficients from the power sums t_r = sum_q (k+1-q)^r through Newton's identities:
    alpha_{s-m} is the m-th elementary symmetric function of the shifts.
    """
    ensure_valid(validate_integer_range(s, "s", low=1))
    ensure_valid(validate_integer_range(k, "k", low=0, high=s - 1))

    shifts = [k + 1 - q for q in range(1, s + 1)]
    power_sums = [sum(x ** r for x in shifts) for r in range(s + 1)]
    elementary = [Fraction(1)]
    for m in range(1, s + 1):
        acc = sum((-1) ** (i - 1) * elementary[m - i] * power_sums[i] for i in range(1, m + 1))
        elementary.append(acc / m)

    coeffs = [0] * (s + 1)
    for m, e_m in enumerate(elementary):
        if e_m.denominator != 1:
            raise NumericalError(f"Newton recursion produced a non-integer at m={m}")
        coeffs[s - m] = int(e_m)
    return tuple(coeffs)


@lru_cache(maxsize=None)
def _composition_sum(m: int, l: int) -> Fraction:
    """Sum over compositions (j_1..j_m) of l with positive parts of prod 1/j_i."""
    if m == 0:
        return Fraction(1) if l == 0 else Fraction(0)
    if l < m:
        return Fraction(0)
    return sum((Fraction(1, j) * _composition_sum(m - 1, l - j) for j in range(1, l - m + 2)), Fraction(0))


def b_coefficient_partition(m: int, s: int, k: int) -> Fraction:
    """
    s-th derivative of z^k (log z)^m at z = 1 from the expansion around z = 1,
    summing over compositions of l into m parts.
    """
    if s > PARTITION_MAX_ORDER:
        raise ArgumentError(f"Partition route is capped at s <= {PARTITION_MAX_ORDER}")

    total = Fraction(0)
    for l in range(max(s - k, m), s + 1):
        total += (-1) ** l * math.comb(k, s - l) * _composition_sum(m, l)
    return (-1) ** m * math.factorial(s) * total


def b_coefficient_exact(m: int, s: int, k: int) -> Fraction:
    """B^{(m)}(s, k) as an exact rational, cross-checked against m! alpha_m(s, k)."""
    ensure_valid(validate_integer_range(m, "m", low=0))
    ensure_valid(validate_integer_range(s, "s", low=1))
    ensure_valid(validate_integer_range(k, "k", low=0, high=s - 1))

    from_partitions = b_coefficient_partition(m, s, k)
    alpha = alpha_coefficients(s, k).coeffs
    from_alpha = math.factorial(m) * alpha[m] if m <= s else 0

    if from_partitions != from_alpha:
        raise NumericalError(
            f"B coefficient routes disagree at (m={m}, s={s}, k={k}): {from_partitions} vs {from_alpha}"
        )
    return from_partitions


def b_coefficient(m: int, s: int, k: int) -> float:
    """B^{(m)}(s, k) = [d^s/dz^s z^k (log z)^m] at z = 1."""
    return float(b_coefficient_exact(m, s, k))


def falling_binomial(z, k: int, s: int):
    """binom(z + k, s) for complex z as prod_{l=1}^{s} (z + k + 1 - l) / s!."""
    product = 1
    for l in range(1, s + 1):
        product = product * (z + k + 1 - l)
    return product / math.factorial(s)


def verify_worpitzky(s: int, z_samples: list, table: EulerianTable = None) -> float:
    """
    Max |sum_k A(s,k) binom(z+k, s) - z^s| over the samples.
    Evaluated in 50-digit arithmetic so large terms do not swamp the residual.
    """
    ensure_valid(validate_integer_range(s, "s", low=1))
    table = table or build_eulerian_table(max(s, 1))
    worst = 0.0
    with mpmath.workdps(50):
        for z in z_samples:
            zm = mpmath.mpc(complex(z))
            lhs = sum(table.value(s, k) * falling_binomial(zm, k, s) for k in range(s))
            worst = max(worst, float(abs(lhs - zm ** s)))
    return worst


def verify_delta_identity(s: int, m: int, table: EulerianTable = None) -> float:
    """|(1/(s!)^2) sum_k A(s,k) B^{(m)}(s,k) - delta_{s,m}|, exact up to the final float."""
    ensure_valid(validate_integer_range(s, "s", low=1))
    ensure_valid(validate_integer_range(m, "m", low=1))
    table = table or build_eulerian_table(s)

    lhs = sum(table.value(s, k) * b_coefficient_exact(m, s, k) for k in range(s))
    lhs /= math.factorial(s) ** 2
    return float(abs(lhs - (1 if s == m else 0)))


def worpitzky_integer_residuals(s: int, r: int, table: EulerianTable = None) -> tuple[int, int]:
    """
    Integer corollaries at z = r < s: the upper partial sum and its mirror.
    Returns the two exact residuals against r^s.
    """
    table = table or build_eulerian_table(s)
    upper = sum(table.value(s, k) * math.comb(k + r, s) for k in range(s - r, s))
    mirror = sum(table.value(s, k) * math.comb(s - 1 - k + r, s) for k in range(r))
    return upper - r ** s, mirror - r ** s


def alpha_orthogonality(s: int, table: EulerianTable = None) -> list:
    """sum_k A(s,k) alpha_j(s,k) for j = 0..s; equals s! delta_{j,s}."""
    table = table or build_eulerian_table(s)
    return [
        sum(table.value(s, k) * alpha_coefficients(s, k).coeffs[j] for k in range(s))
        for j in range(s + 1)
    ]


def low_order_corollaries(s: int, table: EulerianTable = None) -> tuple[int, int]:
    """
    The j = 1 and j = s-1 instances written out explicitly. Both vanish for s >= 2.
    """
    table = table or build_eulerian_table(s)
    first = sum(
        table.value(s, k) * (-1) ** (s - 1 - k) * math.factorial(k) * math.factorial(s - 1 - k)
        for k in range(s)
    )
    second = sum(
        table.value(s, k) * (Fraction((k + 1) * s) - Fraction(s * (s + 1), 2))
        for k in range(s)
    )
    return first, int(second)
