"""
Evolution-operator trace formula: counting function and density from
tr H^s weighted by powers of n (double sum) or by negative-order polylogarithms,
spectral averages of test functions, and the semicircle resummation.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.integrate import quad

from config import BASE_PRECISION_DIGITS, CUTOFF_S_FACTOR, minimal_n_max
from services.combinatorics_service import (
    alpha_coefficients, b_coefficient_exact, build_eulerian_table, polylog_neg
)
from services.matrix_service import HermitianMatrix, gap, trace_powers, trace_powers_mp
from utils.errors import ArgumentError, ConfigurationError, ConvergenceDomainError
from utils.validators import ensure_valid, validate_cutoff_policy, validate_semicircle_lambda

logger = logging.getLogger(__name__)

COUNTING = 'counting'
DENSITY = 'density'
MODES = (COUNTING, DENSITY)


@dataclass(frozen=True)
class CutoffPolicy:
    """Resolution epsilon with the outer (n) and inner (s) truncations."""
    epsilon: float
    n_max: int
    s_max: int

    def validate(self):
        ensure_valid(validate_cutoff_policy(self.epsilon, self.n_max, self.s_max), ConfigurationError)
        return self


def make_cutoff_policy(epsilon: float, n_max: int = None, s_max: int = None) -> CutoffPolicy:
    """Smallest admissible cutoffs for epsilon unless given explicitly."""
    if epsilon is None or epsilon <= 0:
        raise ConfigurationError(f"epsilon must be positive (got {epsilon})")
    n_max = n_max if n_max is not None else minimal_n_max(epsilon)
    s_max = s_max if s_max is not None else CUTOFF_S_FACTOR * n_max
    return CutoffPolicy(epsilon=epsilon, n_max=n_max, s_max=s_max).validate()


@dataclass(frozen=True, eq=False)
class FourierTestFunction:
    """
    Test function on (-pi, pi) given by Fourier coefficients f_n, |n| <= n_max.
    value_at_zero and z_derivatives (the j-th derivative of sum_n f_n z^n at z = 1)
    are optional exact data that replace truncated sums where supplied.
    """
    n_max: int
    coeffs: np.ndarray
    decay_exponent: float
    decay_constant: float
    real: bool = True
    value_at_zero: Optional[complex] = None
    z_derivatives: Optional[Callable[[int], complex]] = None
    name: str = 'custom'

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def frequencies(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def evaluate(self, lam):
        """Truncated Fourier series at lambda."""
        lam = np.asarray(lam, dtype=float)
        phases = np.exp(1j * np.multiply.outer(lam, self.frequencies()))
        return phases @ self.coeffs

    @property
    def formal_regime(self) -> bool:
        return self.decay_exponent < math.pi


def make_test_function(coeffs, decay_exponent: float, decay_constant: float = None, real: bool = True,
                       **extra) -> FourierTestFunction:
    """
    Build a FourierTestFunction from coefficients ordered n = -n_max..n_max.
    Validates the declared decay bound and, for real functions, f_{-n} = conj(f_n).
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) % 2 != 1:
        raise ArgumentError("Coefficients must be a vector of odd length 2 n_max + 1")
    n_max = len(coeffs) // 2
    n = np.abs(np.arange(-n_max, n_max + 1))

    bound_ratio = np.abs(coeffs) * np.exp(decay_exponent * n)
    if decay_constant is None:
        decay_constant = float(np.max(bound_ratio))
    elif np.any(bound_ratio > decay_constant * (1 + 1e-12)):
        raise ArgumentError(
            f"Coefficients violate |f_n| <= {decay_constant} exp(-{decay_exponent} |n|)"
        )

    if real and not np.allclose(coeffs, coeffs[::-1].conj(), rtol=1e-12, atol=1e-15):
        raise ArgumentError("Real test function requires f_{-n} = conj(f_n)")

    return FourierTestFunction(n_max=n_max, coeffs=coeffs, decay_exponent=decay_exponent,
                               decay_constant=decay_constant, real=real, **extra)


def heat_kernel_coefficient(beta: float, n: int) -> complex:
    """Fourier coefficient of exp(-beta lambda) on (-pi, pi)."""
    return (-1) ** (n % 2) * math.sinh(beta * math.pi) / (math.pi * (beta + 1j * n))


def heat_kernel_test_function(beta: float, n_max: int) -> FourierTestFunction:
    """exp(-beta lambda), with exact z-side derivatives z^{i beta} -> (i beta)_j falling."""
    coeffs = [heat_kernel_coefficient(beta, n) for n in range(-n_max, n_max + 1)]

    def derivatives(j: int):
        return mpmath.fprod(mpmath.mpc(-l, beta) for l in range(j))

    return make_test_function(
        coeffs, decay_exponent=0.0, decay_constant=math.sinh(beta * math.pi) / (math.pi * beta),
        value_at_zero=1.0, z_derivatives=derivatives, name=f'heat_kernel(beta={beta})',
    )


def monomial_coefficient(m: int, n: int) -> complex:
    """(1/2pi) int_{-pi}^{pi} lambda^m exp(-i n lambda) d lambda, by integration by parts."""
    if n == 0:
        return math.pi ** m / (m + 1) if m % 2 == 0 else 0.0
    value = 0j
    boundary = (-1) ** (n % 2) / (-2j * math.pi * n)
    for k in range(1, m + 1):
        value = boundary * (math.pi ** k - (-math.pi) ** k) + (k / (1j * n)) * value
    return value


def monomial_test_function(m: int, n_max: int) -> FourierTestFunction:
    """lambda^m, with z-side derivatives (-i)^m B^{(m)}(j, 0)."""
    coeffs = [monomial_coefficient(m, n) for n in range(-n_max, n_max + 1)]

    def derivatives(j: int):
        if j == 0:
            return 1 if m == 0 else 0
        exact = b_coefficient_exact(m, j, 0)
        return mpmath.mpc(0, -1) ** m * mpmath.mpf(exact.numerator) / exact.denominator

    return make_test_function(coeffs, decay_exponent=0.0, value_at_zero=1.0 if m == 0 else 0.0,
                              z_derivatives=derivatives, name=f'monomial(m={m})')


def exponential_decay_test_function(kappa: float, n_max: int) -> FourierTestFunction:
    """f_n = exp(-kappa |n|), the Poisson kernel; f(0) is summed in closed form."""
    n = np.arange(-n_max, n_max + 1)
    r = math.exp(-kappa)
    return make_test_function(np.exp(-kappa * np.abs(n)), decay_exponent=kappa, decay_constant=1.0,
                              value_at_zero=(1 + r) / (1 - r), name=f'poisson(kappa={kappa})')


def _check_mode(mode: str):
    if mode not in MODES:
        raise ArgumentError(f"mode must be one of {MODES} (got '{mode}')")


def _check_periodized(matrix: HermitianMatrix) -> bool:
    """True (with a warning) when the spectrum leaves (-pi, pi)."""
    periodized = gap(matrix) <= 0
    if periodized:
        logger.warning("Spectrum leaves (-pi, pi); the result describes the 2 pi-periodized spectrum")
    return periodized


def _as_output(values, lam):
    return float(values) if np.ndim(lam) == 0 else np.asarray(values, dtype=float)


def smooth_count_I(matrix: HermitianMatrix, lam):
    """(N lambda - tr H) / 2 pi + N / 2."""
    trace = trace_powers(matrix, 1)[1]
    lam_arr = np.asarray(lam, dtype=float)
    return _as_output((matrix.n * lam_arr - trace) / (2 * math.pi) + matrix.n / 2, lam)


def smooth_density_I(matrix: HermitianMatrix, lam):
    """Constant N / 2 pi."""
    return _as_output(np.full(np.shape(lam), matrix.n / (2 * math.pi)), lam)


def evolution_traces(matrix: HermitianMatrix, n_max: int, s_max: int) -> np.ndarray:
    """
    T_n = sum_{s <= s_max} (-i n)^s tr H^s / s! for n = 1..n_max.
    Accumulated in multiprecision: individual terms reach exp(n ||H||) while T_n stays O(N).
    """
    spectral_norm = float(np.linalg.norm(np.asarray(matrix.entries), 2))
    dps = BASE_PRECISION_DIGITS + int(math.ceil(n_max * spectral_norm / math.log(10)))
    logger.debug("Evolution traces with n_max=%d s_max=%d at %d digits", n_max, s_max, dps)

    traces = trace_powers_mp(matrix, s_max, dps)
    values = np.empty(n_max, dtype=complex)
    with mpmath.workdps(dps):
        for n in range(1, n_max + 1):
            term = mpmath.mpc(1)
            total = traces[0] * term
            for s in range(1, s_max + 1):
                term = term * mpmath.mpc(0, -n) / s
                total += term * traces[s]
            values[n - 1] = complex(total)
    return values


def osc_from_evolution_traces(evolution: np.ndarray, lam, epsilon: float, mode: str = COUNTING):
    """Outer n-sum of the oscillating part given T_1..T_{n_max}."""
    _check_mode(mode)
    n = np.arange(1, len(evolution) + 1)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    z_powers = np.exp(np.multiply.outer(1j * lam_arr - epsilon, n))
    if mode == COUNTING:
        values = (z_powers @ (evolution / n)).imag / math.pi
    else:
        values = (z_powers @ evolution).real / math.pi
    return _as_output(values[0] if np.ndim(lam) == 0 else values, lam)


def osc_count_I_doublesum(matrix: HermitianMatrix, lam, policy: CutoffPolicy, mode: str = COUNTING):
    """
    Oscillating part from the double sum, inner s-sum to s_max first, outer n-sum to n_max.
    Counting takes (1/pi) Im, density (1/pi) Re.
    """
    _check_mode(mode)
    policy.validate()
    _check_periodized(matrix)
    evolution = evolution_traces(matrix, policy.n_max, policy.s_max)
    return osc_from_evolution_traces(evolution, lam, policy.epsilon, mode)


def osc_count_I_polylog(matrix: HermitianMatrix, lam, epsilon: float, s_max: int, mode: str = COUNTING):
    """
    Oscillating part as a single s-sum with polylogarithm weights at z = exp(i lambda - epsilon).
    Absolutely convergent only for epsilon > max |lambda_j|.
    """
    _check_mode(mode)
    radius = float(np.max(np.abs(matrix.eigenvalues)))
    if epsilon <= radius:
        raise ConvergenceDomainError(
            f"epsilon={epsilon} must exceed the spectral radius {radius:.6g} for the polylog form"
        )

    traces = trace_powers(matrix, s_max)
    z = np.exp(1j * np.atleast_1d(np.asarray(lam, dtype=float)) - epsilon)
    total = np.zeros_like(z)
    weight = 1.0 + 0j
    for s in range(s_max + 1):
        if s > 0:
            weight *= -1j / s
        coefficient = weight * traces[s]
        if mode == COUNTING:
            total += coefficient * (-np.log(1 - z) if s == 0 else polylog_neg(s - 1, z))
        else:
            total += coefficient * polylog_neg(s, z)

    values = total.imag / math.pi if mode == COUNTING else total.real / math.pi
    return _as_output(values[0] if np.ndim(lam) == 0 else values, lam)


@dataclass
class CountingResult:
    """Grid samples of the smooth, oscillating and total counting function or density."""
    lambdas: np.ndarray
    smooth: np.ndarray
    oscillating: np.ndarray
    method: str
    mode: str = COUNTING
    policy: Optional[CutoffPolicy] = None
    exact: Optional[np.ndarray] = None
    periodized: bool = False
    total: np.ndarray = field(init=False)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        if len(self.lambdas) > 1 and np.any(np.diff(self.lambdas) <= 0):
            raise ArgumentError("Grid must be strictly increasing")
        self.total = np.asarray(self.smooth) + np.asarray(self.oscillating)


def counting_I(matrix: HermitianMatrix, grid, policy: CutoffPolicy, mode: str = COUNTING,
               method: str = 'doublesum', evaluator=None) -> CountingResult:
    """
    Evaluate Approach I on a grid. `evaluator(func, grid)` may fan the vectorized
    oscillating-part evaluation out to workers; the evolution traces are shared.
    """
    _check_mode(mode)
    evaluator = evaluator or (lambda func, points: func(points))
    grid = np.asarray(grid, dtype=float)
    smooth = smooth_count_I(matrix, grid) if mode == COUNTING else smooth_density_I(matrix, grid)

    periodized = _check_periodized(matrix)
    if method == 'doublesum':
        policy.validate()
        evolution = evolution_traces(matrix, policy.n_max, policy.s_max)
        osc = evaluator(lambda pts: osc_from_evolution_traces(evolution, pts, policy.epsilon, mode), grid)
    elif method == 'polylog':
        osc = evaluator(lambda pts: osc_count_I_polylog(matrix, pts, policy.epsilon, policy.s_max, mode), grid)
    else:
        raise ArgumentError(f"Unknown Approach I method '{method}'")

    return CountingResult(lambdas=grid, smooth=np.asarray(smooth), oscillating=np.asarray(osc),
                          method=f'I-{method}', mode=mode, policy=policy, periodized=periodized)


def _phase_power(s: int) -> complex:
    return (1j) ** (s % 4)


def spectral_average_fourier(matrix: HermitianMatrix, f: FourierTestFunction, s_max: int) -> complex:
    """
    f(0) + sum_s tr H^s / (N s!) sum_{n>0} n^s (i^s f_n + (-i)^s f_{-n}), in 40-digit arithmetic.
    """
    traces = trace_powers(matrix, s_max)
    positive = np.arange(1, f.n_max + 1)
    with mpmath.workdps(40):
        f_plus = [mpmath.mpc(f.coefficient(int(n))) for n in positive]
        f_minus = [mpmath.mpc(f.coefficient(-int(n))) for n in positive]
        f0 = mpmath.mpc(f.value_at_zero) if f.value_at_zero is not None else mpmath.fsum(
            mpmath.mpc(c) for c in f.coeffs)
        total = f0
        for s in range(1, s_max + 1):
            moment = mpmath.fsum(
                mpmath.mpf(int(n)) ** s * (_phase_power(s) * fp + _phase_power(-s) * fm)
                for n, fp, fm in zip(positive, f_plus, f_minus)
            )
            total += traces[s] / (matrix.n * mpmath.factorial(s)) * moment
        return complex(total)


@lru_cache(maxsize=None)
def _shifted_eulerian(s: int) -> tuple:
    """Coefficients p_r of A_s(1 + x) = sum_r p_r x^r, exact."""
    row = build_eulerian_table(s).row(s)
    return tuple(sum(a * math.comb(k, r) for k, a in enumerate(row)) for r in range(s))


def spectral_average_zside(matrix: HermitianMatrix, f: FourierTestFunction, s_max: int) -> complex:
    """
    f(0) + sum_s i^s tr H^s / (N (s!)^2) d^s/dz^s [A_s(z) f_hat(z)] at z = 1,
    with f_hat derivatives supplied exactly by the test function.
    """
    if f.z_derivatives is None or f.value_at_zero is None:
        raise ArgumentError(f"Test function '{f.name}' has no z-side derivative data")

    traces = trace_powers(matrix, s_max)
    dps = BASE_PRECISION_DIGITS + int(math.ceil(math.lgamma(s_max + 1) / math.log(10))) + s_max
    with mpmath.workdps(dps):
        derivatives = [mpmath.mpc(f.z_derivatives(j)) for j in range(s_max + 1)]
        total = mpmath.mpc(f.value_at_zero)
        for s in range(1, s_max + 1):
            shifted = _shifted_eulerian(s)
            # (1/s!) d^s/dz^s [A_s f_hat] = sum_j p_{s-j} f_hat^{(j)}(1) / j!
            moment = mpmath.fsum(
                shifted[s - j] * derivatives[j] / mpmath.factorial(j) for j in range(1, s + 1)
            )
            total += _phase_power(s) * traces[s] / (matrix.n * mpmath.factorial(s)) * moment
        return complex(total)


def spectral_average_alpha(matrix: HermitianMatrix, f: FourierTestFunction, s_max: int) -> complex:
    """
    Cross-check route: the s-th moment sum_n n^s f_n is rebuilt from
    sum_k A(s,k) prod_l (n+k+1-l) / s!, exact in integers for every finite frequency.
    """
    traces = trace_powers(matrix, s_max)
    freqs = [int(n) for n in f.frequencies() if n != 0]
    with mpmath.workdps(40):
        f0 = mpmath.mpc(f.value_at_zero) if f.value_at_zero is not None else mpmath.fsum(
            mpmath.mpc(c) for c in f.coeffs)
        total = f0
        for s in range(1, s_max + 1):
            table = build_eulerian_table(s)
            moment = mpmath.mpc(0)
            for n in freqs:
                power = sum(table.value(s, k) * alpha_coefficients(s, k).evaluate(n) for k in range(s))
                power //= math.factorial(s)
                moment += power * mpmath.mpc(f.coefficient(n))
            total += _phase_power(s) * traces[s] / (matrix.n * mpmath.factorial(s)) * moment
        return complex(total)


@dataclass(frozen=True)
class SpectralAverage:
    """<f> with the route taken and the regime flags that qualify it."""
    value: complex
    route: str
    formal_regime: bool = False
    periodized: bool = False


def spectral_average(matrix: HermitianMatrix, f: FourierTestFunction, s_max: int) -> SpectralAverage:
    """
    Spectral average <f> = (1/N) sum_j f(lambda_j) through the trace formula.
    Exact z-side data is used when the test function carries it, the Fourier side otherwise.
    """
    periodized = _check_periodized(matrix)
    if f.formal_regime:
        logger.warning("Test function '%s' decays slower than exp(-pi n); formal regime", f.name)
    if f.z_derivatives is not None and f.value_at_zero is not None:
        value, route = spectral_average_zside(matrix, f, s_max), 'zside'
    else:
        value, route = spectral_average_fourier(matrix, f, s_max), 'fourier'
    return SpectralAverage(value=value, route=route, formal_regime=f.formal_regime, periodized=periodized)


def bessel_j1(x: float) -> float:
    """J_1(x) from its power series, with working precision raised to absorb cancellation."""
    if x < 0:
        raise ArgumentError(f"x must be non-negative (got {x})")
    if x == 0:
        return 0.0

    dps = 20 + int(math.ceil(0.45 * x))
    with mpmath.workdps(dps):
        half = mpmath.mpf(x) / 2
        term = half
        total = term
        k = 0
        eps = mpmath.mpf(10) ** (-dps)
        while True:
            k += 1
            term = -term * half * half / (k * (k + 1))
            total += term
            if k > x and abs(term) < eps:
                break
        return float(total)


def bessel_j1_hankel(n: int) -> float:
    """J_1(n pi) = n int_{-1}^{1} sqrt(1 - t^2) cos(n pi t) dt, with t = sin(theta)."""
    value, _ = quad(lambda theta: math.cos(theta) ** 2 * math.cos(n * math.pi * math.sin(theta)),
                    -math.pi / 2, math.pi / 2, limit=500, epsabs=1e-13, epsrel=1e-12)
    return n * value


@lru_cache(maxsize=None)
def _bessel_at_multiple_of_pi(n: int) -> float:
    return bessel_j1(n * math.pi)


def semicircle_counting(lam, n_max: int):
    """1/2 + lambda/2pi + (2/pi^2) sum_{n<=n_max} J_1(n pi) sin(n lambda) / n^2."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(np.abs(lam_arr) > math.pi + 1e-12):
        raise ArgumentError("Semicircle counting is defined for |lambda| <= pi")
    n = np.arange(1, n_max + 1)
    coefficients = np.array([_bessel_at_multiple_of_pi(int(k)) for k in n]) / n ** 2
    series = np.sin(np.multiply.outer(lam_arr, n)) @ coefficients if n_max > 0 else 0 * lam_arr
    return _as_output(0.5 + lam_arr / (2 * math.pi) + 2 / math.pi ** 2 * series, lam)


def semicircle_exact(lam):
    """Integrated semicircle on [-pi, pi]."""
    lam_arr = np.asarray(lam, dtype=float)
    for value in np.atleast_1d(lam_arr):
        ensure_valid(validate_semicircle_lambda(float(value)))
    x = np.clip(lam_arr / math.pi, -1.0, 1.0)
    return _as_output(0.5 + (x * np.sqrt(1 - x ** 2) + np.arcsin(x)) / math.pi, lam)


def semicircle_density(lam):
    """(2/pi^2) sqrt(1 - (lambda/pi)^2) on [-pi, pi]."""
    lam_arr = np.asarray(lam, dtype=float)
    x = np.clip(lam_arr / math.pi, -1.0, 1.0)
    return _as_output(2 / math.pi ** 2 * np.sqrt(1 - x ** 2), lam)


def catalan_trace(p: int) -> float:
    """Asymptotic (1/N) tr H^{2p} of the semicircle on [-pi, pi]: C_p (pi/2)^{2p}."""
    if p < 0:
        raise ArgumentError(f"p must be non-negative (got {p})")
    catalan = math.comb(2 * p, p) // (p + 1)
    return catalan * (math.pi / 2) ** (2 * p)


def semicircle_moment(s: int) -> float:
    """Normalized trace of H^s for the semicircle; odd powers vanish."""
    return 0.0 if s % 2 else catalan_trace(s // 2)


def semicircle_coefficient(n: int) -> float:
    """
    Coefficient c_n of sin(n lambda) (times 1/pi) obtained by feeding the Catalan
    moments through the inner s-sum; equals 2 J_1(n pi) / (pi n^2).
    """
    if n < 1:
        raise ArgumentError(f"n must be positive (got {n})")
    dps = BASE_PRECISION_DIGITS + int(math.ceil(n * math.pi / math.log(10)))
    with mpmath.workdps(dps):
        x = mpmath.mpf(n) * mpmath.pi / 2
        total = mpmath.mpf(0)
        p = 0
        eps = mpmath.mpf(10) ** (-dps)
        while True:
            # (-1)^p n^{2p} C_p (pi/2)^{2p} / (2p)! = (-1)^p x^{2p} / (p! (p+1)!)
            term = (-1) ** p * x ** (2 * p) / (mpmath.factorial(p) * mpmath.factorial(p + 1))
            total += term
            if p > 2 * x and abs(term) < eps:
                break
            p += 1
        return float(total / n)
