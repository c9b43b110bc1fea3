"""
Identity suite: combinatorial and scattering identities checked case by case,
collected into a machine-readable report.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import IDENTITY_S_MAX, IDENTITY_TRIALS
from services.combinatorics_service import (
    EulerianTable, alpha_orthogonality, build_eulerian_table, eulerian_by_descents,
    eulerian_number, low_order_corollaries, polylog_neg, polylog_neg_series,
    polylog_neg_stirling, verify_delta_identity, verify_worpitzky, worpitzky_integer_residuals
)
from services.matrix_service import random_hermitian
from services.scattering_service import (
    assemble_S_II, det_S_closed_form, factorization_residual, prepare_scattering, unitarity_residual
)
from utils.errors import ArgumentError, IdentityFailure
from utils.linalg import lu_determinant

logger = logging.getLogger(__name__)

DESCENT_CENSUS_MAX_ORDER = 7
DELTA_MAX_ORDER = 8
WORPITZKY_SAMPLES = (0.5, -1.3, 2.0 + 1.0j, 0.25j)
POLYLOG_SAMPLES = (0.3, -0.5, 0.4j, 0.3 + 0.3j)

TOLERANCES = {
    'eulerian_table': 0.0,
    'row_sums': 0.0,
    'worpitzky': 1e-9,
    'worpitzky_integer': 0.0,
    'delta_identity': 1e-9,
    'alpha_orthogonality': 0.0,
    'low_order_corollaries': 0.0,
    'polylog': 1e-10,
    'factorization': 1e-9,
    'unitarity': 1e-12,
    'det_product': 1e-10,
}


@dataclass(frozen=True)
class IdentityCase:
    section: str
    case: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class IdentityReport:
    s_max: int
    trials: int
    seed: int
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def first_failure(self):
        return next((c for c in self.cases if not c.passed), None)

    def add(self, section: str, case: str, residual: float):
        self.cases.append(IdentityCase(section, case, float(residual), TOLERANCES[section]))

    def to_dict(self) -> dict:
        """Report with a fixed key order: summary first, then one entry per section."""
        sections = {}
        for c in self.cases:
            entry = sections.setdefault(c.section, {'passed': True, 'max_residual': 0.0, 'cases': 0})
            entry['passed'] = entry['passed'] and c.passed
            entry['max_residual'] = max(entry['max_residual'], c.residual)
            entry['cases'] += 1

        failure = self.first_failure
        return {
            'passed': self.passed,
            's_max': self.s_max,
            'trials': self.trials,
            'seed': self.seed,
            'first_failure': None if failure is None else {
                'section': failure.section,
                'case': failure.case,
                'residual': failure.residual,
                'tolerance': failure.tolerance,
            },
            'sections': sections,
        }

    def raise_on_failure(self):
        failure = self.first_failure
        if failure is not None:
            raise IdentityFailure(failure.section, failure.case, failure.residual)


def _check_table(report: IdentityReport, table: EulerianTable):
    for s in range(1, report.s_max + 1):
        row = table.row(s)
        for k in range(s):
            reference = eulerian_by_descents(s, k) if s <= DESCENT_CENSUS_MAX_ORDER else eulerian_number(s, k)
            report.add('eulerian_table', f's={s},k={k}', abs(row[k] - reference))
        report.add('row_sums', f's={s}', abs(sum(row) - math.factorial(s)))


def _check_worpitzky(report: IdentityReport, table: EulerianTable, rng: np.random.Generator):
    random_samples = [complex(*rng.uniform(-2, 2, size=2)) for _ in range(report.trials)]
    for s in range(1, report.s_max + 1):
        report.add('worpitzky', f's={s}', verify_worpitzky(s, list(WORPITZKY_SAMPLES) + random_samples, table))
        for r in range(s):
            upper, mirror = worpitzky_integer_residuals(s, r, table)
            report.add('worpitzky_integer', f's={s},r={r}', max(abs(upper), abs(mirror)))


def _check_delta(report: IdentityReport, table: EulerianTable):
    top = min(report.s_max, DELTA_MAX_ORDER)
    for s in range(1, top + 1):
        for m in range(1, top + 1):
            report.add('delta_identity', f's={s},m={m}', verify_delta_identity(s, m, table))


def _check_alpha(report: IdentityReport, table: EulerianTable):
    for s in range(1, report.s_max + 1):
        sums = alpha_orthogonality(s, table)
        expected = [0] * s + [math.factorial(s)]
        report.add('alpha_orthogonality', f's={s}', max(abs(a - b) for a, b in zip(sums, expected)))
        if s >= 2:
            first, second = low_order_corollaries(s, table)
            report.add('low_order_corollaries', f's={s}', max(abs(first), abs(second)))


def _check_polylog(report: IdentityReport, rng: np.random.Generator):
    random_samples = [0.6 * complex(np.exp(2j * math.pi * rng.random())) * rng.random()
                      for _ in range(report.trials)]
    for s in range(report.s_max + 1):
        for z in list(POLYLOG_SAMPLES) + random_samples:
            rational = polylog_neg(s, z)
            scale = max(1.0, abs(polylog_neg(s, abs(z))))
            residual = max(abs(rational - polylog_neg_series(s, z)), abs(rational - polylog_neg_stirling(s, z)))
            report.add('polylog', f's={s},z={z:.4g}', residual / scale)


def _check_scattering(report: IdentityReport, rng: np.random.Generator):
    for trial in range(report.trials):
        n = int(rng.integers(2, 7))
        matrix = random_hermitian(n, rng)
        data = prepare_scattering(matrix)

        lam = complex(rng.normal(), rng.normal())
        report.add('factorization', f'trial={trial},n={n}', factorization_residual(data, lam))

        real_lam = float(rng.normal(scale=2.0))
        operator = assemble_S_II(data, real_lam)
        report.add('unitarity', f'trial={trial},n={n}', unitarity_residual(operator))
        det_s = lu_determinant(operator.matrix)
        report.add('det_product', f'trial={trial},n={n}', abs(det_s - det_S_closed_form(data, real_lam)))


def run_identity_suite(s_max: int = IDENTITY_S_MAX, trials: int = IDENTITY_TRIALS, seed: int = 0,
                       table: EulerianTable = None) -> IdentityReport:
    """
    Run every identity section. Deterministic sections always run; randomized
    sections use `trials` draws from a generator seeded with `seed`.
    A custom Eulerian table can be supplied to exercise failure reporting.
    """
    if s_max < 1:
        raise ArgumentError(f"s_max must be at least 1 (got {s_max})")
    if trials < 0:
        raise ArgumentError(f"trials must be non-negative (got {trials})")
    table = table or build_eulerian_table(s_max)
    if table.max_order < s_max:
        raise ArgumentError(f"Eulerian table covers s <= {table.max_order}, need {s_max}")

    rng = np.random.default_rng(seed)
    report = IdentityReport(s_max=s_max, trials=trials, seed=seed)
    _check_table(report, table)
    _check_worpitzky(report, table, rng)
    _check_delta(report, table)
    _check_alpha(report, table)
    _check_polylog(report, rng)
    _check_scattering(report, rng)

    logger.info("Identity suite: %d cases, %s", len(report.cases), 'passed' if report.passed else 'FAILED')
    return report
