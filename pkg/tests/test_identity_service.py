import pytest

from services.combinatorics_service import build_eulerian_table
from services.identity_service import IdentityCase, run_identity_suite
from utils.errors import ArgumentError, IdentityFailure


def test_default_suite_passes():
    report = run_identity_suite()
    assert report.passed, report.first_failure
    assert report.first_failure is None
    report.raise_on_failure()


def test_small_suite_covers_every_section():
    report = run_identity_suite(s_max=6, trials=2, seed=4)
    sections = {case.section for case in report.cases}
    assert sections == {
        'eulerian_table', 'row_sums', 'worpitzky', 'worpitzky_integer', 'delta_identity',
        'alpha_orthogonality', 'low_order_corollaries', 'polylog', 'factorization', 'unitarity', 'det_product',
    }
    assert report.passed


def test_injected_fault_is_located():
    table = build_eulerian_table(12).with_entry(5, 2, 67)
    report = run_identity_suite(s_max=12, trials=1, table=table)
    assert not report.passed
    failure = report.first_failure
    assert failure.section == 'eulerian_table'
    assert failure.case == 's=5,k=2'
    assert failure.residual == pytest.approx(1.0)
    with pytest.raises(IdentityFailure):
        report.raise_on_failure()


def test_zero_trials_still_runs_deterministic_sections():
    report = run_identity_suite(s_max=5, trials=0)
    sections = {case.section for case in report.cases}
    assert 'eulerian_table' in sections
    assert 'factorization' not in sections
    assert report.passed


def test_report_dict_layout():
    report = run_identity_suite(s_max=4, trials=1)
    data = report.to_dict()
    assert list(data) == ['passed', 's_max', 'trials', 'seed', 'first_failure', 'sections']
    assert data['passed'] is True
    assert data['first_failure'] is None
    assert data['sections']['row_sums'] == {'passed': True, 'max_residual': 0.0, 'cases': 4}


def test_report_dict_names_first_failure():
    table = build_eulerian_table(6).with_entry(3, 1, 5)
    data = run_identity_suite(s_max=6, trials=0, table=table).to_dict()
    assert data['passed'] is False
    assert data['first_failure']['section'] == 'eulerian_table'
    assert data['first_failure']['case'] == 's=3,k=1'
    assert data['sections']['row_sums']['passed'] is False


def test_case_tolerance():
    assert IdentityCase('polylog', 's=1', 1e-12, 1e-10).passed
    assert not IdentityCase('polylog', 's=1', 1e-9, 1e-10).passed


def test_bad_arguments():
    with pytest.raises(ArgumentError):
        run_identity_suite(s_max=0)
    with pytest.raises(ArgumentError):
        run_identity_suite(trials=-1)
    with pytest.raises(ArgumentError):
        run_identity_suite(s_max=8, table=build_eulerian_table(5))
