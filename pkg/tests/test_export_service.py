import json

import numpy as np
import pandas as pd

from services.export_service import (
    anderson_frame, counting_frame, export_eigenvalues, export_to_csv, export_to_json, result_warnings, walk_frame,
    write_artifact
)
from services.matrix_service import RescaledMatrix, hermitian_from_array
from services.trace_one_service import CountingResult, SpectralAverage
from services.walk_service import AndersonScan, quantum_walk


def test_csv_uses_significant_digits():
    df = pd.DataFrame({'lambda': [1.0 / 3.0], 'value': [2.0]})
    assert export_to_csv(df) == b'lambda,value\n0.333333333333,2\n'
    assert export_to_csv(df, digits=3, header=False) == b'0.333,2\n'


def test_eigenvalue_lines_round_trip():
    values = [-1.0 / 3.0, 0.1, 2.0]
    lines = export_eigenvalues(values).decode().splitlines()
    assert len(lines) == 3
    assert [float(line) for line in lines] == values


def test_json_handles_numpy_and_complex():
    content = export_to_json({
        'count': np.int64(3),
        'residual': np.float64(0.5),
        'ok': np.bool_(True),
        'values': np.array([1.0, 2.0]),
        'zeta': 1 + 2j,
    })
    assert content.endswith(b'\n')
    data = json.loads(content)
    assert data == {'count': 3, 'residual': 0.5, 'ok': True, 'values': [1.0, 2.0], 'zeta': {'re': 1.0, 'im': 2.0}}
    assert list(data) == ['count', 'residual', 'ok', 'values', 'zeta']


def test_counting_frame_columns():
    grid = np.array([0.0, 1.0])
    result = CountingResult(lambdas=grid, smooth=grid, oscillating=np.array([0.25, -0.5]), method='doublesum')
    np.testing.assert_allclose(result.total, [0.25, 0.5])
    assert list(counting_frame(result).columns) == ['lambda', 'smooth', 'oscillating', 'total']
    result.exact = np.array([0.0, 1.0])
    assert list(counting_frame(result).columns) == ['lambda', 'smooth', 'oscillating', 'total', 'exact']


def test_result_warnings_follow_flags():
    grid = np.array([0.0, 1.0])
    plain = CountingResult(lambdas=grid, smooth=grid, oscillating=grid, method='I-doublesum')
    assert result_warnings(plain) == []
    periodized = CountingResult(lambdas=grid, smooth=grid, oscillating=grid, method='I-doublesum', periodized=True)
    assert len(result_warnings(periodized)) == 1

    formal = SpectralAverage(value=1.0, route='zside', formal_regime=True)
    assert 'formal' in result_warnings(formal)[0]

    zero = hermitian_from_array(np.zeros((2, 2)))
    assert 'Zero matrix' in result_warnings(RescaledMatrix(matrix=zero, scale=1.0, zero_matrix=True))[0]


def test_walk_frame_is_sparse(interval_matrix):
    df = walk_frame(quantum_walk(interval_matrix, 0.0, 0, 2))
    assert list(df.columns) == ['step', 'edge', 'probability']
    assert list(df['step']) == [0, 1, 2]
    assert list(df['edge']) == [0, 1, 0]
    np.testing.assert_allclose(df['probability'], 1.0)


def test_anderson_frame_orders_scan_then_roots():
    scan = AndersonScan(grid=np.array([-1.0, 0.0, 1.0]), residuals=np.array([1.0, -1.0, 1.0]),
                        roots=np.array([-0.5, 0.5]), refinements=2)
    df = anderson_frame(scan)
    assert list(df['kind']) == ['scan'] * 3 + ['root'] * 2
    assert list(df.loc[df['kind'] == 'root', 'value']) == [0.0, 0.0]


def test_write_artifact(tmp_path, capsysbinary):
    target = tmp_path / 'out.csv'
    write_artifact(b'a,b\n', str(target))
    assert target.read_bytes() == b'a,b\n'

    write_artifact(b'1\n', '-')
    assert capsysbinary.readouterr().out == b'1\n'
