import json
import math

import numpy as np
import pytest

from services.matrix_service import (
    build_graphs, counting_exact, dump_matrix, eig_hermitian, eigen_residuals, eigensystem, gap,
    hermitian_from_array, load_matrix, load_matrix_file, rescale_to_window, trace_powers, trace_powers_mp
)
from utils.errors import ArgumentError, HermiticityError, MatrixParseError


def test_load_mirrors_missing_conjugates():
    text = json.dumps({'n': 2, 'entries': [[0, 0, 1.0, 0.0], [0, 1, 0.5, 0.25]]})
    matrix = load_matrix(text)
    assert matrix.n == 2
    assert matrix.entries[1, 0] == pytest.approx(0.5 - 0.25j)
    assert matrix.entries[1, 1] == 0


def test_load_accepts_bytes():
    matrix = load_matrix(b'{"n": 1, "entries": [[0, 0, 2.5, 0]]}')
    assert matrix.entries[0, 0] == pytest.approx(2.5)


@pytest.mark.parametrize("payload", [
    'not json',
    '{"entries": []}',
    '{"n": 0, "entries": []}',
    '{"n": 2, "entries": [[0, 2, 1, 0]]}',
    '{"n": 2, "entries": [[0, 1, 1, 0], [0, 1, 1, 0]]}',
    '{"n": 2, "entries": [[0, 1, 1]]}',
    '{"n": 2, "entries": [[0, 1, "x", 0]]}',
    '{"n": 2, "entries": 5}',
    '{"n": 2, "entries": {"0": [0, 0, 1, 0]}}',
    '{"n": 2, "entries": "0,0,1,0"}',
])
def test_load_rejects_malformed_files(payload):
    with pytest.raises(MatrixParseError):
        load_matrix(payload)


def test_load_rejects_non_hermitian_entries():
    text = json.dumps({'n': 2, 'entries': [[0, 1, 1.0, 0.0], [1, 0, 2.0, 0.0]]})
    with pytest.raises(HermiticityError) as excinfo:
        load_matrix(text)
    assert excinfo.value.deviation == pytest.approx(1.0)


def test_non_real_diagonal_is_rejected():
    with pytest.raises(HermiticityError):
        hermitian_from_array([[1.0 + 0.1j]])


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(MatrixParseError):
        load_matrix_file(str(tmp_path / 'absent.json'))


def test_dump_and_load_preserve_entries(make_random_matrix):
    matrix = make_random_matrix(4)
    restored = load_matrix(dump_matrix(matrix))
    np.testing.assert_allclose(restored.entries, matrix.entries, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_eigenvalues_match_lapack(make_random_matrix, n):
    matrix = make_random_matrix(n)
    values = eig_hermitian(matrix)
    assert np.all(np.diff(values) >= 0)
    np.testing.assert_allclose(values, np.linalg.eigvalsh(matrix.entries), atol=1e-10)
    assert np.max(eigen_residuals(matrix)) < 1e-9


def test_degenerate_spectrum():
    values = eig_hermitian(hermitian_from_array(np.eye(3)))
    np.testing.assert_allclose(values, [1.0, 1.0, 1.0], atol=1e-12)


def _unitary(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q


@pytest.mark.parametrize("entries", [
    np.eye(3),
    _unitary(3, 7) @ np.diag([1.0, 1.0, 2.0]) @ _unitary(3, 7).conj().T,
    _unitary(4, 11) @ np.diag([-0.5, 0.3, 0.3, 0.3]) @ _unitary(4, 11).conj().T,
])
def test_degenerate_eigenvectors_are_orthonormal(entries):
    matrix = hermitian_from_array((entries + entries.conj().T) / 2)
    _, vectors = eigensystem(matrix)
    np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(matrix.n), atol=1e-9)
    assert np.max(eigen_residuals(matrix)) < 1e-9


def test_counting_exact_is_right_continuous(figure1_matrix):
    eigs = figure1_matrix.eigenvalues
    assert counting_exact(eigs, -1.6) == 1
    assert counting_exact(eigs, -1.6 - 1e-9) == 0
    assert counting_exact(eigs, 3.0) == 4
    np.testing.assert_array_equal(counting_exact(eigs, np.array([-2.0, 0.0, 0.2])), [0, 2, 3])


def test_gap_and_rescale(make_random_matrix):
    matrix = make_random_matrix(5)
    rescaled = rescale_to_window(matrix, 0.5)
    assert rescaled.scale > 0
    assert not rescaled.zero_matrix
    assert gap(rescaled.matrix) == pytest.approx(0.5, abs=1e-10)


def test_rescale_flags_zero_matrix():
    zero = hermitian_from_array(np.zeros((2, 2)))
    rescaled = rescale_to_window(zero, 0.4)
    assert rescaled.zero_matrix
    assert rescaled.scale == 1.0
    assert rescaled.matrix is zero


def test_rescale_rejects_bad_gap(interval_matrix):
    with pytest.raises(ArgumentError):
        rescale_to_window(interval_matrix, math.pi)


def test_trace_powers(make_random_matrix):
    matrix = make_random_matrix(4)
    traces = trace_powers(matrix, 6)
    eigs = np.linalg.eigvalsh(matrix.entries)
    assert traces[0] == 4
    for s in range(7):
        assert traces[s] == pytest.approx(float(np.sum(eigs ** s)), rel=1e-9, abs=1e-9)


def test_trace_powers_mp_agree_with_float(make_random_matrix):
    matrix = make_random_matrix(3)
    mp_traces = trace_powers_mp(matrix, 5, dps=40)
    np.testing.assert_allclose([float(t) for t in mp_traces], trace_powers(matrix, 5), rtol=1e-10, atol=1e-10)


def test_graphs_of_interval(interval_matrix):
    graphs, phases, gershgorin = build_graphs(interval_matrix)
    assert graphs.n_edges == 1
    assert graphs.directed_edges == ((0, 1), (1, 0))
    assert graphs.edge_id(1, 0) == 1
    assert list(graphs.reverse) == [1, 0]
    np.testing.assert_allclose(gershgorin.radii, [1.0, 1.0])
    np.testing.assert_allclose(phases.h, [[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ArgumentError):
        graphs.edge_id(0, 0)


def test_loops_only_in_first_graph(two_star_matrix):
    graphs, _, _ = build_graphs(two_star_matrix)
    assert np.all(np.diag(graphs.adjacency_I) == 1)
    assert np.all(np.diag(graphs.adjacency_II) == 0)
    assert graphs.neighborhoods == ((1, 2), (0,), (0,))
    assert list(graphs.degrees) == [2, 1, 1]


def test_negative_real_coupling_phase():
    graphs, phases, _ = build_graphs(hermitian_from_array([[0.0, -2.0], [-2.0, 0.0]]))
    assert phases.gamma[1, 0] == pytest.approx(math.pi / 2)
    assert phases.gamma[0, 1] == pytest.approx(-math.pi / 2)
    for v, w in graphs.directed_edges:
        reconstructed = phases.h[v, w] * np.exp(2j * phases.gamma[v, w])
        assert reconstructed == pytest.approx(-2.0)


def test_zero_threshold_drops_small_couplings():
    matrix = hermitian_from_array([[0.0, 1e-6], [1e-6, 0.0]])
    graphs, _, _ = build_graphs(matrix, zero_threshold=1e-3)
    assert graphs.n_edges == 0
    assert graphs.isolated_vertices() == [0, 1]
