import time

import numpy as np
import pytest

from services.matrix_service import counting_exact, diagonal_matrix, hermitian_from_array, random_hermitian
from services.scattering_service import (
    EIGENPHASE, TRACESUM, assemble_S_II, assemble_S_II_derivative, closed_form_interval,
    closed_form_two_star, coupling_vector, counting_II, det_S_closed_form, factorization_residual,
    functional_equation_residual, markov_matrix, osc_count_II, osc_density_II, prepare_scattering,
    smooth_count_II, smooth_count_from_blocks, spectral_det, tracesum_tail_bound, two_star_roots,
    unitarity_residual, vertex_scattering, zeta_H
)
from services.trace_one_service import DENSITY
from utils.errors import ArgumentError, SingularityError, StructureError
from utils.linalg import lu_determinant


def test_coupling_vectors(interval_matrix):
    np.testing.assert_allclose(coupling_vector(interval_matrix, 0), [1.0])
    negative = hermitian_from_array([[0.0, -1.0], [-1.0, 0.0]])
    assert coupling_vector(negative, 0)[0] == pytest.approx(1j)
    star = hermitian_from_array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert np.sum(np.abs(coupling_vector(star, 0)) ** 2) == pytest.approx(2.0)


def test_isolated_vertex_has_no_scattering():
    with pytest.raises(StructureError):
        vertex_scattering(diagonal_matrix([5.0, 7.0]), 0, 0.0)
    with pytest.raises(StructureError):
        assemble_S_II(diagonal_matrix([5.0, 7.0]), 0.0)


def test_interval_vertex_phase(interval_matrix):
    block = vertex_scattering(interval_matrix, 0, 0.0)
    assert block.dimension == 1
    assert block.entry(1, 1) == pytest.approx(-1j)


def test_pole_is_a_singularity():
    with pytest.raises(SingularityError):
        vertex_scattering(hermitian_from_array([[0.0, 1.0], [1.0, 0.0]]), 0, 0.0 - 1j)


def test_vertex_blocks_are_unitary_with_degenerate_phase(make_random_matrix, rng):
    data = prepare_scattering(make_random_matrix(5))
    for v in range(5):
        sigma = vertex_scattering(data, v, float(rng.normal())).matrix
        assert np.max(np.abs(sigma.conj().T @ sigma - np.eye(len(sigma)))) < 1e-12
        eigenvalues = np.linalg.eigvals(sigma)
        assert np.sum(np.abs(eigenvalues - 1j) < 1e-8) == len(sigma) - 1


def test_decoupling_limit():
    previous = None
    for h in (1e-2, 1e-4, 1e-6):
        matrix = hermitian_from_array([[0.0, h, 1.0], [h, 0.3, 0.0], [1.0, 0.0, -0.2]])
        block = vertex_scattering(matrix, 0, 0.1)
        cross = abs(block.entry(1, 2))
        assert abs(block.entry(1, 1) - 1j) < 10 * h
        if previous is not None:
            assert cross < previous
        previous = cross


def test_interval_operator(interval_matrix):
    operator = assemble_S_II(interval_matrix, 0.0)
    np.testing.assert_allclose(operator.matrix, [[0, -1j], [-1j, 0]], atol=1e-15)
    np.testing.assert_allclose(operator.permutation @ operator.block_diagonal(), operator.matrix, atol=1e-15)


def test_two_star_block_sparsity(two_star_matrix):
    operator = assemble_S_II(two_star_matrix, 0.4)
    # edges: (0,1) (0,2) (1,0) (2,0); degree-one vertices send straight back to the centre
    pattern = np.abs(operator.matrix) > 0
    expected = np.array([
        [False, False, True, False],
        [False, False, False, True],
        [True, True, False, False],
        [True, True, False, False],
    ])
    np.testing.assert_array_equal(pattern, expected)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_operator_unitarity_and_determinant(make_random_matrix, rng, n):
    matrix = make_random_matrix(n)
    for lam in rng.normal(scale=2.0, size=4):
        operator = assemble_S_II(matrix, float(lam))
        assert unitarity_residual(operator) < 1e-12
        det = lu_determinant(operator.matrix)
        closed = det_S_closed_form(matrix, float(lam))
        assert abs(det - closed) < 1e-10 * abs(closed)
        assert abs(det) == pytest.approx(1.0)


def test_interval_determinant_values(interval_matrix):
    assert spectral_det(interval_matrix, 0.0) == pytest.approx(2.0)
    assert spectral_det(interval_matrix, 0.3 + 0.2j, 0.0) == pytest.approx(1.0)
    assert abs(spectral_det(interval_matrix, 1.0)) < 1e-12
    assert factorization_residual(interval_matrix, 0.0) < 1e-14


@pytest.mark.parametrize("n", [2, 3, 6])
def test_factorization_on_random_complex_points(make_random_matrix, rng, n):
    matrix = make_random_matrix(n)
    for _ in range(10):
        lam = complex(rng.normal(scale=2.0), rng.normal())
        assert factorization_residual(matrix, lam) < 1e-9


@pytest.mark.slow
def test_factorization_at_full_scale(rng):
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        data = prepare_scattering(random_hermitian(int(rng.integers(2, 7)), rng))
        for _ in range(100):
            lam = complex(rng.normal(scale=2.0), rng.normal())
            worst = max(worst, factorization_residual(data, lam))
    assert worst < 1e-9
    assert time.perf_counter() - start < 10.0


def test_zeros_are_eigenvalues(make_random_matrix):
    matrix = make_random_matrix(4)
    scale = abs(spectral_det(matrix, 0.0))
    for eigenvalue in matrix.eigenvalues:
        assert abs(spectral_det(matrix, float(eigenvalue))) < 1e-8 * max(scale, 1.0)
        assert abs(zeta_H(matrix, float(eigenvalue))) < 1e-8 * max(1.0, matrix.norm ** 4)


def test_large_lambda_limit(make_random_matrix):
    matrix = make_random_matrix(4)
    edges = prepare_scattering(matrix).graphs.n_edges
    assert spectral_det(matrix, 1e7) == pytest.approx(2.0 ** edges, rel=1e-5)


def test_functional_equation(make_random_matrix, rng):
    matrix = make_random_matrix(5)
    for lam in rng.normal(size=5):
        assert functional_equation_residual(matrix, float(lam)) < 1e-10


def test_smooth_count_limits(interval_matrix, make_random_matrix):
    assert smooth_count_II(interval_matrix, 0.0) == pytest.approx(1.0)
    matrix = make_random_matrix(4)
    assert smooth_count_II(matrix, -1e8) == pytest.approx(0.0, abs=1e-6)
    assert smooth_count_II(matrix, 1e8) == pytest.approx(4.0, abs=1e-6)


def test_smooth_count_of_edgeless_matrix():
    matrix = diagonal_matrix([-1.0, 0.5, 2.0])
    np.testing.assert_array_equal(smooth_count_II(matrix, np.array([-2.0, 0.0, 0.5, 3.0])), [0, 1, 2, 3])
    assert smooth_count_II(matrix, 0.0, DENSITY) == 0.0


def test_smooth_count_routes_agree(make_random_matrix):
    matrix = make_random_matrix(4)
    for lam in (-1.3, 0.2, 2.2):
        assert smooth_count_from_blocks(matrix, lam) == pytest.approx(smooth_count_II(matrix, lam), abs=1e-12)


def test_smooth_density_is_derivative(make_random_matrix):
    matrix = make_random_matrix(3)
    h = 1e-6
    for lam in (-0.5, 0.9):
        numeric = (smooth_count_II(matrix, lam + h) - smooth_count_II(matrix, lam - h)) / (2 * h)
        assert numeric == pytest.approx(smooth_count_II(matrix, lam, DENSITY), abs=1e-6)


def test_interval_oscillating_part_vanishes(interval_matrix):
    assert osc_count_II(interval_matrix, 0.0, 1e-4) == pytest.approx(0.0, abs=1e-6)
    assert osc_count_II(interval_matrix, 0.0, 1e-4, n_max=0, method=TRACESUM) == 0.0
    with pytest.raises(ArgumentError):
        osc_count_II(interval_matrix, 0.0, 0.0)
    with pytest.raises(ArgumentError):
        osc_count_II(interval_matrix, 0.0, 0.1, method='qr')


def test_edgeless_oscillating_part_is_zero():
    matrix = diagonal_matrix([0.0, 1.0])
    assert osc_count_II(matrix, 0.5, 1e-3) == 0.0
    assert osc_density_II(matrix, 0.5, 1e-3) == 0.0


def test_counting_matches_exact(make_random_matrix):
    matrix = make_random_matrix(4)
    eigs = matrix.eigenvalues
    grid = np.linspace(eigs[0] - 1.0, eigs[-1] + 1.0, 80)
    grid = grid[np.min(np.abs(grid[:, None] - eigs[None, :]), axis=1) > 0.05]
    result = counting_II(matrix, grid, 1e-4)
    assert result.method == 'II-eigenphase'
    assert np.max(np.abs(result.total - counting_exact(eigs, grid))) < 1e-3
    assert result.total[-1] - result.total[0] == pytest.approx(4.0, abs=1e-3)


def test_tracesum_converges_to_eigenphase(make_random_matrix):
    matrix = make_random_matrix(3)
    eigenphase = osc_count_II(matrix, 0.3, 0.5, method=EIGENPHASE)
    tracesum = osc_count_II(matrix, 0.3, 0.5, n_max=200, method=TRACESUM)
    assert tracesum == pytest.approx(eigenphase, abs=1e-8 + tracesum_tail_bound(matrix, 0.3, 0.5, 200))


def test_density_mode_is_derivative_of_counting(make_random_matrix):
    matrix = make_random_matrix(3)
    h, epsilon = 1e-5, 0.05
    lam = 0.37
    numeric = (osc_count_II(matrix, lam + h, epsilon) - osc_count_II(matrix, lam - h, epsilon)) / (2 * h)
    assert numeric == pytest.approx(osc_density_II(matrix, lam, epsilon), abs=1e-5)
    result = counting_II(matrix, [lam], epsilon, mode=DENSITY)
    assert result.method == 'II-resolvent'


def test_derivative_operator(make_random_matrix):
    matrix = make_random_matrix(3)
    h = 1e-6
    numeric = (assemble_S_II(matrix, 0.2 + h).matrix - assemble_S_II(matrix, 0.2 - h).matrix) / (2 * h)
    np.testing.assert_allclose(assemble_S_II_derivative(matrix, 0.2), numeric, atol=1e-7)


def test_markov_matrix_is_bistochastic(make_random_matrix, interval_matrix):
    np.testing.assert_allclose(markov_matrix(interval_matrix, 0.0), [[0, 1], [1, 0]], atol=1e-15)
    markov = markov_matrix(make_random_matrix(5), 0.4)
    np.testing.assert_allclose(markov.sum(axis=0), 1.0, atol=1e-10)
    np.testing.assert_allclose(markov.sum(axis=1), 1.0, atol=1e-10)


def test_interval_closed_form(interval_matrix):
    assert closed_form_interval(interval_matrix, 0.0, 1.0) == pytest.approx(2.0)
    assert closed_form_interval(interval_matrix, 0.4, 0.0) == pytest.approx(1.0)
    assert abs(closed_form_interval(interval_matrix, 1.0, 1.0)) < 1e-12
    matrix = hermitian_from_array([[0.4, 0.3 - 0.8j], [0.3 + 0.8j, -1.1]])
    for lam, z in [(0.3 + 0.1j, 0.7), (-1.2, 0.5 - 0.5j)]:
        assert closed_form_interval(matrix, lam, z) == pytest.approx(spectral_det(matrix, lam, z), abs=1e-12)
    with pytest.raises(StructureError):
        closed_form_interval(diagonal_matrix([1.0, 2.0]), 0.0, 1.0)


def test_two_star_closed_form(two_star_matrix, rng):
    for _ in range(5):
        lam = complex(rng.normal(), rng.normal())
        z = complex(rng.normal(scale=0.5), rng.normal(scale=0.5))
        assert closed_form_two_star(two_star_matrix, lam, z) == pytest.approx(
            spectral_det(two_star_matrix, lam, z), abs=1e-12)
    assert closed_form_two_star(two_star_matrix, 0.4, 0.0) == pytest.approx(1.0)


def test_symmetric_two_star_vanishes_at_zero():
    star = hermitian_from_array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert abs(closed_form_two_star(star, 0.0, 1.0)) < 1e-12
    with pytest.raises(StructureError):
        closed_form_two_star(hermitian_from_array(np.ones((3, 3))), 0.0, 1.0)


def test_two_star_roots(two_star_matrix):
    roots = two_star_roots(two_star_matrix, 0.25 + 0.1j)
    assert len(roots) == 4
    for z in roots:
        assert abs(spectral_det(two_star_matrix, 0.25 + 0.1j, z)) < 1e-9
