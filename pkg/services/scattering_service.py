"""
Directed-edge scattering formulation: vertex scattering matrices, the unitary
evolution operator S_II(lambda) on directed edges, its spectral determinant,
and the counting function and density derived from it.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from config import DEFAULT_TRACE_TERMS_II, DEFAULT_ZERO_THRESHOLD, POLE_TOLERANCE
from services.matrix_service import (
    AssociatedGraphs, EdgePhases, GershgorinData, HermitianMatrix, build_graphs
)
from services.trace_one_service import COUNTING, DENSITY, CountingResult, _check_mode
from utils.errors import ArgumentError, SingularityError, StructureError
from utils.linalg import lu_determinant

logger = logging.getLogger(__name__)

EIGENPHASE = 'eigenphase'
TRACESUM = 'tracesum'


@dataclass(frozen=True, eq=False)
class VertexScattering:
    """sigma^{(v)}(lambda), rows and columns indexed by the sorted neighborhood E_v."""
    vertex: int
    neighbors: tuple
    matrix: np.ndarray
    lam: complex

    @property
    def dimension(self) -> int:
        return len(self.neighbors)

    def entry(self, out_to: int, in_from: int) -> complex:
        """Amplitude for arriving from `in_from` and leaving towards `out_to`."""
        return complex(self.matrix[self.neighbors.index(out_to), self.neighbors.index(in_from)])


@dataclass(frozen=True, eq=False)
class EvolutionOperatorII:
    """S_II(lambda) = P blockdiag(sigma^{(v)}) over lexicographically ordered directed edges."""
    matrix: np.ndarray
    blocks: tuple
    permutation: np.ndarray
    graphs: AssociatedGraphs
    lam: complex

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def block_diagonal(self) -> np.ndarray:
        """blockdiag(sigma^{(1)}, ..., sigma^{(N)}) in edge order, before the reversal P."""
        size = self.dimension
        blockdiag = np.zeros((size, size), dtype=complex)
        for block in self.blocks:
            idx = [self.graphs.edge_id(block.vertex, w) for w in block.neighbors]
            blockdiag[np.ix_(idx, idx)] = block.matrix
        return blockdiag


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Graph-derived data shared by every evaluation point of one matrix."""
    matrix: HermitianMatrix
    graphs: AssociatedGraphs
    phases: EdgePhases
    gershgorin: GershgorinData
    couplings: tuple


def prepare_scattering(matrix: HermitianMatrix, zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> ScatteringData:
    """Build graphs, edge phases and coupling vectors once per matrix."""
    graphs, phases, gershgorin = build_graphs(matrix, zero_threshold)
    couplings = tuple(
        _coupling(phases, v, graphs.neighborhoods[v]) if graphs.neighborhoods[v] else None
        for v in range(matrix.n)
    )
    return ScatteringData(matrix=matrix, graphs=graphs, phases=phases, gershgorin=gershgorin,
                          couplings=couplings)


def _data(matrix_or_data, zero_threshold=DEFAULT_ZERO_THRESHOLD) -> ScatteringData:
    if isinstance(matrix_or_data, ScatteringData):
        return matrix_or_data
    return prepare_scattering(matrix_or_data, zero_threshold)


def _coupling(phases: EdgePhases, v: int, neighbors: tuple) -> np.ndarray:
    idx = list(neighbors)
    return np.sqrt(phases.h[v, idx]) * np.exp(-1j * phases.gamma[v, idx])


def coupling_vector(matrix, v: int) -> np.ndarray:
    """Lambda^{(v)}_w = sqrt(h_vw) exp(-i gamma_vw) for w in E_v."""
    data = _data(matrix)
    if not data.graphs.neighborhoods[v]:
        raise StructureError(f"Vertex {v} is isolated; it has no scattering problem")
    return data.couplings[v].copy()


def _pole_distance(data: ScatteringData, v: int, lam: complex) -> complex:
    denominator = data.gershgorin.centers[v] - lam - 1j * data.gershgorin.radii[v]
    if abs(denominator) < POLE_TOLERANCE:
        raise SingularityError(f"lambda={lam} is at the pole of vertex {v}")
    return denominator


def vertex_scattering(matrix, v: int, lam: complex) -> VertexScattering:
    """
    sigma^{(v)}(lambda) = i I - 2 Lambda Lambda^H / (H_vv - lambda - i Gamma_v).
    Unitary for real lambda.
    """
    data = _data(matrix)
    neighbors = data.graphs.neighborhoods[v]
    if not neighbors:
        raise StructureError(f"Vertex {v} is isolated; it has no scattering problem")

    denominator = _pole_distance(data, v, lam)
    coupling = data.couplings[v]
    sigma = 1j * np.eye(len(neighbors)) - (2.0 / denominator) * np.outer(coupling, coupling.conj())
    return VertexScattering(vertex=v, neighbors=neighbors, matrix=sigma, lam=complex(lam))


def vertex_scattering_derivative(matrix, v: int, lam: complex) -> np.ndarray:
    """d sigma^{(v)} / d lambda = -2 Lambda Lambda^H / (H_vv - lambda - i Gamma_v)^2."""
    data = _data(matrix)
    denominator = _pole_distance(data, v, lam)
    coupling = data.couplings[v]
    return -2.0 * np.outer(coupling, coupling.conj()) / denominator ** 2


def _edge_permutation(graphs: AssociatedGraphs) -> np.ndarray:
    size = len(graphs.directed_edges)
    permutation = np.zeros((size, size))
    permutation[graphs.reverse, np.arange(size)] = 1.0
    return permutation


def _assemble_from_blocks(data: ScatteringData, blocks: list) -> np.ndarray:
    graphs = data.graphs
    size = len(graphs.directed_edges)
    s_matrix = np.zeros((size, size), dtype=complex)
    for v, block in blocks:
        neighbors = graphs.neighborhoods[v]
        cols = [graphs.edge_index[(v, w)] for w in neighbors]
        rows = [graphs.edge_index[(w, v)] for w in neighbors]
        s_matrix[np.ix_(rows, cols)] = block
    return s_matrix


def assemble_S_II(matrix, lam: complex) -> EvolutionOperatorII:
    """
    S_{(v',v),(v,w)} = sigma^{(v)}_{v',w}; row edge (v', v) is the amplitude arriving
    at v' from v. Equivalent to P blockdiag(sigma) with P the edge reversal.
    """
    data = _data(matrix)
    graphs = data.graphs
    if graphs.n_edges == 0:
        raise StructureError("Matrix has no off-diagonal couplings; S_II is empty")

    blocks = tuple(
        vertex_scattering(data, v, lam) for v in range(graphs.n_vertices) if graphs.neighborhoods[v]
    )
    s_matrix = _assemble_from_blocks(data, [(b.vertex, b.matrix) for b in blocks])
    return EvolutionOperatorII(matrix=s_matrix, blocks=blocks, permutation=_edge_permutation(graphs),
                               graphs=graphs, lam=complex(lam))


def assemble_S_II_derivative(matrix, lam: complex) -> np.ndarray:
    """dS_II / d lambda, built from the vertex derivatives with the same layout."""
    data = _data(matrix)
    blocks = [
        (v, vertex_scattering_derivative(data, v, lam))
        for v in range(data.graphs.n_vertices) if data.graphs.neighborhoods[v]
    ]
    return _assemble_from_blocks(data, blocks)


def unitarity_residual(operator: EvolutionOperatorII) -> float:
    """max |S^H S - I|."""
    s_matrix = operator.matrix
    return float(np.max(np.abs(s_matrix.conj().T @ s_matrix - np.eye(len(s_matrix)))))


def det_S_closed_form(matrix, lam: complex) -> complex:
    """prod over coupled vertices of (H_vv - lambda + i Gamma_v) / (H_vv - lambda - i Gamma_v)."""
    data = _data(matrix)
    value = 1.0 + 0j
    for v in range(data.graphs.n_vertices):
        if data.graphs.neighborhoods[v]:
            a = data.gershgorin.centers[v] - lam
            gamma = data.gershgorin.radii[v]
            value *= (a + 1j * gamma) / (a - 1j * gamma)
    return value


def spectral_det(matrix, lam: complex, z: complex = 1.0) -> complex:
    """zeta_II(lambda, z) = det(I - z S_II(lambda)) by pivoted LU."""
    operator = assemble_S_II(matrix, lam)
    return lu_determinant(np.eye(operator.dimension) - z * operator.matrix)


def zeta_H(matrix, lam: complex) -> complex:
    """det(H - lambda I)."""
    hermitian = matrix.matrix if isinstance(matrix, ScatteringData) else matrix
    return lu_determinant(np.asarray(hermitian.entries) - lam * np.eye(hermitian.n))


def factorization_rhs(matrix, lam: complex) -> complex:
    """2^E zeta_H(lambda) / prod_v (H_vv - lambda - i Gamma_v)."""
    data = _data(matrix)
    denominator = np.prod(data.gershgorin.centers - lam - 1j * data.gershgorin.radii)
    return 2.0 ** data.graphs.n_edges * zeta_H(data, lam) / denominator


def factorization_residual(matrix, lam: complex) -> float:
    """Relative residual between det(I - S_II) and its factorized form."""
    data = _data(matrix)
    lhs = spectral_det(data, lam, 1.0)
    rhs = factorization_rhs(data, lam)
    return float(abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300))


def functional_equation_residual(matrix, lam: float) -> float:
    """|zeta_II - det(S_II) conj(zeta_II)| / (1 + |zeta_II|) for real lambda."""
    data = _data(matrix)
    operator = assemble_S_II(data, lam)
    zeta = lu_determinant(np.eye(operator.dimension) - operator.matrix)
    det_s = lu_determinant(operator.matrix)
    return float(abs(zeta - det_s * np.conj(zeta)) / (1.0 + abs(zeta)))


def smooth_count_II(matrix, lam, mode: str = COUNTING):
    """
    Counting: sum_v arccos((H_vv - lambda) / sqrt((H_vv - lambda)^2 + Gamma_v^2)) / pi.
    Isolated vertices contribute the sharp step theta(lambda - H_vv) to the count and
    nothing to the smooth density.
    """
    _check_mode(mode)
    data = _data(matrix)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    a = data.gershgorin.centers[np.newaxis, :] - lam_arr[:, np.newaxis]
    gamma = data.gershgorin.radii[np.newaxis, :]
    coupled = gamma > 0

    if mode == COUNTING:
        angles = np.arctan2(gamma, a) / math.pi
        steps = (lam_arr[:, np.newaxis] >= data.gershgorin.centers[np.newaxis, :]).astype(float)
        values = np.where(coupled, angles, steps).sum(axis=1)
    else:
        with np.errstate(divide='ignore', invalid='ignore'):
            lorentz = np.where(coupled, gamma / (math.pi * (a ** 2 + gamma ** 2)), 0.0)
        values = lorentz.sum(axis=1)

    return float(values[0]) if np.ndim(lam) == 0 else values


def smooth_count_from_blocks(matrix, lam: float) -> float:
    """
    Smooth count read off the phases of det sigma^{(v)} / i^{d_v}, each taken in [0, 2 pi),
    plus the isolated-vertex steps.
    """
    data = _data(matrix)
    total = 0.0
    for v in range(data.graphs.n_vertices):
        if data.graphs.neighborhoods[v]:
            block = vertex_scattering(data, v, lam)
            phase = np.angle(lu_determinant(block.matrix) / 1j ** block.dimension) % (2 * math.pi)
            total += phase / (2 * math.pi)
        else:
            total += float(lam >= data.gershgorin.centers[v])
    return total


def _check_epsilon(epsilon: float):
    if epsilon is None or epsilon <= 0:
        raise ArgumentError(f"epsilon must be positive (got {epsilon})")


def osc_count_II(matrix, lam: float, epsilon: float, n_max: int = DEFAULT_TRACE_TERMS_II,
                 method: str = EIGENPHASE) -> float:
    """
    -(1/pi) Im log zeta_II(lambda + i epsilon), either from the eigenvalues z_k of the
    subunitary S_II with principal logs of (1 - z_k), or from (1/pi) Im sum_n tr S^n / n.
    """
    _check_epsilon(epsilon)
    data = _data(matrix)
    if data.graphs.n_edges == 0:
        return 0.0

    s_matrix = assemble_S_II(data, lam + 1j * epsilon).matrix
    if method == EIGENPHASE:
        eigenvalues = np.linalg.eigvals(s_matrix)
        return float(-np.sum(np.log(1 - eigenvalues).imag) / math.pi)
    if method == TRACESUM:
        total = 0j
        power = np.eye(len(s_matrix), dtype=complex)
        for n in range(1, n_max + 1):
            power = s_matrix @ power
            total += np.trace(power) / n
        return float(total.imag / math.pi)
    raise ArgumentError(f"Unknown method '{method}'")


def tracesum_tail_bound(matrix, lam: float, epsilon: float, n_max: int) -> float:
    """(2E / pi) sum_{n > n_max} q^n / n with q the largest |z_k| of S_II(lambda + i epsilon)."""
    data = _data(matrix)
    if data.graphs.n_edges == 0:
        return 0.0
    q = float(np.max(np.abs(np.linalg.eigvals(assemble_S_II(data, lam + 1j * epsilon).matrix))))
    head = sum(q ** n / n for n in range(1, n_max + 1))
    return 2 * data.graphs.n_edges / math.pi * max(0.0, -math.log1p(-q) - head)


def osc_density_II(matrix, lam: float, epsilon: float) -> float:
    """(1/pi) Im tr((I - S)^{-1} dS/d lambda) at lambda + i epsilon."""
    _check_epsilon(epsilon)
    data = _data(matrix)
    if data.graphs.n_edges == 0:
        return 0.0
    point = lam + 1j * epsilon
    s_matrix = assemble_S_II(data, point).matrix
    derivative = assemble_S_II_derivative(data, point)
    resolvent_term = np.linalg.solve(np.eye(len(s_matrix)) - s_matrix, derivative)
    return float(np.trace(resolvent_term).imag / math.pi)


def counting_II(matrix: HermitianMatrix, grid, epsilon: float, mode: str = COUNTING,
                method: str = EIGENPHASE, n_max: int = DEFAULT_TRACE_TERMS_II,
                zero_threshold: float = DEFAULT_ZERO_THRESHOLD, evaluator=None) -> CountingResult:
    """Evaluate the scattering trace formula on a grid."""
    _check_mode(mode)
    _check_epsilon(epsilon)
    data = prepare_scattering(matrix, zero_threshold)
    evaluator = evaluator or (lambda func, points: func(points))
    grid = np.asarray(grid, dtype=float)

    def oscillating(points):
        if mode == COUNTING:
            return np.array([osc_count_II(data, float(x), epsilon, n_max, method) for x in points])
        return np.array([osc_density_II(data, float(x), epsilon) for x in points])

    smooth = smooth_count_II(data, grid, mode)
    osc = evaluator(oscillating, grid)
    return CountingResult(lambdas=grid, smooth=np.asarray(smooth), oscillating=np.asarray(osc),
                          method=f'II-{method}' if mode == COUNTING else 'II-resolvent', mode=mode)


def markov_matrix(matrix, lam: float) -> np.ndarray:
    """M_{e'e} = |S_{e'e}|^2, bi-stochastic for real lambda."""
    return np.abs(assemble_S_II(matrix, lam).matrix) ** 2


def _interval_phase(diagonal: float, coupling: float, lam: complex) -> complex:
    a = diagonal - lam
    return 1j * (a + 1j * coupling) / (a - 1j * coupling)


def closed_form_interval(matrix: HermitianMatrix, lam: complex, z: complex) -> complex:
    """1 - z^2 sigma^{(1)}_{22} sigma^{(2)}_{11} for a coupled 2 x 2 matrix."""
    if matrix.n != 2 or matrix.entries[0, 1] == 0:
        raise StructureError("Interval closed form needs a 2 x 2 matrix with H_12 != 0")
    h = abs(matrix.entries[0, 1])
    sigma_1 = _interval_phase(matrix.entries[0, 0].real, h, lam)
    sigma_2 = _interval_phase(matrix.entries[1, 1].real, h, lam)
    return 1 - z ** 2 * sigma_1 * sigma_2


def _two_star_parts(matrix: HermitianMatrix, lam: complex):
    entries = np.asarray(matrix.entries)
    if matrix.n != 3 or entries[1, 2] != 0 or entries[0, 1] == 0 or entries[0, 2] == 0:
        raise StructureError("Two-star closed form needs H_23 = 0 and H_12, H_13 != 0")
    h12, h13 = abs(entries[0, 1]), abs(entries[0, 2])
    radii = np.array([h12 + h13, h12, h13])
    a = entries.diagonal().real - lam
    plus = np.prod(a + 1j * radii)
    minus = np.prod(a - 1j * radii)
    k_term = zeta_H(matrix, lam) + h12 * h13 * np.sum(a)
    return k_term, plus, minus


def closed_form_two_star(matrix: HermitianMatrix, lam: complex, z: complex) -> complex:
    """
    1 + z^2 [2 zeta_H + 2 Gamma_2 Gamma_3 tr(H - lambda)] / prod(a_v - i Gamma_v)
      + z^4 prod (a_v + i Gamma_v) / (a_v - i Gamma_v), with a_v = H_vv - lambda.
    """
    k_term, plus, minus = _two_star_parts(matrix, lam)
    return 1 + z ** 2 * 2 * k_term / minus + z ** 4 * plus / minus


def two_star_roots(matrix: HermitianMatrix, lam: complex) -> np.ndarray:
    """The four z with zeta_II(lambda, z) = 0, from the quadratic in z^2."""
    k_term, plus, minus = _two_star_parts(matrix, lam)
    root = np.sqrt(complex(k_term ** 2 - plus * minus))
    w = np.array([(-k_term + root) / plus, (-k_term - root) / plus], dtype=complex)
    z = np.sqrt(w)
    return np.concatenate([z, -z])
