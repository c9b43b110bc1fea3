"""
Quantum and classical walks on directed edges, and the Jacobi chain
specialization: closed-form vertex scattering, transfer matrices, the
transfer-product secular equation and the Cauchy-disorder phase sampler.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, stats

from config import ANDERSON_MAX_REFINEMENTS, ANDERSON_SCAN_MARGIN, WALK_CENSUS_MAX_STEPS
from services.matrix_service import HermitianMatrix, hermitian_from_array
from services.scattering_service import assemble_S_II, markov_matrix, prepare_scattering
from utils.errors import ArgumentError, ConvergenceError, NumericalError, ResourceError

logger = logging.getLogger(__name__)

QUANTUM = 'quantum'
CLASSICAL = 'classical'
NORM_TOLERANCE = 1e-10
PROBABILITY_TOLERANCE = 1e-12
CENSUS_TOLERANCE = 1e-12
CLOSED_FORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class WalkState:
    """Walk state after `step` applications of S_II (quantum) or M (classical)."""
    step: int
    amplitudes: Optional[np.ndarray] = None
    probabilities_: Optional[np.ndarray] = None

    @property
    def probabilities(self) -> np.ndarray:
        if self.amplitudes is not None:
            return np.abs(self.amplitudes) ** 2
        return self.probabilities_

    @property
    def kind(self) -> str:
        return QUANTUM if self.amplitudes is not None else CLASSICAL


@dataclass(frozen=True, eq=False)
class JacobiChain:
    """Tridiagonal matrix with free diagonal and unit nearest-neighbour couplings."""
    diagonal: np.ndarray

    @property
    def n(self) -> int:
        return len(self.diagonal)

    def to_matrix(self) -> HermitianMatrix:
        entries = np.diag(np.asarray(self.diagonal, dtype=float))
        off = np.ones(self.n - 1)
        return hermitian_from_array(entries + np.diag(off, 1) + np.diag(off, -1))


@dataclass(frozen=True, eq=False)
class DiagonalDecomposition:
    """Census of all edge walks of one length between two directed edges."""
    p_quantum: float
    p_classical: float
    off_diagonal: float
    n_walks: int


@dataclass(frozen=True, eq=False)
class ChainScattering:
    matrix: np.ndarray
    phi: float


@dataclass(frozen=True, eq=False)
class AndersonScan:
    """Residual scan of the secular function and the roots refined from it."""
    grid: np.ndarray
    residuals: np.ndarray
    roots: np.ndarray
    refinements: int


@dataclass(frozen=True, eq=False)
class PhaseSample:
    phases: np.ndarray
    ks_statistic: float
    p_value: float


def jacobi_chain(diagonal) -> JacobiChain:
    diagonal = np.asarray(diagonal, dtype=float)
    if diagonal.ndim != 1 or len(diagonal) < 2:
        raise ArgumentError("A Jacobi chain needs at least two sites")
    return JacobiChain(diagonal=diagonal)


def cauchy_diagonal(mu: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF samples of the density 2 / (pi (4 + (x - mu)^2))."""
    u = rng.random(size)
    return mu + 2.0 * np.tan(math.pi * (u - 0.5))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so that a seed fixes every draw."""
    return np.random.Generator(np.random.Philox(seed))


def random_chain(n: int, rng: np.random.Generator, mu: float = 0.0) -> JacobiChain:
    """Chain with Cauchy-distributed diagonal centred at mu."""
    return jacobi_chain(cauchy_diagonal(mu, n, rng))


def _resolve_edge(graphs, edge) -> int:
    if isinstance(edge, tuple):
        return graphs.edge_id(*edge)
    edge = int(edge)
    if not 0 <= edge < len(graphs.directed_edges):
        raise ArgumentError(f"Edge index {edge} outside 0..{len(graphs.directed_edges) - 1}")
    return edge


def _check_steps(steps: int):
    if steps < 0:
        raise ArgumentError(f"steps must be non-negative (got {steps})")


def quantum_walk(matrix: HermitianMatrix, lam: float, start_edge, steps: int) -> list:
    """Iterate a(n+1) = S_II(lambda) a(n) from a unit amplitude on `start_edge`."""
    _check_steps(steps)
    operator = assemble_S_II(matrix, lam)
    start = _resolve_edge(operator.graphs, start_edge)

    amplitudes = np.zeros(operator.dimension, dtype=complex)
    amplitudes[start] = 1.0
    states = [WalkState(step=0, amplitudes=amplitudes)]
    for step in range(1, steps + 1):
        amplitudes = operator.matrix @ amplitudes
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NumericalError(f"Quantum walk lost normalization at step {step} (norm {norm:.3e})")
        states.append(WalkState(step=step, amplitudes=amplitudes))
    return states


def classical_walk(matrix: HermitianMatrix, lam: float, start_edge, steps: int) -> list:
    """Iterate P(n+1) = M(lambda) P(n) with M = |S_II|^2."""
    _check_steps(steps)
    data = prepare_scattering(matrix)
    start = _resolve_edge(data.graphs, start_edge)
    markov = markov_matrix(data, lam)

    probabilities = np.zeros(len(markov))
    probabilities[start] = 1.0
    states = [WalkState(step=0, probabilities_=probabilities)]
    for step in range(1, steps + 1):
        probabilities = markov @ probabilities
        total = float(probabilities.sum())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE or np.any(probabilities < -PROBABILITY_TOLERANCE):
            raise NumericalError(f"Classical walk left the simplex at step {step} (sum {total:.3e})")
        states.append(WalkState(step=step, probabilities_=probabilities))
    return states


def edge_positions(matrix: HermitianMatrix) -> np.ndarray:
    """Midpoint (v + w) / 2 of each directed edge."""
    graphs = prepare_scattering(matrix).graphs
    return np.array([(v + w) / 2.0 for v, w in graphs.directed_edges])


def position_variance(positions: np.ndarray, probabilities: np.ndarray) -> float:
    mean = float(probabilities @ positions)
    return float(probabilities @ positions ** 2 - mean ** 2)


def variance_series(matrix: HermitianMatrix, states: list) -> np.ndarray:
    positions = edge_positions(matrix)
    return np.array([position_variance(positions, s.probabilities) for s in states])


def fit_loglog_slope(steps, values) -> tuple[float, float]:
    """
    Least-squares slope of log(values) against log(steps).
    Returns (slope, r_squared).
    """
    steps = np.asarray(steps, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(steps <= 0) or np.any(values <= 0):
        raise ArgumentError("Log-log fit needs positive steps and values")
    fit = stats.linregress(np.log(steps), np.log(values))
    return float(fit.slope), float(fit.rvalue ** 2)


def diagonal_decomposition(matrix: HermitianMatrix, lam: float, start_edge, target_edge,
                           steps: int) -> DiagonalDecomposition:
    """
    Enumerate every edge walk of length `steps` from start to target and split
    the quantum return probability into its diagonal (classical) and interference parts.
    Both sides are checked against matrix powers of S_II and M.
    """
    _check_steps(steps)
    if steps > WALK_CENSUS_MAX_STEPS:
        raise ResourceError(f"Walk census limited to {WALK_CENSUS_MAX_STEPS} steps (got {steps})")

    operator = assemble_S_II(matrix, lam)
    start = _resolve_edge(operator.graphs, start_edge)
    target = _resolve_edge(operator.graphs, target_edge)
    s_matrix = operator.matrix
    successors = [np.flatnonzero(s_matrix[:, e]) for e in range(operator.dimension)]

    amplitude_sum = 0j
    classical_sum = 0.0
    n_walks = 0
    stack = [(start, 0, 1.0 + 0j)]
    while stack:
        edge, depth, weight = stack.pop()
        if depth == steps:
            if edge == target:
                amplitude_sum += weight
                classical_sum += abs(weight) ** 2
                n_walks += 1
            continue
        for nxt in successors[edge]:
            stack.append((int(nxt), depth + 1, weight * s_matrix[nxt, edge]))

    p_quantum = abs(amplitude_sum) ** 2
    direct_quantum = abs(np.linalg.matrix_power(s_matrix, steps)[target, start]) ** 2
    direct_classical = np.linalg.matrix_power(np.abs(s_matrix) ** 2, steps)[target, start]
    mismatch = max(abs(p_quantum - direct_quantum), abs(classical_sum - direct_classical))
    if mismatch > CENSUS_TOLERANCE:
        raise NumericalError(f"Walk census disagrees with matrix powers by {mismatch:.3e}")

    logger.debug("Walk census: %d walks of length %d", n_walks, steps)
    return DiagonalDecomposition(p_quantum=p_quantum, p_classical=classical_sum,
                                 off_diagonal=p_quantum - classical_sum, n_walks=n_walks)


def chain_phase(h_vv: float, lam: float) -> float:
    """phi = 2 arccot((H_vv - lambda) / 2) in (0, 2 pi)."""
    return 2.0 * (math.pi / 2 - math.atan((h_vv - lam) / 2.0))


def jacobi_vertex_scattering(h_vv: float, lam: float) -> ChainScattering:
    """
    Interior chain vertex: i / (a - 2i) [[a, 2i], [2i, a]] with a = H_vv - lambda,
    cross-checked against its phase form i e^{i phi/2} [[cos, i sin], [i sin, cos]](phi/2).
    """
    a = h_vv - lam
    rational = 1j / (a - 2j) * np.array([[a, 2j], [2j, a]])
    phi = chain_phase(h_vv, lam)
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    trigonometric = 1j * np.exp(0.5j * phi) * np.array([[c, 1j * s], [1j * s, c]])

    deviation = float(np.max(np.abs(rational - trigonometric)))
    if deviation > CLOSED_FORM_TOLERANCE:
        raise NumericalError(f"Chain scattering forms disagree by {deviation:.3e}")
    return ChainScattering(matrix=rational, phi=phi)


def endpoint_phase(h_vv: float, lam: complex) -> complex:
    """sigma = i (a + i) / (a - i) for a degree-one vertex with unit coupling."""
    a = h_vv - lam
    return 1j * (a + 1j) / (a - 1j)


def transfer_matrix(h_vv: float, lam: complex) -> np.ndarray:
    """
    Maps (a_{v,v-1}, a_{v-1,v}) to (a_{v+1,v}, a_{v,v+1}):
    -i diag(1, -1) - cot(phi/2) [[1, i], [-i, 1]] with cot(phi/2) = (H_vv - lambda) / 2.
    """
    cot_half = (h_vv - lam) / 2.0
    return -1j * np.diag([1.0, -1.0]) - cot_half * np.array([[1.0, 1j], [-1j, 1.0]])


def chain_amplitudes(chain: JacobiChain, lam: complex) -> list:
    """
    Pairs (a_{v+1,v}, a_{v,v+1}) for v = 1..N-1 from the transfer recursion,
    normalized by a_{1,2} = 1 and the left endpoint relation a_{2,1} = sigma^{(1)} a_{1,2}.
    """
    pair = np.array([endpoint_phase(chain.diagonal[0], lam), 1.0], dtype=complex)
    pairs = [pair]
    for h_vv in chain.diagonal[1:-1]:
        pair = transfer_matrix(h_vv, lam) @ pair
        pairs.append(pair)
    return pairs


def anderson_secular(chain: JacobiChain, lam: complex) -> complex:
    """a_{N,N-1} - a_{N-1,N} / sigma^{(N)}; vanishes exactly on the spectrum."""
    final = chain_amplitudes(chain, lam)[-1]
    return complex(final[0] - final[1] / endpoint_phase(chain.diagonal[-1], lam))


def anderson_secular_real(chain: JacobiChain, lam: float) -> float:
    """(-1)^N Im[r (a_1 - i)(a_N + i)] / 2, which equals det(H - lambda) for real lambda."""
    a_first = chain.diagonal[0] - lam
    a_last = chain.diagonal[-1] - lam
    residual = anderson_secular(chain, lam)
    return float((-1) ** chain.n * (residual * (a_first - 1j) * (a_last + 1j)).imag / 2.0)


def default_scan_range(chain: JacobiChain) -> tuple[float, float]:
    return (float(np.min(chain.diagonal)) - ANDERSON_SCAN_MARGIN,
            float(np.max(chain.diagonal)) + ANDERSON_SCAN_MARGIN)


def _bracketed_roots(chain: JacobiChain, grid: np.ndarray, values: np.ndarray) -> list:
    roots = []
    for k in range(len(grid) - 1):
        left, right = values[k], values[k + 1]
        if left == 0.0:
            roots.append(float(grid[k]))
        elif left * right < 0:
            roots.append(optimize.brentq(lambda x: anderson_secular_real(chain, x),
                                         grid[k], grid[k + 1], xtol=1e-14, rtol=1e-14))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def anderson_roots(chain: JacobiChain, lo: float = None, hi: float = None, steps: int = 200,
                   require_all: bool = True) -> AndersonScan:
    """
    Scan the real secular function for sign changes and refine each bracket with Brent's method.
    The grid resolution doubles until all N roots are bracketed. Without `require_all`
    a single pass is made and whatever the range holds is returned.
    """
    default_lo, default_hi = default_scan_range(chain)
    lo = default_lo if lo is None else lo
    hi = default_hi if hi is None else hi
    if not lo < hi or steps < 2:
        raise ArgumentError(f"Invalid scan range {lo}:{hi}:{steps}")

    for refinement in range(ANDERSON_MAX_REFINEMENTS + 1):
        grid = np.linspace(lo, hi, steps)
        values = np.array([anderson_secular_real(chain, x) for x in grid])
        roots = _bracketed_roots(chain, grid, values)
        if len(roots) >= chain.n or not require_all:
            break
        logger.debug("Found %d of %d roots with %d scan points; refining", len(roots), chain.n, steps)
        steps *= 2
    else:
        raise ConvergenceError(f"Bracketed {len(roots)} of {chain.n} roots after {ANDERSON_MAX_REFINEMENTS} refinements")

    residuals = np.array([abs(anderson_secular(chain, x)) for x in grid])
    return AndersonScan(grid=grid, residuals=residuals, roots=np.array(sorted(roots)), refinements=refinement)


def cauchy_phase_sampler(mu: float, lam: float, samples: int, seed: int) -> PhaseSample:
    """
    Draw Cauchy diagonal entries, map them to phi in (0, 2 pi) and compare the
    empirical distribution with the uniform one by a Kolmogorov-Smirnov statistic.
    """
    if samples < 1000:
        raise ArgumentError(f"Phase sampler needs at least 1000 samples (got {samples})")
    diagonal = cauchy_diagonal(mu, samples, make_rng(seed))
    phases = 2.0 * (math.pi / 2 - np.arctan((diagonal - lam) / 2.0))
    result = stats.kstest(phases / (2 * math.pi), 'uniform')
    return PhaseSample(phases=phases, ks_statistic=float(result.statistic), p_value=float(result.pvalue))
