"""
Hermitian matrix ingestion, derived graph data, traces and the eigenvalue oracle.
"""

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np

from config import (
    DEFAULT_ZERO_THRESHOLD, HERMITIAN_SNAP_TOLERANCE, HERMITICITY_TOLERANCE,
    TRACE_IMAG_TOLERANCE
)
from utils.errors import ArgumentError, HermiticityError, MatrixParseError, NumericalError
from utils.linalg import eigenpair_residuals, hermitian_eigensystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Validated dense complex Hermitian N x N matrix."""
    n: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return eig_hermitian(self)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __repr__(self):
        return f"<HermitianMatrix(n={self.n})>"


@dataclass(frozen=True)
class GershgorinData:
    """Disc centers H_vv and radii Gamma_v = sum_{w in E_v} |H_vw|."""
    centers: np.ndarray
    radii: np.ndarray

    def intervals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.centers - self.radii, self.centers + self.radii

    def spectral_bound(self) -> float:
        """Upper bound on max |lambda| from the union of discs."""
        return float(np.max(np.abs(self.centers) + self.radii)) if len(self.centers) else 0.0


@dataclass(frozen=True)
class AssociatedGraphs:
    """G_I (loops allowed) and G_II (simple) with directed-edge indexing."""
    adjacency_I: np.ndarray
    adjacency_II: np.ndarray
    neighborhoods: tuple
    degrees: np.ndarray
    directed_edges: tuple
    edge_index: dict
    reverse: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.neighborhoods)

    @property
    def n_edges(self) -> int:
        return len(self.directed_edges) // 2

    def edge_id(self, v: int, w: int) -> int:
        """Index of the directed edge (v, w): amplitude arriving at v from w."""
        try:
            return self.edge_index[(v, w)]
        except KeyError:
            raise ArgumentError(f"({v}, {w}) is not a directed edge of G_II")

    def isolated_vertices(self) -> list:
        return [v for v, nbrs in enumerate(self.neighborhoods) if not nbrs]


@dataclass(frozen=True)
class EdgePhases:
    """Magnitudes h_vw = |H_vw| and phases gamma_vw with h e^{2 i gamma} = H_vw."""
    h: np.ndarray
    gamma: np.ndarray


@dataclass(frozen=True)
class RescaledMatrix:
    """Output of rescale_to_window. `zero_matrix` is set when H = 0 could not be scaled."""
    matrix: HermitianMatrix
    scale: float
    zero_matrix: bool = False


def hermitian_from_array(array, tolerance: float = HERMITICITY_TOLERANCE) -> HermitianMatrix:
    """
    Validate a square array and hermitize it exactly as (M + M^H) / 2.
    Raises HermiticityError naming the worst offending entry.
    """
    matrix = np.array(array, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise MatrixParseError(f"Matrix must be square and non-empty (got shape {matrix.shape})")
    if not np.all(np.isfinite(matrix)):
        raise MatrixParseError("Matrix contains non-finite entries")

    deviation = np.abs(matrix - matrix.conj().T)
    worst = np.unravel_index(np.argmax(deviation), deviation.shape)
    if deviation[worst] > tolerance:
        raise HermiticityError(int(worst[0]), int(worst[1]), float(deviation[worst]))
    if deviation[worst] > HERMITIAN_SNAP_TOLERANCE:
        logger.debug("Hermitizing matrix with max deviation %.2e", deviation[worst])

    hermitized = 0.5 * (matrix + matrix.conj().T)
    return HermitianMatrix(n=matrix.shape[0], entries=hermitized)


def diagonal_matrix(values) -> HermitianMatrix:
    """Real diagonal matrix with the given entries."""
    return hermitian_from_array(np.diag(np.asarray(values, dtype=float)))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianMatrix:
    """Dense random Hermitian matrix with Gaussian entries."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return hermitian_from_array(scale * 0.5 * (a + a.conj().T))


def load_matrix(source) -> HermitianMatrix:
    """
    Parse a JSON matrix file: {"n": N, "entries": [[i, j, re, im], ...]} with 0-based indices.
    Missing conjugate entries are mirrored; duplicates are rejected.
    """
    try:
        text = source.decode('utf-8') if isinstance(source, (bytes, bytearray)) else source
        payload = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MatrixParseError(f"Matrix file is not valid JSON: {exc}")

    if not isinstance(payload, dict) or 'n' not in payload or 'entries' not in payload:
        raise MatrixParseError("Matrix file must be an object with 'n' and 'entries'")

    n = payload['n']
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise MatrixParseError(f"'n' must be a positive integer (got {n!r})")

    if not isinstance(payload['entries'], list):
        kind = type(payload['entries']).__name__
        raise MatrixParseError(f"'entries' must be a list of [i, j, re, im] rows (got {kind})")

    matrix = np.zeros((n, n), dtype=complex)
    given = np.zeros((n, n), dtype=bool)
    for row in payload['entries']:
        if not isinstance(row, (list, tuple)) or len(row) != 4:
            raise MatrixParseError(f"Entry {row!r} must be [i, j, re, im]")
        i, j, re, im = row
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j)):
            raise MatrixParseError(f"Entry indices must be integers (got {i!r}, {j!r})")
        if not (0 <= i < n and 0 <= j < n):
            raise MatrixParseError(f"Entry ({i}, {j}) outside dimension {n}")
        if given[i, j]:
            raise MatrixParseError(f"Duplicate entry ({i}, {j})")
        try:
            matrix[i, j] = complex(float(re), float(im))
        except (TypeError, ValueError):
            raise MatrixParseError(f"Entry ({i}, {j}) has a non-numeric value")
        given[i, j] = True

    # Mirror conjugates that were not supplied
    mirror = given.T & ~given
    matrix[mirror] = matrix.conj().T[mirror]
    return hermitian_from_array(matrix)


def load_matrix_file(path: str) -> HermitianMatrix:
    """Read and parse a matrix file from disk."""
    try:
        with open(path, 'rb') as handle:
            return load_matrix(handle.read())
    except OSError as exc:
        raise MatrixParseError(f"Cannot read matrix file '{path}': {exc}")


def dump_matrix(matrix: HermitianMatrix) -> str:
    """Serialize the nonzero entries in the matrix-file JSON format."""
    entries = [
        [i, j, float(matrix.entries[i, j].real), float(matrix.entries[i, j].imag)]
        for i in range(matrix.n) for j in range(matrix.n) if matrix.entries[i, j] != 0
    ]
    return json.dumps({'n': matrix.n, 'entries': entries})


def eig_hermitian(matrix: HermitianMatrix) -> np.ndarray:
    """All eigenvalues in nondecreasing order from the Jacobi oracle."""
    values, _ = hermitian_eigensystem(np.asarray(matrix.entries))
    return values


def eigensystem(matrix: HermitianMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors (columns) from the Jacobi oracle."""
    return hermitian_eigensystem(np.asarray(matrix.entries))


def eigen_residuals(matrix: HermitianMatrix) -> np.ndarray:
    """Per-eigenpair residual ||Hx - lambda x||."""
    values, vectors = eigensystem(matrix)
    return eigenpair_residuals(np.asarray(matrix.entries), values, vectors)


def gap(matrix: HermitianMatrix) -> float:
    """delta = pi - max |lambda_j|; may be non-positive."""
    eigs = matrix.eigenvalues
    return float(min(math.pi - eigs[-1], eigs[0] + math.pi))


def rescale_to_window(matrix: HermitianMatrix, target_gap: float) -> RescaledMatrix:
    """
    Rescale H -> cH so that max |lambda(cH)| = pi - target_gap.
    A zero matrix is returned unchanged with c = 1 and the zero_matrix flag set.
    """
    if not (0 < target_gap < math.pi):
        raise ArgumentError(f"target_gap must lie in (0, pi) (got {target_gap})")

    radius = float(np.max(np.abs(matrix.eigenvalues)))
    if radius == 0.0:
        logger.warning("Zero matrix cannot be rescaled; returning scale 1")
        return RescaledMatrix(matrix=matrix, scale=1.0, zero_matrix=True)

    scale = (math.pi - target_gap) / radius
    return RescaledMatrix(matrix=hermitian_from_array(scale * np.asarray(matrix.entries)), scale=scale)


def trace_powers(matrix: HermitianMatrix, s_max: int) -> np.ndarray:
    """
    tr H^s for s = 0..s_max by a running matrix power.
    The traces are real; imaginary leakage above tolerance is an error.
    """
    if s_max < 0:
        raise ArgumentError(f"s_max must be non-negative (got {s_max})")

    entries = np.asarray(matrix.entries)
    spectral_norm = float(np.linalg.norm(entries, 2))
    traces = np.empty(s_max + 1)
    power = np.eye(matrix.n, dtype=complex)
    for s in range(s_max + 1):
        if s > 0:
            power = entries @ power
        value = np.trace(power)
        bound = TRACE_IMAG_TOLERANCE * matrix.n * max(1.0, spectral_norm ** s)
        if abs(value.imag) > bound:
            raise NumericalError(f"tr H^{s} has imaginary part {value.imag:.3e}")
        traces[s] = value.real
    return traces


def counting_exact(eigenvalues, lam):
    """Number of eigenvalues <= lambda (closed convention); vectorized over lambda."""
    counts = np.searchsorted(np.asarray(eigenvalues), lam, side='right')
    return int(counts) if np.ndim(lam) == 0 else counts


def _edge_phases(entries: np.ndarray, mask: np.ndarray) -> EdgePhases:
    h = np.where(mask, np.abs(entries), 0.0)
    gamma = np.where(mask, 0.5 * np.angle(entries), 0.0)

    # Real negative couplings: +pi/2 when v >= w, -pi/2 when v < w
    negative_real = mask & (entries.imag == 0) & (entries.real < 0)
    rows, cols = np.indices(entries.shape)
    gamma = np.where(negative_real & (rows >= cols), math.pi / 2, gamma)
    gamma = np.where(negative_real & (rows < cols), -math.pi / 2, gamma)
    return EdgePhases(h=h, gamma=gamma)


def build_graphs(matrix: HermitianMatrix, zero_threshold: float = DEFAULT_ZERO_THRESHOLD):
    """
    Derive G_I, G_II, edge phases and Gershgorin data.
    Entries with |H_vw| <= zero_threshold are structural zeros.
    Returns (AssociatedGraphs, EdgePhases, GershgorinData).
    """
    if zero_threshold < 0:
        raise ArgumentError("zero_threshold must be non-negative")

    entries = np.asarray(matrix.entries)
    nonzero = np.abs(entries) > zero_threshold
    adjacency_I = nonzero.astype(int)
    off_diagonal = nonzero & ~np.eye(matrix.n, dtype=bool)
    adjacency_II = off_diagonal.astype(int)

    neighborhoods = tuple(tuple(int(w) for w in np.flatnonzero(off_diagonal[v])) for v in range(matrix.n))
    degrees = adjacency_II.sum(axis=1)

    directed_edges = tuple((v, w) for v in range(matrix.n) for w in neighborhoods[v])
    edge_index = {edge: idx for idx, edge in enumerate(directed_edges)}
    reverse = np.array([edge_index[(w, v)] for v, w in directed_edges], dtype=int)

    graphs = AssociatedGraphs(
        adjacency_I=adjacency_I,
        adjacency_II=adjacency_II,
        neighborhoods=neighborhoods,
        degrees=degrees,
        directed_edges=directed_edges,
        edge_index=edge_index,
        reverse=reverse,
    )
    phases = _edge_phases(entries, off_diagonal)
    gershgorin = GershgorinData(centers=entries.diagonal().real.copy(), radii=phases.h.sum(axis=1))
    return graphs, phases, gershgorin


def trace_powers_mp(matrix: HermitianMatrix, s_max: int, dps: int) -> list:
    """
    tr H^s for s = 0..s_max in mpmath arithmetic at `dps` digits, as real mpf values.
    The float entries are converted exactly, so only the working precision limits accuracy.
    """
    if s_max < 0:
        raise ArgumentError(f"s_max must be non-negative (got {s_max})")

    with mpmath.workdps(dps):
        h = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in np.asarray(matrix.entries)])
        power = mpmath.eye(matrix.n)
        traces = []
        for s in range(s_max + 1):
            if s > 0:
                power = h * power
            traces.append(mpmath.re(sum(power[i, i] for i in range(matrix.n))))
    return traces
