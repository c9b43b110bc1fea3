"""
Dense linear algebra helpers: a cyclic Jacobi eigensolver for Hermitian matrices
and LU-based determinants.
"""

import logging
import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from config import DEDUP_TOLERANCE, JACOBI_SWEEPS_PER_DIM, JACOBI_TOLERANCE
from utils.errors import ConvergenceError

logger = logging.getLogger(__name__)


def real_embedding(entries: np.ndarray) -> np.ndarray:
    """Embed a complex Hermitian N x N matrix A + iB as the real symmetric [[A, -B], [B, A]]."""
    a = entries.real
    b = entries.imag
    return np.block([[a, -b], [b, a]])


def jacobi_symmetric(matrix: np.ndarray, max_sweeps: int, tol: float = JACOBI_TOLERANCE):
    """
    Diagonalize a real symmetric matrix by cyclic plane rotations.
    Returns (eigenvalues, eigenvectors as columns, sweeps used), unsorted.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    vectors = np.eye(n)
    scale = max(np.linalg.norm(a), 1e-300)

    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            return np.diag(a).copy(), vectors, sweep
        if sweep == max_sweeps:
            break

        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = vectors[:, p].copy()
                vec_q = vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    raise ConvergenceError(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})"
    )


def hermitian_eigensystem(entries: np.ndarray):
    """
    Eigenvalues (ascending) and unit eigenvectors of a complex Hermitian matrix.
    Works on the doubled real embedding and keeps one copy of each paired eigenvalue.
    """
    n = entries.shape[0]
    embedded = real_embedding(entries)
    values, vectors, sweeps = jacobi_symmetric(embedded, JACOBI_SWEEPS_PER_DIM * n)
    logger.debug("Jacobi converged after %d sweeps for N=%d", sweeps, n)

    order = np.argsort(values, kind='stable')
    values = values[order]
    vectors = vectors[:, order]

    norm = max(np.linalg.norm(entries), 1.0)
    first = values[0::2]
    second = values[1::2]
    mismatch = np.max(np.abs(first - second)) if n else 0.0
    if mismatch > DEDUP_TOLERANCE * norm:
        raise ConvergenceError(f"Embedded spectrum is not paired (mismatch {mismatch:.3e})")

    eigenvalues = 0.5 * (first + second)
    complex_vectors = np.empty((n, n), dtype=complex)
    for start, stop in _degenerate_clusters(eigenvalues, DEDUP_TOLERANCE * norm):
        # Columns (v, iv) of each pair are dependent over C; the cluster spans an (stop - start)-dim eigenspace
        block = vectors[:n, 2 * start:2 * stop] + 1j * vectors[n:, 2 * start:2 * stop]
        basis, _, _ = np.linalg.svd(block, full_matrices=False)
        complex_vectors[:, start:stop] = basis[:, :stop - start]
    return eigenvalues, complex_vectors


def _degenerate_clusters(eigenvalues: np.ndarray, tol: float):
    """(start, stop) index ranges of runs of ascending eigenvalues that agree within tol."""
    start = 0
    for k in range(1, len(eigenvalues) + 1):
        if k == len(eigenvalues) or eigenvalues[k] - eigenvalues[k - 1] > tol:
            yield start, k
            start = k


def eigenpair_residuals(entries: np.ndarray, eigenvalues: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Residual norms ||Hx - lambda x|| for each eigenpair."""
    return np.linalg.norm(entries @ vectors - vectors * eigenvalues[np.newaxis, :], axis=0)


def lu_determinant(matrix: np.ndarray) -> complex:
    """Determinant from a partially pivoted LU factorization."""
    matrix = np.asarray(matrix)
    if matrix.shape[0] == 0:
        return 1.0 + 0j

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', LinAlgWarning)
        lu, piv = lu_factor(matrix.astype(complex), check_finite=True)

    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    sign = -1.0 if swaps % 2 else 1.0
    return complex(sign * np.prod(np.diag(lu)))
