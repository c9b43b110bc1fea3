"""
Lambda-grid utilities: parsing, construction, nudging and chunking.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from config import GRID_NUDGE
from utils.errors import UsageError
from utils.validators import ensure_valid, validate_grid_spec

logger = logging.getLogger(__name__)


def parse_grid_spec(spec: str) -> tuple[float, float, int]:
    """
    Parse a 'lo:hi:steps' grid specification.
    Returns (lo, hi, steps).
    """
    parts = spec.split(':') if spec else []
    if len(parts) != 3:
        raise UsageError(f"Grid must be given as lo:hi:steps (got '{spec}')")

    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"Grid bounds must be numbers and steps an integer (got '{spec}')")

    ensure_valid(validate_grid_spec(lo, hi, steps), UsageError)
    return lo, hi, steps


def make_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    """Evenly spaced grid including both end points."""
    ensure_valid(validate_grid_spec(lo, hi, steps), UsageError)
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


def midpoint_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    """Cell midpoints of an even partition of (lo, hi); excludes both end points."""
    ensure_valid(validate_grid_spec(lo, hi, steps), UsageError)
    width = (hi - lo) / steps
    return lo + width * (np.arange(steps) + 0.5)


def nudge_off_eigenvalues(grid: np.ndarray, eigenvalues: np.ndarray, nudge: float = GRID_NUDGE) -> np.ndarray:
    """Shift grid points that coincide with an eigenvalue upward by `nudge`."""
    grid = np.array(grid, dtype=float, copy=True)
    if len(eigenvalues) == 0:
        return grid

    distance = np.min(np.abs(grid[:, np.newaxis] - np.asarray(eigenvalues)[np.newaxis, :]), axis=1)
    hits = distance < nudge
    if np.any(hits):
        logger.warning("Nudged %d grid point(s) off eigenvalues by %.1e", int(np.sum(hits)), nudge)
        grid[hits] += nudge
    return grid


def distance_to_spectrum(grid: np.ndarray, eigenvalues: np.ndarray) -> np.ndarray:
    """Distance from each grid point to the nearest eigenvalue (inf when there are none)."""
    grid = np.asarray(grid, dtype=float)
    if len(eigenvalues) == 0:
        return np.full(grid.shape, np.inf)
    return np.min(np.abs(grid[:, np.newaxis] - np.asarray(eigenvalues)[np.newaxis, :]), axis=1)


def chunk_grid(grid: np.ndarray, chunks: int) -> list[np.ndarray]:
    """Split a grid into at most `chunks` contiguous, order-preserving pieces."""
    chunks = max(1, min(chunks, len(grid)))
    return [piece for piece in np.array_split(np.asarray(grid), chunks) if len(piece)]


def evaluate_on_grid(func, grid: np.ndarray, threads: int = 1) -> np.ndarray:
    """
    Apply a vectorized func to the grid, fanning chunks out to a thread pool.
    Chunk results are concatenated in grid order regardless of completion order.
    """
    grid = np.asarray(grid, dtype=float)
    if threads <= 1 or len(grid) < 2:
        return np.asarray(func(grid))

    pieces = chunk_grid(grid, threads)
    logger.debug("Evaluating %d grid points in %d chunks", len(grid), len(pieces))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(func, pieces))
    return np.concatenate([np.atleast_1d(r) for r in results])
