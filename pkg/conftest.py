"""
Shared pytest fixtures.
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import FIGURE1_EIGENVALUES  # noqa: E402
from database.db import init_database  # noqa: E402
from services.matrix_service import diagonal_matrix, dump_matrix, hermitian_from_array, random_hermitian  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_random_matrix(rng):
    """Dense random Hermitian matrix builder, optionally rescaled to a spectral radius."""
    def build(n: int, radius: float = None):
        matrix = random_hermitian(n, rng)
        if radius is None:
            return matrix
        current = float(np.max(np.abs(np.linalg.eigvalsh(matrix.entries))))
        return hermitian_from_array(np.asarray(matrix.entries) * radius / current)
    return build


@pytest.fixture
def figure1_matrix():
    return diagonal_matrix(FIGURE1_EIGENVALUES)


@pytest.fixture
def interval_matrix():
    return hermitian_from_array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def two_star_matrix():
    """Vertex 0 coupled to vertices 1 and 2, with H_12 = 0."""
    return hermitian_from_array([
        [0.3, 0.8 + 0.4j, -0.6],
        [0.8 - 0.4j, -0.5, 0.0],
        [-0.6, 0.0, 1.1],
    ])


@pytest.fixture
def triangle_matrix():
    return hermitian_from_array(np.ones((3, 3)) - np.eye(3))


@pytest.fixture
def matrix_file(tmp_path):
    """Write a HermitianMatrix to a JSON matrix file and return its path."""
    def write(matrix, name: str = 'matrix.json'):
        path = tmp_path / name
        path.write_text(dump_matrix(matrix))
        return str(path)
    return write


@pytest.fixture
def archive_db():
    """Fresh in-memory run archive."""
    return init_database('sqlite://')
