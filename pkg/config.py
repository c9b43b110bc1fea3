"""
Application configuration for the Spectral Trace Toolkit.
"""

import os
import math

# Base paths
BASE_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.environ.get('TRACE_TOOLKIT_DATA_DIR', os.path.join(BASE_DIR, 'data'))
ARCHIVE_DB_NAME = 'runs.db'

# Application settings
APP_NAME = "Spectral Trace Toolkit"
APP_VERSION = "1.0.0"

# Matrix ingestion
HERMITICITY_TOLERANCE = 1e-8  # Reject files whose |H_ij - conj(H_ji)| exceeds this
HERMITIAN_SNAP_TOLERANCE = 1e-12
TRACE_IMAG_TOLERANCE = 1e-10  # Relative imaginary leakage allowed in tr H^s
DEFAULT_ZERO_THRESHOLD = 0.0

# Eigensolver
JACOBI_SWEEPS_PER_DIM = 30
JACOBI_TOLERANCE = 1e-13
DEDUP_TOLERANCE = 1e-8  # Relative to ||H|| when pairing the doubled spectrum

# Singularity guards
POLYLOG_SINGULAR_TOLERANCE = 1e-12
POLE_TOLERANCE = 1e-12

# Approach I cutoffs (s_max >= 9 n_max, n_max >= ceil(1/epsilon))
CUTOFF_S_FACTOR = 9
DEFAULT_EPSILON = 0.1
DEFAULT_N_MAX = 10
BASE_PRECISION_DIGITS = 30  # mpmath digits before the cancellation allowance

# Combinatorics
PARTITION_MAX_ORDER = 24

# Orbit enumeration budget
ORBIT_MAX_LEN = 14
ORBIT_MAX_COUNT = 1_000_000
ORBIT_MAX_WALKS = 5_000_000  # Partial walks pushed during the depth-first search

# Walks
WALK_CENSUS_MAX_STEPS = 8
ANDERSON_SCAN_MARGIN = 3.0
ANDERSON_MAX_REFINEMENTS = 12

# Approach II
DEFAULT_EPSILON_II = 1e-4
DEFAULT_TRACE_TERMS_II = 200

# Output formatting
CSV_SIGNIFICANT_DIGITS = 12
EIGENVALUE_CSV_DIGITS = 17
GRID_NUDGE = 1e-9

# Worker pool
DEFAULT_THREADS = 1
DEFAULT_SEED = 20240601

# Four-level demonstration staircase
FIGURE1_EIGENVALUES = (-1.6, -1.4, 0.1, 2.8)
FIGURE1_N_MAX_VALUES = (2, 3, 4, 5, 10)
FIGURE1_GRID_STEPS = 600

# Semicircle defaults
SEMICIRCLE_N_MAX = 200
SEMICIRCLE_GRID_STEPS = 400

# Identity suite defaults
IDENTITY_S_MAX = 12
IDENTITY_TRIALS = 5


def get_archive_url(data_dir: str = None) -> str:
    """Get the SQLAlchemy URL of the run archive."""
    directory = data_dir or DATA_DIR
    return f"sqlite:///{os.path.join(directory, ARCHIVE_DB_NAME)}"


def minimal_n_max(epsilon: float) -> int:
    """Smallest n_max allowed for a given resolution epsilon."""
    return max(1, math.ceil(1.0 / epsilon - 1e-12))
