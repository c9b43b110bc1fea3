"""
Graph subcommands: periodic orbits, walks and the disordered chain.
"""

import logging

from commands.run_config import CommandResult, RunConfig
from services.export_service import anderson_frame, export_to_csv, walk_frame
from services.matrix_service import build_graphs
from services.orbit_service import GRAPH_I, enumerate_primitive_orbits, orbit_table
from services.walk_service import (
    QUANTUM, anderson_roots, classical_walk, default_scan_range, make_rng, quantum_walk, random_chain
)
from utils.errors import UsageError
from utils.grid_utils import parse_grid_spec
from utils.validators import ensure_valid, validate_integer_range, validate_orbit_length

logger = logging.getLogger(__name__)


def run_orbits(config: RunConfig) -> CommandResult:
    """Primitive orbits with their single-traversal weights."""
    matrix = config.load_matrix()
    which = config.option('graph', GRAPH_I)
    max_len = config.option('max_len', 6)
    ensure_valid(validate_orbit_length(max_len), UsageError)

    graphs, _, _ = build_graphs(matrix)
    orbits = enumerate_primitive_orbits(graphs, which, max_len)
    lam = config.option('lam')
    if which != GRAPH_I and lam is None:
        raise UsageError("G_II orbit weights need --lambda")

    df = orbit_table(matrix, orbits, lam)
    logger.info("%d primitive orbits on G_%s up to length %d", len(orbits), which, max_len)
    return CommandResult(content=export_to_csv(df), matrix_dimension=matrix.n)


def run_walk(config: RunConfig) -> CommandResult:
    """Sparse probability history of a quantum or classical walk."""
    matrix = config.load_matrix()
    steps = config.option('steps', 10)
    ensure_valid(validate_integer_range(steps, "steps", low=0), UsageError)

    walker = quantum_walk if config.option('walk_type', QUANTUM) == QUANTUM else classical_walk
    states = walker(matrix, float(config.option('lam', 0.0)), config.option('start', 0), steps)
    return CommandResult(content=export_to_csv(walk_frame(states)), matrix_dimension=matrix.n)


def run_anderson(config: RunConfig) -> CommandResult:
    """Secular-function scan and refined roots of a Cauchy-disordered chain."""
    n = config.option('n', 6)
    ensure_valid(validate_integer_range(n, "n", low=2), UsageError)
    if config.option('dist', 'cauchy') != 'cauchy':
        raise UsageError("Only the Cauchy disorder distribution is supported")

    chain = random_chain(n, make_rng(config.seed), config.option('mu', 0.0))
    scan = config.option('scan')
    if scan:
        lo, hi, steps = parse_grid_spec(scan)
    else:
        (lo, hi), steps = default_scan_range(chain), 200

    result = anderson_roots(chain, lo, hi, steps, require_all=not scan)
    if len(result.roots) != chain.n:
        logger.warning("Scan range holds %d of %d roots", len(result.roots), chain.n)
    return CommandResult(content=export_to_csv(anderson_frame(result)), matrix_dimension=chain.n)
