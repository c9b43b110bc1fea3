"""
Spectral Trace Toolkit - command-line entry point.

Eigenvalue counting functions and densities of Hermitian matrices from two
trace formulas, with orbit sums, scattering determinants, walks and an
identity suite. Data goes to stdout or -o; diagnostics go to stderr.
"""

import argparse
import logging
import sys
import time
from datetime import datetime

from sqlalchemy.exc import SQLAlchemyError

from commands import (
    build_run_config, run_anderson, run_count, run_eig, run_figure1, run_history,
    run_identities, run_orbits, run_semicircle, run_walk, run_zeta2
)
from config import APP_NAME, APP_VERSION, DEFAULT_SEED, DEFAULT_THREADS
from services.archive_service import record_identity_checks, record_run
from services.export_service import write_artifact
from utils.errors import TraceToolkitError, UsageError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

COMMANDS = {
    'eig': run_eig,
    'count': run_count,
    'zeta2': run_zeta2,
    'orbits': run_orbits,
    'walk': run_walk,
    'anderson': run_anderson,
    'semicircle': run_semicircle,
    'identities': run_identities,
    'figure1': run_figure1,
    'history': run_history,
}


class ToolkitArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as UsageError so they map to exit code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _add_common_options(parser: argparse.ArgumentParser, suppress: bool = False):
    """
    Global flags, accepted before or after the subcommand. The subcommand copies
    default to SUPPRESS so they only override values given on the top level.
    """
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument('--matrix', default=default(None), help='matrix file (JSON)')
    parser.add_argument('-o', '--output', default=default('-'), help="output path, '-' for stdout")
    parser.add_argument('--threads', type=int, default=default(DEFAULT_THREADS), help='grid worker threads')
    parser.add_argument('--seed', type=int, default=default(DEFAULT_SEED), help='random seed')
    parser.add_argument('--archive', action='store_true', default=default(False),
                        help='record this run in the run archive')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', default=default(False))
    verbosity.add_argument('-q', '--quiet', action='store_true', default=default(False))
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(prog='trace-toolkit', description=APP_NAME)
    parser.add_argument('--version', action='version', version=f"{APP_NAME} {APP_VERSION}")
    _add_common_options(parser)
    subparsers = parser.add_subparsers(dest='command', required=True)
    common = _add_common_options(argparse.ArgumentParser(add_help=False), suppress=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(name, parents=[common], help=help_text)

    add('eig', 'eigenvalues, one per line')

    count = add('count', 'counting function or density on a lambda grid')
    count.add_argument('--grid', help='lo:hi:steps')
    count.add_argument('--approach', choices=['i', 'ii'], default='i')
    count.add_argument('--method', help='doublesum|polylog (i) or eigenphase|tracesum (ii)')
    count.add_argument('--mode', choices=['counting', 'density'], default='counting')
    count.add_argument('--epsilon', type=float)
    count.add_argument('--n-max', type=int)
    count.add_argument('--s-max', type=int)
    count.add_argument('--with-exact', action='store_true', help='add the exact staircase column')

    zeta2 = add('zeta2', 'scattering determinant at one complex point')
    zeta2.add_argument('--lambda-re', type=float, default=0.0)
    zeta2.add_argument('--lambda-im', type=float, default=0.0)
    zeta2.add_argument('--z-re', type=float, default=1.0)
    zeta2.add_argument('--z-im', type=float, default=0.0)

    orbits = add('orbits', 'primitive periodic orbits and their weights')
    orbits.add_argument('--graph', choices=['I', 'II'], default='I')
    orbits.add_argument('--max-len', type=int, default=6)
    orbits.add_argument('--lambda', dest='lam', type=float)

    walk = add('walk', 'quantum or classical walk on directed edges')
    walk.add_argument('--type', dest='walk_type', choices=['quantum', 'classical'], default='quantum')
    walk.add_argument('--lambda', dest='lam', type=float, default=0.0)
    walk.add_argument('--steps', type=int, default=10)
    walk.add_argument('--start', type=int, default=0, help='directed-edge index')

    anderson = add('anderson', 'secular-equation roots of a disordered chain')
    anderson.add_argument('--n', type=int, default=6)
    anderson.add_argument('--dist', choices=['cauchy'], default='cauchy')
    anderson.add_argument('--mu', type=float, default=0.0)
    anderson.add_argument('--scan', help='lo:hi:steps')

    semicircle = add('semicircle', 'Fourier-Bessel semicircle counting function')
    semicircle.add_argument('--n-max', type=int)
    semicircle.add_argument('--steps', type=int)

    identities = add('identities', 'run the identity suite')
    identities.add_argument('--s-max', type=int)
    identities.add_argument('--trials', type=int)

    figure1 = add('figure1', 'four-level staircase and its approximations')
    figure1.add_argument('--steps', type=int)

    history = add('history', 'recent archived runs')
    history.add_argument('--limit', type=int, default=20)

    return parser


def _archive_run(config, exit_code: int, result, started_at: datetime, duration: float):
    arguments = config.describe()
    if result and result.warnings:
        arguments['warnings'] = list(result.warnings)
    try:
        run_id = record_run(
            subcommand=config.subcommand,
            arguments=arguments,
            exit_code=exit_code,
            matrix_dimension=result.matrix_dimension if result else None,
            output_path=config.output,
            started_at=started_at,
            duration_seconds=duration,
        )
        if result and result.identity_cases:
            record_identity_checks(run_id, result.identity_cases)
    except SQLAlchemyError as e:
        logger.warning("Could not archive run: %s", e)


def main(argv=None) -> int:
    """Run one subcommand. Returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        configure_logging()
        logger.error("%s", e)
        return e.exit_code

    configure_logging(args.verbose, args.quiet)
    started_at = datetime.utcnow()
    start = time.perf_counter()
    config = None
    result = None

    try:
        config = build_run_config(args)
        result = COMMANDS[args.command](config)
        write_artifact(result.content, config.output)
        for note in result.warnings:
            logger.warning("%s", note)
        if result.error is not None:
            logger.error("%s", result.error)
        exit_code = result.exit_code
    except TraceToolkitError as e:
        logger.error("%s", e)
        exit_code = e.exit_code
    except OSError as e:
        logger.error("I/O error: %s", e)
        exit_code = UsageError.exit_code

    if config is not None and config.archive and args.command != 'history':
        _archive_run(config, exit_code, result, started_at, time.perf_counter() - start)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
