"""
Run configuration built from parsed command-line arguments.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from config import DEFAULT_EPSILON, DEFAULT_EPSILON_II, DEFAULT_SEED, DEFAULT_THREADS
from services.matrix_service import HermitianMatrix, load_matrix_file
from utils.errors import UsageError
from utils.grid_utils import parse_grid_spec
from utils.validators import ensure_valid, validate_epsilon, validate_integer_range, validate_threads

logger = logging.getLogger(__name__)

APPROACHES = ('i', 'ii')
METHODS_I = ('doublesum', 'polylog')
METHODS_II = ('eigenphase', 'tracesum')

# Subcommand options carried verbatim into RunConfig.options
OPTION_NAMES = (
    'lambda_re', 'lambda_im', 'z_re', 'z_im', 'lam', 'walk_type', 'steps', 'start', 'n', 'dist', 'mu',
    'scan', 'graph', 'max_len', 'trials', 'limit', 'with_exact',
)


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs, validated."""
    subcommand: str
    matrix_path: Optional[str] = None
    grid: Optional[tuple] = None
    epsilon: Optional[float] = None
    n_max: Optional[int] = None
    s_max: Optional[int] = None
    mode: str = 'counting'
    approach: str = 'i'
    method: Optional[str] = None
    output: str = '-'
    seed: int = DEFAULT_SEED
    threads: int = DEFAULT_THREADS
    archive: bool = False
    options: dict = field(default_factory=dict)

    def option(self, name: str, default=None):
        value = self.options.get(name)
        return default if value is None else value

    def load_matrix(self) -> HermitianMatrix:
        if not self.matrix_path:
            raise UsageError(f"'{self.subcommand}' needs --matrix")
        return load_matrix_file(self.matrix_path)

    def describe(self) -> dict:
        """JSON-safe summary for the run archive."""
        return {
            'matrix': self.matrix_path,
            'grid': list(self.grid) if self.grid else None,
            'epsilon': self.epsilon,
            'n_max': self.n_max,
            's_max': self.s_max,
            'mode': self.mode,
            'approach': self.approach,
            'method': self.method,
            'seed': self.seed,
            'threads': self.threads,
            **{k: v for k, v in self.options.items() if v is not None},
        }


def _default_method(approach: str) -> str:
    return METHODS_I[0] if approach == 'i' else METHODS_II[0]


def build_run_config(args) -> RunConfig:
    """
    Validate parsed arguments and freeze them into a RunConfig.
    Raises UsageError on the first invalid value.
    """
    ensure_valid(validate_threads(args.threads), UsageError)
    ensure_valid(validate_integer_range(args.seed, "seed", low=0), UsageError)

    grid = parse_grid_spec(args.grid) if getattr(args, 'grid', None) else None

    approach = getattr(args, 'approach', 'i') or 'i'
    method = getattr(args, 'method', None) or _default_method(approach)
    allowed = METHODS_I if approach == 'i' else METHODS_II
    if method not in allowed:
        raise UsageError(f"Method '{method}' is not available for approach {approach}; choose from {allowed}")

    epsilon = getattr(args, 'epsilon', None)
    if args.command == 'count' and epsilon is None:
        epsilon = DEFAULT_EPSILON if approach == 'i' else DEFAULT_EPSILON_II
    if epsilon is not None:
        ensure_valid(validate_epsilon(epsilon), UsageError)

    for name in ('n_max', 's_max'):
        value = getattr(args, name, None)
        if value is not None:
            ensure_valid(validate_integer_range(value, name.replace('_', '-'), low=1), UsageError)

    options = {name: getattr(args, name, None) for name in OPTION_NAMES}

    config = RunConfig(
        subcommand=args.command,
        matrix_path=args.matrix,
        grid=grid,
        epsilon=epsilon,
        n_max=getattr(args, 'n_max', None),
        s_max=getattr(args, 's_max', None),
        mode=getattr(args, 'mode', None) or 'counting',
        approach=approach,
        method=method,
        output=args.output,
        seed=args.seed,
        threads=args.threads,
        archive=args.archive,
        options=options,
    )
    logger.debug("Run configuration: %s", config.describe())
    return config


@dataclass
class CommandResult:
    """Artifact bytes plus what the archive records about the run."""
    content: bytes
    exit_code: int = 0
    matrix_dimension: Optional[int] = None
    identity_cases: list = field(default_factory=list)
    error: Optional[Exception] = None
    warnings: list = field(default_factory=list)
