"""
Spectral subcommands: eigenvalues, counting functions, the scattering determinant,
the four-level demonstration figure and the semicircle check.
"""

import logging
import math

import numpy as np
import pandas as pd

from commands.run_config import CommandResult, RunConfig
from config import (
    DEFAULT_TRACE_TERMS_II, FIGURE1_EIGENVALUES, FIGURE1_GRID_STEPS, FIGURE1_N_MAX_VALUES,
    SEMICIRCLE_GRID_STEPS, SEMICIRCLE_N_MAX
)
from services.export_service import counting_frame, export_eigenvalues, export_to_csv, result_warnings
from services.matrix_service import counting_exact, diagonal_matrix, eig_hermitian
from services.scattering_service import counting_II, factorization_residual, prepare_scattering, spectral_det
from services.trace_one_service import (
    COUNTING, counting_I, evolution_traces, make_cutoff_policy, osc_from_evolution_traces,
    semicircle_counting, semicircle_exact, smooth_count_I
)
from utils.errors import UsageError
from utils.grid_utils import evaluate_on_grid, make_grid, midpoint_grid, nudge_off_eigenvalues

logger = logging.getLogger(__name__)


def run_eig(config: RunConfig) -> CommandResult:
    """Eigenvalues of the matrix, ascending."""
    matrix = config.load_matrix()
    return CommandResult(content=export_eigenvalues(eig_hermitian(matrix)), matrix_dimension=matrix.n)


def _evaluator(config: RunConfig):
    return lambda func, grid: evaluate_on_grid(func, grid, config.threads)


def run_count(config: RunConfig) -> CommandResult:
    """
    Smooth, oscillating and total counting function (or density) on a grid,
    optionally alongside the exact staircase.
    """
    if config.grid is None:
        raise UsageError("'count' needs --grid lo:hi:steps")
    matrix = config.load_matrix()
    grid = make_grid(*config.grid)

    with_exact = bool(config.option('with_exact', False))
    if with_exact and config.mode != COUNTING:
        raise UsageError("--with-exact is only available for the counting mode")
    if with_exact:
        grid = nudge_off_eigenvalues(grid, matrix.eigenvalues)

    if config.approach == 'i':
        policy = make_cutoff_policy(config.epsilon, config.n_max, config.s_max)
        result = counting_I(matrix, grid, policy, config.mode, config.method, _evaluator(config))
    else:
        result = counting_II(matrix, grid, config.epsilon, config.mode, config.method,
                             n_max=config.n_max or DEFAULT_TRACE_TERMS_II, evaluator=_evaluator(config))

    if with_exact:
        result.exact = counting_exact(matrix.eigenvalues, result.lambdas).astype(float)
    return CommandResult(content=export_to_csv(counting_frame(result)), matrix_dimension=matrix.n,
                         warnings=result_warnings(result))


def run_zeta2(config: RunConfig) -> CommandResult:
    """zeta_II(lambda, z) at one complex point and the factorization residual at z = 1."""
    matrix = config.load_matrix()
    data = prepare_scattering(matrix)
    lam = complex(config.option('lambda_re', 0.0), config.option('lambda_im', 0.0))
    z = complex(config.option('z_re', 1.0), config.option('z_im', 0.0))

    value = spectral_det(data, lam, z)
    df = pd.DataFrame([{
        'lambda_re': lam.real,
        'lambda_im': lam.imag,
        'z_re': z.real,
        'z_im': z.imag,
        'zeta_re': value.real,
        'zeta_im': value.imag,
        'factorization_residual': factorization_residual(data, lam),
    }])
    return CommandResult(content=export_to_csv(df), matrix_dimension=matrix.n)


def figure1_frame(grid_steps: int = FIGURE1_GRID_STEPS, n_max_values=FIGURE1_N_MAX_VALUES) -> pd.DataFrame:
    """
    Exact staircase of diag(-1.6, -1.4, 0.1, 2.8) and its approximations with
    epsilon = 1/n_max and s_max = 9 n_max, on cell midpoints of (-pi, pi).
    """
    matrix = diagonal_matrix(FIGURE1_EIGENVALUES)
    grid = midpoint_grid(-math.pi, math.pi, grid_steps)
    df = pd.DataFrame({'lambda': grid, 'exact': counting_exact(matrix.eigenvalues, grid).astype(float)})

    smooth = smooth_count_I(matrix, grid)
    for n_max in n_max_values:
        policy = make_cutoff_policy(1.0 / n_max, n_max)
        evolution = evolution_traces(matrix, policy.n_max, policy.s_max)
        df[f'n_max_{n_max}'] = smooth + osc_from_evolution_traces(evolution, grid, policy.epsilon)
    return df


def run_figure1(config: RunConfig) -> CommandResult:
    steps = config.option('steps', FIGURE1_GRID_STEPS)
    return CommandResult(content=export_to_csv(figure1_frame(steps)), matrix_dimension=len(FIGURE1_EIGENVALUES))


def semicircle_frame(n_max: int = SEMICIRCLE_N_MAX, grid_steps: int = SEMICIRCLE_GRID_STEPS) -> pd.DataFrame:
    grid = make_grid(-math.pi, math.pi, grid_steps)
    fourier = semicircle_counting(grid, n_max)
    exact = semicircle_exact(grid)
    return pd.DataFrame({
        'lambda': grid,
        'fourier_bessel': fourier,
        'closed_form': exact,
        'abs_error': np.abs(fourier - exact),
    })


def run_semicircle(config: RunConfig) -> CommandResult:
    """Fourier-Bessel counting function of the semicircle against its closed form."""
    n_max = config.n_max or SEMICIRCLE_N_MAX
    df = semicircle_frame(n_max, config.option('steps', SEMICIRCLE_GRID_STEPS))
    logger.info("Semicircle with n_max=%d: max abs error %.3e", n_max, df['abs_error'].max())
    return CommandResult(content=export_to_csv(df))
