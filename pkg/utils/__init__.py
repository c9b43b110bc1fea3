"""Utilities module."""
from utils.errors import (
    TraceToolkitError, UsageError, ArgumentError, ConfigurationError, StructureError,
    MatrixParseError, HermiticityError, NumericalError, SingularityError, ConvergenceError,
    ConvergenceDomainError, ResourceError, IdentityFailure
)
from utils.validators import (
    ensure_valid, validate_integer_range, validate_grid_spec, validate_epsilon,
    validate_cutoff_policy, validate_orbit_length, validate_semicircle_lambda, validate_threads
)
from utils.grid_utils import (
    parse_grid_spec, make_grid, midpoint_grid, nudge_off_eigenvalues, evaluate_on_grid
)
from utils.linalg import hermitian_eigensystem, lu_determinant
