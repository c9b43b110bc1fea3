"""
Exception hierarchy. Each class carries the process exit code the CLI maps it to.
"""


class TraceToolkitError(Exception):
    """Base error for every failure the toolkit reports."""
    exit_code = 3


class UsageError(TraceToolkitError):
    """Invalid command-line usage or run configuration."""
    exit_code = 1


class ArgumentError(UsageError):
    """Operation argument outside its documented range."""


class ConfigurationError(UsageError):
    """Cutoff policy or option combination that cannot be honored."""


class StructureError(UsageError):
    """Matrix does not have the sparsity an operation requires."""


class MatrixParseError(TraceToolkitError):
    """Malformed matrix file."""
    exit_code = 2


class HermiticityError(MatrixParseError):
    """Matrix file entries violate hermiticity beyond tolerance."""

    def __init__(self, row: int, col: int, deviation: float):
        self.row = row
        self.col = col
        self.deviation = deviation
        super().__init__(
            f"Entry ({row}, {col}) differs from the conjugate of ({col}, {row}) by {deviation:.3e}"
        )


class NumericalError(TraceToolkitError):
    """Numerical failure during evaluation."""
    exit_code = 3


class SingularityError(NumericalError):
    """Evaluation point too close to a pole or singular point."""


class ConvergenceError(NumericalError):
    """Iteration did not converge within its budget."""


class ConvergenceDomainError(NumericalError):
    """Series evaluated outside its domain of absolute convergence."""


class ResourceError(NumericalError):
    """Enumeration or census budget exceeded."""


class IdentityFailure(NumericalError):
    """An identity check in the verification suite failed."""

    def __init__(self, section: str, case: str, residual: float):
        self.section = section
        self.case = case
        self.residual = residual
        super().__init__(f"{section} failed at {case} (residual {residual:.3e})")
