"""
Input validation utilities.
"""

import math

from config import CUTOFF_S_FACTOR, ORBIT_MAX_LEN, minimal_n_max
from utils.errors import ArgumentError


def ensure_valid(check: tuple[bool, str], error_cls=ArgumentError):
    """Raise error_cls with the validator message when the check failed."""
    is_valid, message = check
    if not is_valid:
        raise error_cls(message)


def validate_integer_range(value, name: str, low: int = None, high: int = None) -> tuple[bool, str]:
    """
    Validate that value is an integer inside [low, high].
    Returns (is_valid, error_message).
    """
    if isinstance(value, bool) or not isinstance(value, int):
        return False, f"{name} must be an integer"

    if low is not None and value < low:
        return False, f"{name} must be at least {low} (got {value})"

    if high is not None and value > high:
        return False, f"{name} must be at most {high} (got {value})"

    return True, ""


def validate_grid_spec(lo: float, hi: float, steps: int) -> tuple[bool, str]:
    """Validate a lambda grid specification."""
    if steps is None or steps < 1:
        return False, "Grid must contain at least one point"

    if not (math.isfinite(lo) and math.isfinite(hi)):
        return False, "Grid bounds must be finite"

    if steps > 1 and hi <= lo:
        return False, f"Grid upper bound {hi} must exceed lower bound {lo}"

    return True, ""


def validate_epsilon(epsilon: float) -> tuple[bool, str]:
    """Validate a positive resolution / damping parameter."""
    if epsilon is None or not math.isfinite(epsilon):
        return False, "Epsilon must be a finite number"

    if epsilon <= 0:
        return False, f"Epsilon must be positive (got {epsilon})"

    return True, ""


def validate_cutoff_policy(epsilon: float, n_max: int, s_max: int) -> tuple[bool, str]:
    """
    Validate the cutoff rule s_max >= 9 n_max and n_max >= ceil(1/epsilon).
    Returns (is_valid, error_message).
    """
    is_valid, message = validate_epsilon(epsilon)
    if not is_valid:
        return is_valid, message

    required_n = minimal_n_max(epsilon)
    if n_max < required_n:
        return False, f"n_max must be at least ceil(1/epsilon) = {required_n} (got {n_max})"

    if s_max < CUTOFF_S_FACTOR * n_max:
        return False, f"s_max must be at least {CUTOFF_S_FACTOR} * n_max = {CUTOFF_S_FACTOR * n_max} (got {s_max})"

    return True, ""


def validate_orbit_length(max_len: int) -> tuple[bool, str]:
    """Validate an orbit enumeration depth against the configured budget."""
    is_valid, message = validate_integer_range(max_len, "max_len", low=1)
    if not is_valid:
        return is_valid, message

    if max_len > ORBIT_MAX_LEN:
        return False, f"max_len {max_len} exceeds the enumeration budget of {ORBIT_MAX_LEN}"

    return True, ""


def validate_semicircle_lambda(lam: float) -> tuple[bool, str]:
    """Validate that lambda lies in the closed window [-pi, pi]."""
    if abs(lam) > math.pi + 1e-12:
        return False, f"lambda must satisfy |lambda| <= pi (got {lam})"

    return True, ""


def validate_threads(threads: int) -> tuple[bool, str]:
    """Validate a worker-pool size."""
    return validate_integer_range(threads, "threads", low=1, high=256)
