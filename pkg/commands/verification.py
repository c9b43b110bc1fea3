"""
Verification and bookkeeping subcommands: the identity suite and run history.
"""

import logging

from commands.run_config import CommandResult, RunConfig
from config import IDENTITY_S_MAX, IDENTITY_TRIALS
from services.archive_service import get_run_history, history_frame
from services.export_service import export_to_csv, export_to_json
from services.identity_service import run_identity_suite
from utils.errors import IdentityFailure, UsageError
from utils.validators import ensure_valid, validate_integer_range

logger = logging.getLogger(__name__)


def run_identities(config: RunConfig) -> CommandResult:
    """JSON pass/fail report; a failing case makes the run exit with the numerical-error code."""
    s_max = config.s_max or IDENTITY_S_MAX
    trials = config.option('trials', IDENTITY_TRIALS)
    ensure_valid(validate_integer_range(trials, "trials", low=0), UsageError)

    report = run_identity_suite(s_max=s_max, trials=trials, seed=config.seed)
    result = CommandResult(content=export_to_json(report.to_dict()), identity_cases=report.cases)

    failure = report.first_failure
    if failure is not None:
        result.error = IdentityFailure(failure.section, failure.case, failure.residual)
        result.exit_code = result.error.exit_code
    return result


def run_history(config: RunConfig) -> CommandResult:
    """Most recent archived runs as CSV."""
    limit = config.option('limit', 20)
    ensure_valid(validate_integer_range(limit, "limit", low=1), UsageError)
    return CommandResult(content=export_to_csv(history_frame(get_run_history(limit=limit))))
