"""
Run archive service for recording CLI invocations and identity outcomes.
"""

import logging
from datetime import datetime

import pandas as pd

from database.db import get_db_session
from database.models import IdentityCheck, RunRecord

logger = logging.getLogger(__name__)


def record_run(subcommand: str, arguments: dict, exit_code: int, matrix_dimension: int = None,
               output_path: str = None, started_at: datetime = None,
               duration_seconds: float = None) -> int:
    """
    Record one CLI run.
    Returns the new run_id.
    """
    with get_db_session() as db:
        run = RunRecord(
            subcommand=subcommand,
            arguments=arguments,
            matrix_dimension=matrix_dimension,
            exit_code=exit_code,
            output_path=output_path,
            started_at=started_at or datetime.utcnow(),
            duration_seconds=duration_seconds,
        )
        db.add(run)
        db.flush()
        run_id = run.run_id

    logger.info("Archived %s run as #%d", subcommand, run_id)
    return run_id


def record_identity_checks(run_id: int, cases: list) -> int:
    """Attach identity-suite cases to a run. Returns the number of rows written."""
    with get_db_session() as db:
        db.add_all([
            IdentityCheck(
                run_id=run_id,
                section=case.section,
                case_label=case.case,
                residual=case.residual,
                passed=case.passed,
            )
            for case in cases
        ])
    return len(cases)


def get_run_history(subcommand: str = None, limit: int = 20) -> list[dict]:
    """
    Get the most recent runs, newest first, with their failed-check counts.
    """
    with get_db_session() as db:
        query = db.query(RunRecord)
        if subcommand:
            query = query.filter(RunRecord.subcommand == subcommand)

        runs = query.order_by(RunRecord.started_at.desc(), RunRecord.run_id.desc()).limit(limit).all()

        return [
            {
                'run_id': run.run_id,
                'subcommand': run.subcommand,
                'started_at': run.started_at,
                'exit_code': run.exit_code,
                'matrix_dimension': run.matrix_dimension,
                'duration_seconds': run.duration_seconds,
                'output_path': run.output_path,
                'failed_checks': sum(1 for c in run.checks if not c.passed),
            }
            for run in runs
        ]


def get_identity_checks(run_id: int, failed_only: bool = False) -> list[dict]:
    """Get the identity rows of one run."""
    with get_db_session() as db:
        query = db.query(IdentityCheck).filter(IdentityCheck.run_id == run_id)
        if failed_only:
            query = query.filter(IdentityCheck.passed.is_(False))
        return [
            {
                'section': c.section,
                'case': c.case_label,
                'residual': c.residual,
                'passed': c.passed,
            }
            for c in query.order_by(IdentityCheck.check_id).all()
        ]


def history_frame(history: list[dict]) -> pd.DataFrame:
    columns = ['run_id', 'subcommand', 'started_at', 'exit_code', 'matrix_dimension',
               'duration_seconds', 'output_path', 'failed_checks']
    return pd.DataFrame(history, columns=columns)
