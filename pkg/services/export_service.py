"""
Service for turning results into CSV and JSON artifacts.
"""

import io
import json
import logging
import sys

import numpy as np
import pandas as pd

from config import CSV_SIGNIFICANT_DIGITS, EIGENVALUE_CSV_DIGITS
from services.trace_one_service import CountingResult

logger = logging.getLogger(__name__)

SPARSE_PROBABILITY_THRESHOLD = 1e-12


def export_to_csv(df: pd.DataFrame, digits: int = CSV_SIGNIFICANT_DIGITS, header: bool = True) -> bytes:
    """
    Export a DataFrame to CSV with a fixed number of significant digits.
    Returns CSV content as bytes.
    """
    buffer = io.BytesIO()
    df.to_csv(buffer, index=False, header=header, encoding='utf-8', float_format=f'%.{digits}g', lineterminator='\n')
    buffer.seek(0)
    return buffer.getvalue()


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def export_to_json(data: dict) -> bytes:
    """Serialize a report; keys keep their insertion order."""
    return (json.dumps(data, indent=2, default=_json_default) + '\n').encode('utf-8')


def write_artifact(content: bytes, path: str = '-'):
    """Write to a file, or to stdout when path is '-'."""
    if path in (None, '-'):
        sys.stdout.buffer.write(content)
        sys.stdout.flush()
        return
    with open(path, 'wb') as handle:
        handle.write(content)
    logger.info("Wrote %d bytes to %s", len(content), path)


def eigenvalue_frame(eigenvalues) -> pd.DataFrame:
    return pd.DataFrame({'eigenvalue': np.asarray(eigenvalues, dtype=float)})


def export_eigenvalues(eigenvalues) -> bytes:
    """One eigenvalue per line at 17 significant digits, so values round-trip exactly."""
    return export_to_csv(eigenvalue_frame(eigenvalues), digits=EIGENVALUE_CSV_DIGITS, header=False)


def counting_frame(result: CountingResult) -> pd.DataFrame:
    """Columns lambda, smooth, oscillating, total and, when present, exact."""
    df = pd.DataFrame({
        'lambda': result.lambdas,
        'smooth': result.smooth,
        'oscillating': result.oscillating,
        'total': result.total,
    })
    if result.exact is not None:
        df['exact'] = result.exact
    return df


def result_warnings(record) -> list:
    """Human-readable notes for the regime flags a result record carries."""
    notes = []
    if getattr(record, 'periodized', False):
        notes.append("Spectrum leaves (-pi, pi); output describes the 2 pi-periodized spectrum")
    if getattr(record, 'formal_regime', False):
        notes.append("Test function decays slower than exp(-pi |n|); the average is formal")
    if getattr(record, 'zero_matrix', False):
        notes.append("Zero matrix cannot be rescaled; returned unchanged")
    return notes


def walk_frame(states: list, threshold: float = SPARSE_PROBABILITY_THRESHOLD) -> pd.DataFrame:
    """Sparse step, edge, probability rows; probabilities at or below threshold are dropped."""
    records = []
    for state in states:
        probabilities = state.probabilities
        for edge in np.flatnonzero(probabilities > threshold):
            records.append({'step': state.step, 'edge': int(edge), 'probability': float(probabilities[edge])})
    return pd.DataFrame(records, columns=['step', 'edge', 'probability'])


def anderson_frame(scan) -> pd.DataFrame:
    """Residual scan rows followed by refined roots, distinguished by a `kind` column."""
    scan_rows = pd.DataFrame({'kind': 'scan', 'lambda': scan.grid, 'value': scan.residuals})
    root_rows = pd.DataFrame({'kind': 'root', 'lambda': scan.roots, 'value': np.zeros(len(scan.roots))})
    return pd.concat([scan_rows, root_rows], ignore_index=True)
