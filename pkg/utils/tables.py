"""
Table Utilities for PhiGamma

This module contains helpers that turn report rows into pandas DataFrames.
Every row carries an "anchor" naming the statement the row checks.
"""
import logging
from typing import Any, Dict, Iterable, List, Optional

import pandas as pd

from models.padic import NormValue, PadicScalar

# Set up logging
logger = logging.getLogger(__name__)

ANCHOR = "anchor"


def cell(value: Any) -> Any:
    """Render kernel values as plain JSON-friendly cells."""
    if isinstance(value, NormValue):
        return "0" if value.is_zero else f"p^({-value.exponent})"
    if isinstance(value, PadicScalar):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(str(cell(v)) for v in value)
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    return str(value)


def build_table(rows: Iterable[Dict[str, Any]], anchor: Optional[str] = None,
                columns: Optional[List[str]] = None) -> pd.DataFrame:
    """
    Build a report table.

    Args:
        rows (Iterable[Dict[str, Any]]): Row dictionaries
        anchor (str, optional): Anchor for rows that do not name one
        columns (List[str], optional): Column order; the anchor always comes first

    Returns:
        pd.DataFrame: The table
    """
    records = []
    for row in rows:
        record = {k: cell(v) for k, v in row.items()}
        if ANCHOR not in record:
            record[ANCHOR] = anchor or ""
        records.append(record)
    if columns is None:
        columns = []
        for record in records:
            columns.extend(k for k in record if k not in columns and k != ANCHOR)
    frame = pd.DataFrame.from_records(records, columns=[ANCHOR] + [c for c in columns if c != ANCHOR])
    logger.debug(f"built table with {len(frame)} rows")
    return frame


def to_text(frame: pd.DataFrame) -> str:
    if frame.empty:
        return "(no rows)"
    return frame.to_string(index=False)


def to_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    """Rows as plain dictionaries with pandas missing values mapped to None."""
    return [{k: None if pd.isna(v) else v for k, v in row.items()}
            for row in frame.astype(object).to_dict(orient="records")]
