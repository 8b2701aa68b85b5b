"""
Report Component for PhiGamma

This module contains the components for rendering sub-command reports:
a human-readable text form for stdout and a machine-readable record for --out.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import pandas as pd

from utils.tables import to_records, to_text

# Set up logging
logger = logging.getLogger(__name__)


@dataclass
class Report:
    """Model for the outcome of one sub-command."""
    subcommand: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def violate(self, invariant: str) -> None:
        """Record a failed check by the name of the statement it instantiates."""
        logger.warning(f"check failed: {invariant}")
        self.violations.append(invariant)


def render_text(report: Report) -> str:
    """
    Render a report for humans.

    Args:
        report (Report): The report

    Returns:
        str: Titled tables followed by the verdict
    """
    parts = [f"== {report.subcommand} =="]
    for title, frame in report.tables.items():
        parts.append(f"-- {title} --")
        parts.append(to_text(frame))
    if report.violations:
        parts.append("FAILED: " + "; ".join(report.violations))
    else:
        parts.append("OK")
    return "\n".join(parts) + "\n"


def render_record(report: Report, job: Dict[str, Any]) -> Dict[str, Any]:
    """Machine-readable form of a report, including the job that produced it."""
    return {
        "job": job,
        "ok": report.ok,
        "violations": list(report.violations),
        "tables": {title: to_records(frame) for title, frame in report.tables.items()},
        "values": report.values,
    }
