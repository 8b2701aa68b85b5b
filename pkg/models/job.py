"""
Job Models for PhiGamma

This module contains the batch job handed from the command line to the
sub-command handlers.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import sympy

# Import configuration
from config.settings import (
    DEFAULT_GROUP,
    DEFAULT_LEVEL,
    DEFAULT_PRECISION,
    DEFAULT_PRIME,
    DEFAULT_SEED,
    SUPPORTED_GROUPS,
)

from utils.errors import ParseError

SUBCOMMANDS = ("decompose", "mul", "solvex", "norm", "region", "poset", "witness", "reduce", "selftest")

# Fixture inputs each sub-command needs (min, max)
INPUT_COUNTS = {
    "decompose": (1, 1),
    "mul": (2, 2),
    "solvex": (1, 1),
    "norm": (0, 1),
    "region": (0, 1),
    "poset": (0, 0),
    "witness": (0, 0),
    "reduce": (1, 1),
    "selftest": (0, 0),
}

TORUS_NAMES = ("s", "sbar", "s*sbar", "1")


def parse_window(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """Parse "lo:hi"."""
    if text is None:
        return None
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise ParseError(f"window must look like lo:hi, got {text!r}", "--window")
    if lo >= hi:
        raise ParseError(f"empty window {text!r}", "--window")
    return lo, hi


def parse_rho(text: Optional[str]) -> Optional[Fraction]:
    """Parse the exponent a/b of rho = p^(-a/b)."""
    if text is None:
        return None
    try:
        e = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"rho must be a rational a/b, got {text!r}", "--rho")
    if not 0 < e < 1:
        raise ParseError(f"rho exponent must lie in (0, 1), got {text}", "--rho")
    return e


@dataclass
class Job:
    """Model for one CLI invocation."""
    subcommand: str
    inputs: List[str] = field(default_factory=list)
    p: int = DEFAULT_PRIME
    group: str = DEFAULT_GROUP
    level: int = DEFAULT_LEVEL
    prec: int = DEFAULT_PRECISION
    window: Optional[Tuple[int, int]] = None
    t: Optional[str] = None
    rho: Optional[Fraction] = None
    seed: int = DEFAULT_SEED
    out: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return int(self.group[2:])

    def validate(self) -> "Job":
        """
        Check the parameters against the active root datum.

        Returns:
            Job: self, for chaining

        Raises:
            ParseError: A parameter is out of range or inconsistent with the group
        """
        if self.subcommand not in SUBCOMMANDS:
            raise ParseError(f"unknown sub-command {self.subcommand!r}", "subcommand")
        if self.group not in SUPPORTED_GROUPS:
            raise ParseError(f"group must be one of {', '.join(SUPPORTED_GROUPS)}", "--group")
        if not sympy.isprime(self.p):
            raise ParseError(f"{self.p} is not prime", "--p")
        if self.level < 1:
            raise ParseError("level must be at least 1", "--level")
        if self.prec < 1:
            raise ParseError("precision must be at least 1", "--prec")
        if self.t is not None and self.t not in TORUS_NAMES:
            try:
                vals = [int(v) for v in self.t.split(",")]
            except ValueError:
                raise ParseError(f"t must be a name or comma-separated valuations, got {self.t!r}", "--t")
            if len(vals) != self.rank:
                raise ParseError(f"{self.group} needs {self.rank} valuations, got {len(vals)}", "--t")
        low, high = INPUT_COUNTS[self.subcommand]
        if not low <= len(self.inputs) <= high:
            raise ParseError(f"{self.subcommand} takes {low}..{high} fixture inputs, got {len(self.inputs)}",
                             "inputs")
        return self

    def as_dict(self) -> Dict[str, Any]:
        """Return the job as a dictionary."""
        return {
            "subcommand": self.subcommand,
            "inputs": list(self.inputs),
            "p": self.p,
            "group": self.group,
            "level": self.level,
            "prec": self.prec,
            "window": None if self.window is None else list(self.window),
            "t": self.t,
            "rho": None if self.rho is None else str(self.rho),
            "seed": self.seed,
            "options": {k: v for k, v in sorted(self.options.items())},
        }
