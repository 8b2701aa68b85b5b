"""
Module Models for PhiGamma

This module contains phi-modules given by matrices in a fixed basis: series
modules over the coefficient rings and skew modules at a finite level.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from models.groups import TorusElt
from models.series import LaurentSeries
from models.skew import SkewElt

SeriesMatrix = Tuple[Tuple[LaurentSeries, ...], ...]
SkewMatrix = Tuple[Tuple[SkewElt, ...], ...]


def freeze(rows) -> Tuple[Tuple[Any, ...], ...]:
    """Turn nested lists into nested tuples."""
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True, eq=False)
class SeriesModule:
    """Model for a free phi-module over a series ring with tracked T+ actions."""
    rank: int
    phi: SeriesMatrix
    actions: Tuple[Tuple[TorusElt, SeriesMatrix], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "phi", freeze(self.phi))
        object.__setattr__(self, "actions", tuple((t, freeze(m)) for t, m in self.actions))
        if len(self.phi) != self.rank or any(len(r) != self.rank for r in self.phi):
            raise ValueError(f"phi matrix is not {self.rank}x{self.rank}")

    def action(self, t: TorusElt) -> SeriesMatrix:
        for s, m in self.actions:
            if s.diag == t.diag:
                return m
        raise KeyError(f"no tracked action for {t.diag}")

    def as_dict(self) -> Dict[str, Any]:
        """Return the module as a fixture record."""
        return {
            "rank": self.rank,
            "phi_matrix": [[e.as_dict() for e in row] for row in self.phi],
            "actions": [{"t": t.as_dict(), "matrix": [[e.as_dict() for e in row] for row in m]}
                        for t, m in self.actions],
        }


@dataclass(frozen=True, eq=False)
class SkewModuleLevel:
    """Model for a free phi-module over R[H1/H_k, ell, iota] at level k."""
    group: str
    p: int
    level: int
    rank: int
    P: SkewMatrix
    actions: Tuple[Tuple[TorusElt, SkewMatrix], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "P", freeze(self.P))
        object.__setattr__(self, "actions", tuple((t, freeze(m)) for t, m in self.actions))
        if len(self.P) != self.rank or any(len(r) != self.rank for r in self.P):
            raise ValueError(f"phi matrix is not {self.rank}x{self.rank}")

    def action(self, t: TorusElt) -> SkewMatrix:
        for s, m in self.actions:
            if s.diag == t.diag:
                return m
        raise KeyError(f"no tracked action for {t.diag}")

    def as_dict(self) -> Dict[str, Any]:
        """Return the module as a fixture record."""
        return {
            "group": self.group,
            "p": self.p,
            "rank": self.rank,
            "level": self.level,
            "phi_matrix": [[e.as_dict() for e in row] for row in self.P],
            "actions": [{"t": t.as_dict(), "matrix": [[e.as_dict() for e in row] for row in m]}
                        for t, m in self.actions],
        }


@dataclass
class SolverReport:
    """Model for residuals of the basis-change solver."""
    level: int
    residuals: Dict[str, bool] = field(default_factory=dict)
    term_levels: List[bool] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.residuals.values()) and all(self.term_levels)

    def as_dict(self) -> Dict[str, Any]:
        """Return the report as a dictionary."""
        return {"level": self.level, "ok": self.ok, "residuals": dict(self.residuals),
                "term_levels": list(self.term_levels)}
