"""
Region Models for PhiGamma

This module contains convergence regions {rho2 < |b_alpha| < 1, |b_beta| <= |b_alpha|^r}.
"""
from dataclasses import dataclass
from typing import Any, Dict

from models.padic import RhoExponent


@dataclass(frozen=True)
class Region:
    """Model for an annulus given by its inner radius and the exponent r."""
    rho2: RhoExponent
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"region exponent r must be >= 1, got {self.r}")

    def covers(self, other: "Region") -> bool:
        """True iff this annulus lies inside ``other``."""
        return self.r >= other.r and self.rho2.e <= other.rho2.e

    def as_dict(self) -> Dict[str, Any]:
        """Return the region as a fixture record."""
        return {"rho2_num": self.rho2.e.numerator, "rho2_den": self.rho2.e.denominator, "r": self.r}
