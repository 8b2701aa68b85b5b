"""
Laurent Series Models for PhiGamma

This module contains the windowed Laurent series used as the coefficient
rings o[[T]], O_E, O_E-dagger, E-dagger and the Robba ring, together with
their analyticity certificates.

A series is known modulo p^prec at every exponent below ``hi``; exponents
below ``lo`` carry coefficients that vanish modulo p^prec. ``hi = None``
marks a series with no upper truncation (a Laurent polynomial modulo p^prec).
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

from models.padic import PadicScalar
from utils.arith import reduce_mod, valuation
from utils.errors import IncompatibleClasses, WindowUnderflow

# Set up logging
logger = logging.getLogger(__name__)

IWASAWA = "Iwasawa"
OE = "OE"
OE_DAGGER = "OEdagger"
E_DAGGER = "Edagger"
ROBBA = "Robba"

CLASS_TAGS = (IWASAWA, OE_DAGGER, OE, E_DAGGER, ROBBA)

# Classes containing each class, listed smallest first
_CONTAINING = {
    IWASAWA: (IWASAWA, OE_DAGGER, OE, E_DAGGER, ROBBA),
    OE_DAGGER: (OE_DAGGER, OE, E_DAGGER, ROBBA),
    OE: (OE,),
    E_DAGGER: (E_DAGGER, ROBBA),
    ROBBA: (ROBBA,),
}


def min_hi(*his: Optional[int]) -> Optional[int]:
    """Minimum of window ends where None stands for no truncation."""
    finite = [h for h in his if h is not None]
    return min(finite) if finite else None


@dataclass(frozen=True)
class Certificate:
    """Model for an analyticity class with an optional declared radius exponent."""
    tag: str = OE
    radius: Optional[Fraction] = None

    def __post_init__(self):
        if self.tag not in CLASS_TAGS:
            raise ValueError(f"Unknown analyticity class: {self.tag}")

    def join(self, other: "Certificate") -> "Certificate":
        """Smallest class containing both inputs."""
        common = [t for t in _CONTAINING[self.tag] if t in _CONTAINING[other.tag]]
        if not common:
            raise IncompatibleClasses(f"{self.tag} and {other.tag} have no common class")
        radii = [r for r in (self.radius, other.radius) if r is not None]
        return Certificate(common[0], min(radii) if radii else None)

    @property
    def integral(self) -> bool:
        return self.tag in (IWASAWA, OE, OE_DAGGER)

    def as_dict(self) -> Dict[str, Any]:
        """Return the certificate as a dictionary."""
        out = {"class": self.tag}
        if self.radius is not None:
            out["radius"] = str(self.radius)
        return out


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Model for a truncated Laurent series over Q_p."""
    p: int
    prec: int
    lo: int
    hi: Optional[int]
    terms: Tuple[Tuple[int, Fraction], ...]
    cert: Certificate = field(default_factory=Certificate)

    # Constructors

    @classmethod
    def build(
        cls,
        p: int,
        coeffs: Mapping[int, Any],
        prec: int,
        lo: Optional[int] = None,
        hi: Optional[int] = None,
        cert: Optional[Certificate] = None,
    ) -> "LaurentSeries":
        """
        Build a canonical series from raw coefficients.

        Coefficients are reduced modulo p^prec and dropped outside the window.
        ``lo`` only matters for the zero series; otherwise it is the lowest
        surviving exponent.
        """
        cert = cert or Certificate()
        reduced = {}
        for n, c in coeffs.items():
            if hi is not None and n >= hi:
                continue
            r = reduce_mod(p, c, prec)
            if r != 0:
                reduced[n] = r
        if lo is not None:
            below = [n for n in reduced if n < lo]
            if below:
                raise ValueError(f"coefficients below window start {lo}: {sorted(below)[:3]}")
        if reduced:
            lo = min(reduced)
        elif lo is None or (hi is not None and lo >= hi):
            lo = 0 if hi is None else hi - 1
        if hi is not None and lo >= hi:
            raise WindowUnderflow(f"empty window [{lo}, {hi})")
        return cls(p, prec, lo, hi, tuple(sorted(reduced.items())), cert)

    @classmethod
    def zero(cls, p: int, prec: int, hi: Optional[int] = None,
             cert: Optional[Certificate] = None) -> "LaurentSeries":
        return cls.build(p, {}, prec, hi=hi, cert=cert)

    @classmethod
    def constant(cls, p: int, c: Any, prec: int,
                 cert: Optional[Certificate] = None) -> "LaurentSeries":
        return cls.build(p, {0: c}, prec, cert=cert)

    @classmethod
    def monomial(cls, p: int, n: int, prec: int, c: Any = 1,
                 cert: Optional[Certificate] = None) -> "LaurentSeries":
        return cls.build(p, {n: c}, prec, cert=cert)

    @classmethod
    def from_scalars(cls, coeffs: Mapping[int, PadicScalar], lo: int, hi: Optional[int],
                     cert: Optional[Certificate] = None) -> "LaurentSeries":
        """Build a series from scalar coefficients at their common absolute precision."""
        scalars = list(coeffs.values())
        if not scalars:
            raise ValueError("from_scalars needs at least one coefficient")
        p = scalars[0].p
        prec = min(s.abs_prec for s in scalars)
        return cls.build(p, {n: s.value for n, s in coeffs.items()}, prec, lo, hi, cert)

    # Accessors

    @cached_property
    def coeff_map(self) -> Dict[int, Fraction]:
        return dict(self.terms)

    def coeff(self, n: int) -> Fraction:
        """Coefficient of T^n (zero outside the support)."""
        return self.coeff_map.get(n, Fraction(0))

    @property
    def coeffs(self) -> Dict[int, PadicScalar]:
        """Coefficients as scalars at the series precision."""
        return {n: PadicScalar.from_absolute(self.p, c, self.prec) for n, c in self.terms}

    @property
    def support(self) -> List[int]:
        return [n for n, _ in self.terms]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exact(self) -> bool:
        return self.hi is None

    @cached_property
    def vmin(self) -> int:
        """Minimum valuation over the stored coefficients, capped at prec."""
        vals = [valuation(self.p, c) for _, c in self.terms]
        return min(vals + [self.prec])

    @property
    def top(self) -> Optional[int]:
        """Largest exponent in the support."""
        return self.terms[-1][0] if self.terms else None

    # Window handling

    def truncate(self, hi: Optional[int]) -> "LaurentSeries":
        """Forget every exponent at or above hi."""
        new_hi = min_hi(self.hi, hi)
        if new_hi == self.hi:
            return self
        return LaurentSeries.build(self.p, self.coeff_map, self.prec, hi=new_hi, cert=self.cert)

    def with_prec(self, prec: int) -> "LaurentSeries":
        """Reduce to a coarser precision."""
        if prec >= self.prec:
            return self
        return LaurentSeries.build(self.p, self.coeff_map, prec, hi=self.hi, cert=self.cert)

    def with_cert(self, cert: Certificate) -> "LaurentSeries":
        return LaurentSeries(self.p, self.prec, self.lo, self.hi, self.terms, cert)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by T^k."""
        hi = None if self.hi is None else self.hi + k
        coeffs = {n + k: c for n, c in self.terms}
        return LaurentSeries.build(self.p, coeffs, self.prec, self.lo + k, hi, self.cert)

    def scaled(self, k: int) -> "LaurentSeries":
        """Multiply by p^k exactly."""
        factor = Fraction(self.p) ** k
        coeffs = {n: c * factor for n, c in self.terms}
        return LaurentSeries.build(self.p, coeffs, self.prec + k, self.lo, self.hi, self.cert)

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Equality on the common window at the common precision."""
        if self.p != other.p:
            return False
        prec = min(self.prec, other.prec)
        hi = min_hi(self.hi, other.hi)
        for n in set(self.coeff_map) | set(other.coeff_map):
            if hi is not None and n >= hi:
                continue
            if reduce_mod(self.p, self.coeff(n) - other.coeff(n), prec) != 0:
                return False
        return True

    __eq__ = agrees_with
    __hash__ = None

    def key(self) -> Tuple:
        """Hashable canonical form."""
        return (self.p, self.prec, self.lo, self.hi, self.terms, self.cert)

    def is_zero_at_precision(self) -> bool:
        return self.is_zero

    # Ring structure

    def _check(self, other: "LaurentSeries") -> None:
        if self.p != other.p:
            raise ValueError(f"Mismatched primes {self.p} and {other.p}")

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        out: Dict[int, Fraction] = defaultdict(Fraction)
        for n, c in self.terms:
            out[n] += c
        for n, c in other.terms:
            out[n] += c
        return LaurentSeries.build(
            self.p, out, min(self.prec, other.prec),
            lo=min(self.lo, other.lo), hi=min_hi(self.hi, other.hi),
            cert=self.cert.join(other.cert),
        )

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries.build(self.p, {n: -c for n, c in self.terms}, self.prec,
                                   self.lo, self.hi, self.cert)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        self._check(other)
        prec = min(self.prec + other.vmin, other.prec + self.vmin)
        lo = self.lo + other.lo
        hi = min_hi(
            None if other.hi is None else self.lo + other.hi,
            None if self.hi is None else other.lo + self.hi,
        )
        out: Dict[int, Fraction] = defaultdict(Fraction)
        for i, a in self.terms:
            for j, b in other.terms:
                if hi is None or i + j < hi:
                    out[i + j] += a * b
        if hi is not None and hi <= lo:
            raise WindowUnderflow(f"product window [{lo}, {hi}) is empty")
        return LaurentSeries.build(self.p, out, prec, lo, hi, self.cert.join(other.cert))

    def scale_by(self, c: Any, c_prec: int) -> "LaurentSeries":
        """Multiply by a scalar known modulo p^c_prec."""
        c = reduce_mod(self.p, c, c_prec)
        vc = valuation(self.p, c)
        prec = c_prec + self.vmin if vc is None else min(c_prec + self.vmin, self.prec + vc)
        return LaurentSeries.build(self.p, {n: a * c for n, a in self.terms}, prec,
                                   self.lo, self.hi, self.cert)

    def __pow__(self, k: int) -> "LaurentSeries":
        if k == 0:
            return LaurentSeries.constant(self.p, 1, self.prec, self.cert)
        result = None
        base = self
        while k > 0:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # Serialization

    def as_dict(self) -> Dict[str, Any]:
        """Return the series as a fixture record."""
        return {
            "p": self.p,
            "prec": self.prec,
            "window": [self.lo, self.hi],
            "coeffs": {str(n): PadicScalar.from_absolute(self.p, c, self.prec).as_dict()
                       for n, c in self.terms},
            **self.cert.as_dict(),
        }

    def __repr__(self) -> str:
        body = " + ".join(f"({c})T^{n}" for n, c in self.terms[:8]) or "0"
        if len(self.terms) > 8:
            body += " + ..."
        tail = "" if self.hi is None else f" + O(T^{self.hi})"
        return f"{body}{tail} mod {self.p}^{self.prec}"


def sum_series(items: Iterable[LaurentSeries], p: int, prec: int,
               cert: Optional[Certificate] = None) -> LaurentSeries:
    """Sum of series; the empty sum is the exact zero."""
    total = LaurentSeries.zero(p, prec, cert=cert)
    for item in items:
        total = total + item
    return total
