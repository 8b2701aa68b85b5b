"""
p-adic Scalar Models for PhiGamma

This module contains the exact coefficient type (unit times a power of p at
a relative precision) and the exact norm values p^(-e).
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any, Dict, Optional, Union

from utils.arith import reduce_mod, split_unit, valuation
from utils.errors import DivisionByZeroAtPrecision

Number = Union[int, Fraction]


@dataclass(frozen=True)
class PadicScalar:
    """
    Model for an element of Q_p known to finite precision.

    A nonzero scalar is u * p^v + O(p^(v + N)) with 0 < u < p^N prime to p.
    The zero scalar O(p^v) keeps u = 0, N = 0 and records in v the absolute
    precision at which it was certified.
    """
    p: int
    v: int
    u: int
    N: int
    zero: bool = False

    @classmethod
    def from_value(cls, p: int, x: Number, N: int) -> "PadicScalar":
        """Build the scalar x with N relative digits (zero is certified at N)."""
        x = Fraction(x)
        if x == 0:
            return cls.zero_at(p, N)
        v, a, b = split_unit(p, x)
        m = p ** N
        return cls(p, v, a * pow(b, -1, m) % m, N)

    @classmethod
    def from_absolute(cls, p: int, x: Number, abs_prec: int) -> "PadicScalar":
        """Build the scalar x known modulo p^abs_prec."""
        x = reduce_mod(p, x, abs_prec)
        if x == 0:
            return cls.zero_at(p, abs_prec)
        return cls.from_value(p, x, abs_prec - valuation(p, x))

    @classmethod
    def zero_at(cls, p: int, abs_prec: int) -> "PadicScalar":
        return cls(p, abs_prec, 0, 0, True)

    @property
    def abs_prec(self) -> int:
        return self.v + self.N

    @property
    def value(self) -> Fraction:
        """The canonical rational representative."""
        if self.zero:
            return Fraction(0)
        return self.u * Fraction(self.p) ** self.v

    @property
    def valuation(self) -> int:
        """Valuation; for a zero this is the certified lower bound."""
        return self.v

    def is_unit(self) -> bool:
        return not self.zero and self.v == 0

    def _check(self, other: "PadicScalar") -> None:
        if self.p != other.p:
            raise ValueError(f"Mismatched primes {self.p} and {other.p}")

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        target = min(self.abs_prec, other.abs_prec)
        return PadicScalar.from_absolute(self.p, self.value + other.value, target)

    def __neg__(self) -> "PadicScalar":
        if self.zero:
            return self
        return PadicScalar(self.p, self.v, (-self.u) % self.p ** self.N, self.N)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        return self + (-other)

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        if self.zero or other.zero:
            return PadicScalar.zero_at(self.p, self.v + other.v)
        N = min(self.N, other.N)
        return PadicScalar(self.p, self.v + other.v, self.u * other.u % self.p ** N, N)

    def __truediv__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        if other.zero:
            raise DivisionByZeroAtPrecision(f"divisor is O({self.p}^{other.v})")
        if self.zero:
            return PadicScalar.zero_at(self.p, self.v - other.v)
        N = min(self.N, other.N)
        m = self.p ** N
        return PadicScalar(self.p, self.v - other.v, self.u * pow(other.u, -1, m) % m, N)

    def __eq__(self, other: Any) -> bool:
        """Equality at the common absolute precision."""
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self - other).zero

    __hash__ = None

    def identical(self, other: "PadicScalar") -> bool:
        """True when both scalars have the same canonical form."""
        return (self.p, self.v, self.u, self.N, self.zero) == (other.p, other.v, other.u, other.N, other.zero)

    def as_dict(self) -> Dict[str, Any]:
        """Return the scalar as a fixture record."""
        return {"v": self.v, "u": str(self.u), "N": self.N}

    def __repr__(self) -> str:
        if self.zero:
            return f"O({self.p}^{self.v})"
        return f"{self.u}*{self.p}^{self.v} + O({self.p}^{self.abs_prec})"


@total_ordering
@dataclass(frozen=True)
class NormValue:
    """Model for a norm value p^(-exponent); exponent None is the value 0."""
    exponent: Optional[Fraction]

    @classmethod
    def zero(cls) -> "NormValue":
        return cls(None)

    @classmethod
    def of(cls, e: Number) -> "NormValue":
        return cls(Fraction(e))

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def __mul__(self, other: "NormValue") -> "NormValue":
        if self.is_zero or other.is_zero:
            return NormValue.zero()
        return NormValue(self.exponent + other.exponent)

    def __pow__(self, k: int) -> "NormValue":
        if self.is_zero:
            return NormValue.zero() if k > 0 else NormValue(Fraction(0))
        return NormValue(self.exponent * k)

    def __lt__(self, other: "NormValue") -> bool:
        if other.is_zero:
            return False
        if self.is_zero:
            return True
        return self.exponent > other.exponent

    def max(self, other: "NormValue") -> "NormValue":
        return self if self >= other else other

    def as_dict(self) -> Union[str, Dict[str, int]]:
        """Return the value as a fixture record."""
        if self.is_zero:
            return "zero"
        return {"exp_num": self.exponent.numerator, "exp_den": self.exponent.denominator}

    def __repr__(self) -> str:
        return "0" if self.is_zero else f"p^({-self.exponent})"


@dataclass(frozen=True)
class RhoExponent:
    """Model for a radius rho = p^(-e) with 0 < e < 1."""
    e: Fraction

    def __post_init__(self):
        object.__setattr__(self, "e", Fraction(self.e))
        if not 0 < self.e < 1:
            raise ValueError(f"rho exponent must lie in (0, 1), got {self.e}")

    @property
    def value(self) -> NormValue:
        return NormValue(self.e)

    def as_dict(self) -> Dict[str, int]:
        """Return the exponent as a (num, den) record."""
        return {"num": self.e.numerator, "den": self.e.denominator}
