"""
Distribution Algebra Models for PhiGamma

This module contains truncated elements of D(N0', K) in dual representation:
a vector over the finite group N0' mod p^L and ordered b-monomial coordinates.

Group coordinates are (x,) for GL2 and (x, y, z) for GL3, standing for
n_gamma(1)^z n_beta(p)^y n_alpha(1)^x. Monomial exponents are (k,) for GL2
and (i, j, k) for b_gamma^i b_beta^j b_alpha^k, where only k may be negative.
"""
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from utils.arith import reduce_mod

Coords = Tuple[int, ...]
Exps = Tuple[int, ...]


def rank_of(group: str) -> int:
    return 3 if group == "GL3" else 1


def group_law(group: str, p: int, g: Coords, h: Coords) -> Coords:
    """(x,y,z)(x',y',z') = (x+x', y+y', z+z'+p*x*y')."""
    if group == "GL3":
        return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + p * g[0] * h[1])
    return (g[0] + h[0],)


def group_inverse(group: str, p: int, g: Coords) -> Coords:
    if group == "GL3":
        return (-g[0], -g[1], -g[2] + p * g[0] * g[1])
    return (-g[0],)


@dataclass(frozen=True, eq=False)
class DistElt:
    """
    Model for a truncated distribution.

    ``moduli`` gives the exponent e_i with coordinate i read modulo p^(e_i);
    ``degree`` is the certified per-variable monomial window (None for an
    exact monomial polynomial) and ``denominator`` the largest power of
    b_alpha^-1 present.
    """
    group: str
    p: int
    prec: int
    moduli: Optional[Tuple[int, ...]] = None
    vector: Optional[Tuple[Tuple[Coords, Fraction], ...]] = None
    monomials: Optional[Tuple[Tuple[Exps, Fraction], ...]] = None
    degree: Optional[int] = None
    denominator: int = 0

    @classmethod
    def from_vector(cls, group: str, p: int, prec: int, moduli: Iterable[int],
                    coeffs: Mapping[Coords, Any]) -> "DistElt":
        """Reduce coordinates and coefficients and drop zeros."""
        moduli = tuple(moduli)
        merged: Dict[Coords, Fraction] = {}
        for g, c in coeffs.items():
            g = tuple(int(a) % p ** e for a, e in zip(g, moduli))
            merged[g] = merged.get(g, Fraction(0)) + Fraction(c)
        vector = tuple(sorted((g, reduce_mod(p, c, prec)) for g, c in merged.items()
                              if reduce_mod(p, c, prec) != 0))
        return cls(group, p, prec, moduli=moduli, vector=vector)

    @classmethod
    def at_level(cls, group: str, p: int, prec: int, level: int,
                 coeffs: Mapping[Coords, Any]) -> "DistElt":
        return cls.from_vector(group, p, prec, (level,) * rank_of(group), coeffs)

    @classmethod
    def from_monomials(cls, group: str, p: int, prec: int, coeffs: Mapping[Exps, Any],
                       degree: Optional[int] = None) -> "DistElt":
        """Monomial-only element; coefficients are reduced modulo p^prec."""
        merged: Dict[Exps, Fraction] = {}
        for k, c in coeffs.items():
            k = tuple(int(a) for a in k)
            if len(k) != rank_of(group) or any(a < 0 for a in k[:-1]):
                raise ValueError(f"bad monomial exponent {k} for {group}")
            merged[k] = merged.get(k, Fraction(0)) + Fraction(c)
        monomials = tuple(sorted((k, reduce_mod(p, c, prec)) for k, c in merged.items()
                                 if reduce_mod(p, c, prec) != 0))
        denominator = max([0] + [-k[-1] for k, _ in monomials])
        return cls(group, p, prec, monomials=monomials, degree=degree, denominator=denominator)

    @property
    def level(self) -> Optional[int]:
        return None if self.moduli is None else min(self.moduli)

    @property
    def vector_map(self) -> Dict[Coords, Fraction]:
        return dict(self.vector or ())

    @property
    def monomial_map(self) -> Dict[Exps, Fraction]:
        return dict(self.monomials or ())

    @property
    def is_zero(self) -> bool:
        if self.vector is not None:
            return not self.vector
        return not self.monomials

    def with_monomials(self, monomials: Mapping[Exps, Fraction], degree: Optional[int]) -> "DistElt":
        body = tuple(sorted((k, reduce_mod(self.p, c, self.prec)) for k, c in monomials.items()
                            if reduce_mod(self.p, c, self.prec) != 0))
        denominator = max([0] + [-k[-1] for k, _ in body])
        return replace(self, monomials=body, degree=degree, denominator=denominator)

    def with_vector(self, moduli: Tuple[int, ...], vector: Mapping[Coords, Fraction]) -> "DistElt":
        fresh = DistElt.from_vector(self.group, self.p, self.prec, moduli, vector)
        return replace(self, moduli=fresh.moduli, vector=fresh.vector)

    def agrees_with(self, other: "DistElt") -> bool:
        """Equality of whichever representations both sides carry."""
        if self.vector is not None and other.vector is not None:
            return self.moduli == other.moduli and self.vector == other.vector
        if self.monomials is not None and other.monomials is not None:
            return self.monomials == other.monomials
        return False

    __eq__ = agrees_with
    __hash__ = None

    def as_dict(self) -> Dict[str, Any]:
        """Return the element as a fixture record with explicit representation tags."""
        out: Dict[str, Any] = {"group": self.group, "p": self.p, "prec": self.prec}
        if self.vector is not None:
            out["group_vector"] = {
                "rep": "group",
                "moduli": list(self.moduli),
                "terms": [{"g": list(g), "c": str(c)} for g, c in self.vector],
            }
        if self.monomials is not None:
            out["monomial"] = {
                "rep": "monomial",
                "degree": self.degree,
                "terms": [{"k": list(k), "c": str(c)} for k, c in self.monomials],
            }
        return out

    def __repr__(self) -> str:
        if self.monomials is not None:
            return " + ".join(f"({c})b^{k}" for k, c in self.monomials[:8]) or "0"
        return " + ".join(f"({c}){g}" for g, c in (self.vector or ())[:8]) or "0"
