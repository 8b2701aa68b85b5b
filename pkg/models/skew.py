"""
Skew Group Ring Models for PhiGamma

This module contains the level-k elements of R[H1/H_k, ell, iota]: finitely
supported maps from canonical representatives of H1/H_k to series.

An element carries one absolute precision ``prec`` shared by every key:
coefficients at keys missing from the body are known to vanish modulo
p^prec. ``prec = None`` marks an exact element (only the exact zero).
"""
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from models.groups import QuotientSpec
from models.series import Certificate, LaurentSeries

Key = Tuple[int, ...]


def min_prec(*precs: Optional[int]) -> Optional[int]:
    """Minimum of absolute precisions where None stands for exact."""
    finite = [n for n in precs if n is not None]
    return min(finite) if finite else None


@dataclass(frozen=True, eq=False)
class SkewElt:
    """Model for sum_h r_h * h at level k."""
    group: str
    p: int
    level: int
    body: Tuple[Tuple[Key, LaurentSeries], ...]
    prec: Optional[int] = None

    @classmethod
    def build(cls, group: str, p: int, level: int,
              terms: Iterable[Tuple[Key, LaurentSeries]],
              prec: Optional[int] = None) -> "SkewElt":
        """
        Canonicalize keys, merge repeated keys and drop vanishing coefficients.

        The result is known modulo p^N for N the minimum of ``prec`` and every
        coefficient precision, including coefficients that get dropped.
        """
        spec = QuotientSpec(group, p, level)
        merged: Dict[Key, LaurentSeries] = {}
        for key, series in terms:
            key = spec.canon(key)
            merged[key] = merged[key] + series if key in merged else series
        floor = min_prec(prec, *(s.prec for s in merged.values()))
        body = []
        for key in sorted(merged):
            series = merged[key] if floor is None else merged[key].with_prec(floor)
            if not series.is_zero:
                body.append((key, series))
        return cls(group, p, level, tuple(body), floor)

    @classmethod
    def zero(cls, group: str, p: int, level: int, prec: Optional[int] = None) -> "SkewElt":
        """Zero, exact or known modulo p^prec."""
        return cls(group, p, level, (), prec)

    @classmethod
    def monomial(cls, group: str, p: int, level: int, key: Key,
                 series: LaurentSeries) -> "SkewElt":
        return cls.build(group, p, level, [(key, series)])

    @property
    def spec(self) -> QuotientSpec:
        return QuotientSpec(self.group, self.p, self.level)

    @property
    def terms(self) -> Dict[Key, LaurentSeries]:
        return dict(self.body)

    def term(self, key: Key) -> Optional[LaurentSeries]:
        return self.terms.get(self.spec.canon(key))

    @property
    def keys(self) -> List[Key]:
        return [k for k, _ in self.body]

    @property
    def is_zero(self) -> bool:
        """True when every coefficient vanishes at the element precision."""
        return not self.body

    @property
    def vmin(self) -> Optional[int]:
        """Minimum coefficient valuation over all keys, capped at prec; None for the exact zero."""
        return min_prec(self.prec, *(s.vmin for _, s in self.body))

    @property
    def cert(self) -> Certificate:
        certs = [s.cert for _, s in self.body]
        out = certs[0] if certs else Certificate()
        for c in certs[1:]:
            out = out.join(c)
        return out

    def product_prec(self, other: "SkewElt") -> Optional[int]:
        """Absolute precision of a product: min(prec_x + v(y), prec_y + v(x))."""
        bounds = [a.prec + b.vmin for a, b in ((self, other), (other, self))
                  if a.prec is not None and b.vmin is not None]
        return min(bounds) if bounds else None

    def _check(self, other: "SkewElt") -> None:
        if (self.group, self.p, self.level) != (other.group, other.p, other.level):
            raise ValueError(
                f"skew elements live in different rings: "
                f"{(self.group, self.p, self.level)} vs {(other.group, other.p, other.level)}"
            )

    def __add__(self, other: "SkewElt") -> "SkewElt":
        self._check(other)
        return SkewElt.build(self.group, self.p, self.level, list(self.body) + list(other.body),
                             min_prec(self.prec, other.prec))

    def __neg__(self) -> "SkewElt":
        return SkewElt(self.group, self.p, self.level, tuple((k, -s) for k, s in self.body), self.prec)

    def __sub__(self, other: "SkewElt") -> "SkewElt":
        return self + (-other)

    def map_coeffs(self, fn, prec: Optional[int] = None) -> "SkewElt":
        """
        Apply fn to every coefficient.

        fn must not lower valuations; absent keys keep the element precision
        unless ``prec`` says otherwise.
        """
        prec = self.prec if prec is None else prec
        return SkewElt.build(self.group, self.p, self.level,
                             [(k, fn(s)) for k, s in self.body], prec)

    def left_scale(self, r: LaurentSeries) -> "SkewElt":
        """r * x (series act on the left without twisting)."""
        if self.prec is None:
            return self
        prec = self.prec + r.vmin
        if self.vmin is not None:
            prec = min(prec, r.prec + self.vmin)
        return self.map_coeffs(lambda s: r * s, prec)

    def agrees_with(self, other: "SkewElt") -> bool:
        """Coefficientwise agreement at the common precision; absent keys are zero."""
        self._check(other)
        prec = min_prec(self.prec, other.prec)
        mine, theirs = self.terms, other.terms
        for key in set(mine) | set(theirs):
            a, b = mine.get(key), theirs.get(key)
            if a is None:
                a, b = b, a
            if b is None:
                if not (a if prec is None else a.with_prec(prec)).is_zero:
                    return False
            elif not a.agrees_with(b):
                return False
        return True

    __eq__ = agrees_with
    __hash__ = None

    def key(self) -> Tuple:
        """Hashable canonical form."""
        return (self.group, self.p, self.level, self.prec, tuple((k, s.key()) for k, s in self.body))

    def as_dict(self) -> Dict[str, Any]:
        """Return the element as a fixture record."""
        out = {
            "group": self.group,
            "p": self.p,
            "level": self.level,
            "terms": [{"key": list(k), "series": s.as_dict()} for k, s in self.body],
        }
        if self.prec is not None:
            out["prec"] = self.prec
        return out

    def __repr__(self) -> str:
        body = " + ".join(f"[{s}]*{k}" for k, s in self.body) or "0"
        return body if self.prec is None else f"{body} (mod {self.p}^{self.prec})"
