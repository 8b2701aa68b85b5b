"""
Root Datum and Group Models for PhiGamma

This module contains the GL_n root data, torus elements, unitriangular
group elements of N0, subgroup lattices and the finite quotients H1/H_k.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.padic import PadicScalar
from utils.arith import split_unit, valuation

Root = Tuple[int, int]

ROOT_NAMES = {(0, 1): "alpha", (1, 2): "beta", (0, 2): "gamma"}


@dataclass(frozen=True)
class RootDatum:
    """Model for the positive-root combinatorics of GL_n."""
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"GL_n needs n >= 2, got {self.n}")

    @property
    def name(self) -> str:
        return f"GL{self.n}"

    @property
    def positive(self) -> Tuple[Root, ...]:
        """Positive roots in coordinate order: by height, then by row."""
        roots = [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        return tuple(sorted(roots, key=lambda r: (r[1] - r[0], r[0])))

    @property
    def simple(self) -> Tuple[Root, ...]:
        return tuple((i, i + 1) for i in range(self.n - 1))

    @property
    def alpha(self) -> Root:
        """The simple root carrying the functional ell."""
        return (0, 1)

    @property
    def xi_exponents(self) -> Tuple[int, ...]:
        return tuple(range(self.n - 1, -1, -1))

    def degree(self, root: Root) -> int:
        """Degree m_beta of beta composed with xi."""
        return root[1] - root[0]

    @property
    def ordering(self) -> Tuple[Root, ...]:
        """Monomial ordering: higher degree first, then later rows first (gamma < beta < alpha)."""
        return tuple(sorted(self.positive, key=lambda r: (-(r[1] - r[0]), -r[0])))

    def index(self, root: Root) -> int:
        return self.positive.index(root)

    def root_name(self, root: Root) -> str:
        return ROOT_NAMES.get(root, f"e{root[0]}-e{root[1]}") if self.n <= 3 else f"e{root[0]}-e{root[1]}"

    def as_dict(self) -> Dict[str, Any]:
        """Return the datum as a dictionary."""
        return {
            "group": self.name,
            "positive": [list(r) for r in self.positive],
            "simple": [list(r) for r in self.simple],
            "xi": list(self.xi_exponents),
            "degrees": [self.degree(r) for r in self.positive],
        }


@dataclass(frozen=True)
class TorusElt:
    """Model for a diagonal torus element with exact rational entries."""
    p: int
    diag: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "diag", tuple(Fraction(d) for d in self.diag))
        if any(d == 0 for d in self.diag):
            raise ValueError("torus entries must be nonzero")

    @classmethod
    def from_valuations(cls, p: int, vals) -> "TorusElt":
        return cls(p, tuple(Fraction(p) ** v for v in vals))

    @classmethod
    def identity(cls, p: int, n: int) -> "TorusElt":
        return cls(p, (Fraction(1),) * n)

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def valuations(self) -> Tuple[int, ...]:
        return tuple(valuation(self.p, d) for d in self.diag)

    def root_value(self, root: Root) -> Fraction:
        """beta(t) = t_i / t_j."""
        return self.diag[root[0]] / self.diag[root[1]]

    def m(self, root: Root) -> int:
        """m(beta, t) = val_p(beta(t))."""
        return valuation(self.p, self.root_value(root))

    def unit_part(self, root: Root) -> Fraction:
        """u with beta(t) = p^m u."""
        return self.root_value(root) / Fraction(self.p) ** self.m(root)

    def __mul__(self, other: "TorusElt") -> "TorusElt":
        return TorusElt(self.p, tuple(a * b for a, b in zip(self.diag, other.diag)))

    def inverse(self) -> "TorusElt":
        return TorusElt(self.p, tuple(1 / a for a in self.diag))

    def __pow__(self, k: int) -> "TorusElt":
        return TorusElt(self.p, tuple(a ** k for a in self.diag))

    def scalars(self, prec: int) -> Tuple[PadicScalar, ...]:
        """Entries as scalars with prec relative digits."""
        return tuple(PadicScalar.from_value(self.p, d, prec) for d in self.diag)

    def as_dict(self) -> Dict[str, Any]:
        """Return the torus element as a list of exact entries."""
        return {"p": self.p, "diag": [str(d) for d in self.diag]}


@dataclass(frozen=True)
class UnitriangularElt:
    """
    Model for an element of N0 = N(Z_p) by its above-diagonal entries.

    ``coords`` follows RootDatum.positive; for GL3 this is (x, y, z) with x on
    alpha, y on beta and z on gamma. ``level`` None keeps exact integers.
    """
    n: int
    level: Optional[int]
    p: int
    coords: Tuple[int, ...]

    def __post_init__(self):
        if self.level is not None:
            mod = self.p ** self.level
            object.__setattr__(self, "coords", tuple(int(c) % mod for c in self.coords))
        else:
            object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def datum(self) -> RootDatum:
        return RootDatum(self.n)

    def entry(self, root: Root) -> int:
        return self.coords[self.datum.index(root)]

    @property
    def entries(self) -> Dict[Root, int]:
        return dict(zip(self.datum.positive, self.coords))

    @classmethod
    def from_entries(cls, n: int, level: Optional[int], p: int,
                     entries: Dict[Root, int]) -> "UnitriangularElt":
        datum = RootDatum(n)
        return cls(n, level, p, tuple(entries.get(r, 0) for r in datum.positive))

    @classmethod
    def identity(cls, n: int, level: Optional[int], p: int) -> "UnitriangularElt":
        return cls(n, level, p, (0,) * (n * (n - 1) // 2))

    def is_identity(self) -> bool:
        return not any(self.coords)

    def __mul__(self, other: "UnitriangularElt") -> "UnitriangularElt":
        a, b = self.entries, other.entries
        out = {}
        for (i, j) in self.datum.positive:
            out[(i, j)] = a[(i, j)] + b[(i, j)] + sum(a[(i, k)] * b[(k, j)] for k in range(i + 1, j))
        return UnitriangularElt.from_entries(self.n, _common_level(self, other), self.p, out)

    def inverse(self) -> "UnitriangularElt":
        a = self.entries
        inv: Dict[Root, int] = {}
        # (A^-1)_ij = -a_ij - sum_k a_ik (A^-1)_kj, filled by increasing height
        for (i, j) in self.datum.positive:
            inv[(i, j)] = -a[(i, j)] - sum(a[(i, k)] * inv[(k, j)] for k in range(i + 1, j))
        return UnitriangularElt.from_entries(self.n, self.level, self.p, inv)

    def to_matrix(self) -> np.ndarray:
        """The unitriangular matrix as an integer object array."""
        m = np.eye(self.n, dtype=object)
        for (i, j), c in self.entries.items():
            m[i, j] = c
        return m

    @classmethod
    def from_matrix(cls, m: np.ndarray, level: Optional[int], p: int) -> "UnitriangularElt":
        n = m.shape[0]
        return cls.from_entries(n, level, p, {(i, j): int(m[i, j]) for i in range(n)
                                              for j in range(i + 1, n)})

    def at_level(self, level: Optional[int]) -> "UnitriangularElt":
        return UnitriangularElt(self.n, level, self.p, self.coords)

    def as_dict(self) -> Dict[str, Any]:
        """Return the element as a coordinate record."""
        return {"group": f"GL{self.n}", "level": self.level, "coords": list(self.coords)}


def _common_level(g: UnitriangularElt, h: UnitriangularElt) -> Optional[int]:
    if g.p != h.p or g.n != h.n:
        raise ValueError("group elements of different groups")
    levels = [x for x in (g.level, h.level) if x is not None]
    return min(levels) if levels else None


@dataclass(frozen=True)
class Lattice:
    """
    Model for a coordinate subgroup {x in p^ex, y in p^ey, z in p^ez} of the GL3 N0.

    An exponent None forces the coordinate to vanish. For GL2 only ex is used.
    """
    ex: Optional[int]
    ey: Optional[int] = None
    ez: Optional[int] = None

    def exponents(self) -> Tuple[Optional[int], ...]:
        return (self.ex, self.ey, self.ez)

    def is_subgroup(self) -> bool:
        """Closed under the GL3 law exactly when ez <= ex + ey."""
        if self.ez is None:
            return self.ex is None or self.ey is None
        if self.ex is None or self.ey is None:
            return True
        return self.ez <= self.ex + self.ey

    def contains(self, coords: Tuple[int, ...], p: int) -> bool:
        for c, e in zip(coords, self.exponents()):
            if e is None and c != 0:
                return False
            if e is not None and c % p ** e != 0:
                return False
        return True


@dataclass(frozen=True)
class QuotientSpec:
    """
    Model for the finite quotient H1/H_k.

    For GL3, H_k = {n_beta(p^(k-1) a) n_gamma(p^(k-1) b)}; keys are the least
    digit pairs (y, z) modulo p^(k-1). For GL2 the quotient is trivial.
    """
    group: str
    p: int
    k: int

    @property
    def trivial(self) -> bool:
        return self.group == "GL2" or self.k == 1

    @property
    def modulus(self) -> int:
        return 1 if self.trivial else self.p ** (self.k - 1)

    @property
    def c_k(self) -> int:
        """Conjugation exponent: iota(p^c_k) acts trivially on H1/H_k."""
        return 0 if self.trivial else self.k - 1

    @property
    def order(self) -> int:
        return self.modulus ** 2 if self.group == "GL3" else 1

    @property
    def identity(self) -> Tuple[int, ...]:
        return (0, 0) if self.group == "GL3" else ()

    def reps(self) -> List[Tuple[int, ...]]:
        """Canonical representatives J(H1/H_k) in lexicographic order."""
        if self.group != "GL3":
            return [()]
        m = self.modulus
        return [(y, z) for y in range(m) for z in range(m)]

    def canon(self, key: Tuple[int, ...]) -> Tuple[int, ...]:
        if self.group != "GL3":
            return ()
        m = self.modulus
        return (int(key[0]) % m, int(key[1]) % m)

    def mul(self, a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
        """Product in H1/H_k (abelian for the built-in groups)."""
        if self.group != "GL3":
            return ()
        return self.canon((a[0] + b[0], a[1] + b[1]))

    def inv(self, a: Tuple[int, ...]) -> Tuple[int, ...]:
        if self.group != "GL3":
            return ()
        return self.canon((-a[0], -a[1]))

    def conj_iota(self, i: int, key: Tuple[int, ...]) -> Tuple[int, ...]:
        """iota(i)^-1 h iota(i)."""
        if self.group != "GL3":
            return ()
        return self.canon((key[0], key[1] - i * key[0]))

    def key_of(self, g: UnitriangularElt) -> Tuple[int, ...]:
        """Key of an element of H1 (ell(g) = 0)."""
        if self.group != "GL3":
            return ()
        return self.canon((g.coords[1], g.coords[2]))

    def elt_of(self, key: Tuple[int, ...], level: Optional[int] = None) -> UnitriangularElt:
        if self.group != "GL3":
            return UnitriangularElt(2, level, self.p, (0,))
        return UnitriangularElt(3, level, self.p, (0, key[0], key[1]))

    def as_dict(self) -> Dict[str, Any]:
        """Return the quotient description as a dictionary."""
        return {"group": self.group, "k": self.k, "c_k": self.c_k,
                "shape": [self.modulus, self.modulus] if self.group == "GL3" else []}


def split_scalar(p: int, x: Fraction) -> Tuple[int, Fraction]:
    """Return (m, u) with x = p^m u and u a p-adic unit."""
    v, a, b = split_unit(p, x)
    return v, Fraction(a, b)
