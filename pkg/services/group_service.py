"""
Group Service for PhiGamma

This module handles the root-datum combinatorics: root evaluation, the
torus monoid T+ and its pre-order, the group law of N0, the T+ action,
ell and iota, the quotients H1/H_k, coset representatives and the
phi-factorization inside H1.
"""
import logging
from collections import deque
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

# Import configuration
from config.settings import MAX_SATURATION_SIZE

from models.groups import (
    Lattice,
    QuotientSpec,
    Root,
    RootDatum,
    TorusElt,
    UnitriangularElt,
)
from models.padic import PadicScalar
from utils.arith import reduce_mod, valuation
from utils.caching import memoized
from utils.errors import LevelOverflow, NotInTPlus

# Set up logging
logger = logging.getLogger(__name__)


def root_datum(n: int) -> RootDatum:
    """
    Build the GL_n root datum.

    Args:
        n (int): Rank, at least 2

    Returns:
        RootDatum: Positive roots, simple roots, xi exponents and degrees
    """
    return RootDatum(n)


def datum_for(group: str) -> RootDatum:
    """Root datum named "GL2", "GL3", ..."""
    return RootDatum(int(group.upper().removeprefix("GL")))


def root_eval(root: Root, t: TorusElt, prec: int = 8) -> Tuple[PadicScalar, int]:
    """
    Evaluate a root on a torus element.

    Args:
        root (Root): Positive root (i, j)
        t (TorusElt): Torus element
        prec (int, optional): Relative precision of the returned scalar

    Returns:
        Tuple[PadicScalar, int]: beta(t) and m(beta, t)
    """
    value = t.root_value(root)
    return PadicScalar.from_value(t.p, value, prec), t.m(root)


def s_element(datum: RootDatum, p: int) -> TorusElt:
    """s = xi(p)."""
    return TorusElt.from_valuations(p, datum.xi_exponents)


def xi(datum: RootDatum, a: Fraction, p: int) -> TorusElt:
    """xi(a) = diag(a^(n-1), ..., a, 1)."""
    return TorusElt(p, tuple(Fraction(a) ** e for e in datum.xi_exponents))


def in_tplus(datum: RootDatum, t: TorusElt) -> bool:
    return all(t.m(a) >= 0 for a in datum.simple)


def leq_alpha(datum: RootDatum, t1: TorusElt, t2: TorusElt) -> bool:
    """t1 <=_alpha t2 iff m(beta, t2/t1) >= m(alpha, t2/t1) >= 0 for all beta."""
    u = t2 * t1.inverse()
    m_alpha = u.m(datum.alpha)
    return m_alpha >= 0 and all(u.m(b) >= m_alpha for b in datum.positive)


def s_bar(datum: RootDatum, p: int) -> TorusElt:
    """
    The element s_alpha-bar: m(alpha, .) = 0 and m(beta, .) >= 1 otherwise.

    Normalized with first two entries 1, so GL3 gives diag(1, 1, p^-1).
    """
    vals = [0, 0] + [-(k - 1) for k in range(2, datum.n)]
    return TorusElt.from_valuations(p, vals)


def upper_bound(datum: RootDatum, t1: TorusElt, t2: TorusElt) -> TorusElt:
    """
    Common upper bound of two T+ elements under <=_alpha.

    Returns t1 * s_bar^k (after ordering the arguments so that
    m(alpha, t1) >= m(alpha, t2)) for the smallest k that dominates both.
    """
    for t in (t1, t2):
        if not in_tplus(datum, t):
            raise NotInTPlus(f"{t.diag} is not in T+")
    if t1.m(datum.alpha) < t2.m(datum.alpha):
        t1, t2 = t2, t1
    sb = s_bar(datum, t1.p)
    k = 0
    while True:
        candidate = t1 * sb ** k
        if leq_alpha(datum, t1, candidate) and leq_alpha(datum, t2, candidate):
            logger.debug(f"upper bound found at k={k}")
            return candidate
        k += 1


def tplus_order(query: str, datum: RootDatum, *args) -> Union[bool, TorusElt]:
    """
    Dispatch a T+ query.

    Args:
        query (str): One of "in_Tplus", "leq_alpha", "s_bar", "upper_bound"
        datum (RootDatum): Active root datum
        *args: Torus elements (or the prime for "s_bar")

    Returns:
        bool or TorusElt
    """
    if query == "in_Tplus":
        return in_tplus(datum, *args)
    if query == "leq_alpha":
        return leq_alpha(datum, *args)
    if query == "s_bar":
        return s_bar(datum, *args)
    if query == "upper_bound":
        return upper_bound(datum, *args)
    raise ValueError(f"Unknown T+ query: {query}")


def tplus_equivalent(datum: RootDatum, t1: TorusElt, t2: TorusElt) -> Dict[str, bool]:
    """Decide t1 <=_alpha t2 <=_alpha t1 and whether t2 t1^-1 has all root valuations 0."""
    both = leq_alpha(datum, t1, t2) and leq_alpha(datum, t2, t1)
    u = t2 * t1.inverse()
    return {"equivalent": both, "in_T0": all(u.m(b) == 0 for b in datum.positive)}


def grp_arith(op: str, g: UnitriangularElt, h: Optional[UnitriangularElt] = None) -> UnitriangularElt:
    """
    Group law of N0 modulo p^L.

    Args:
        op (str): "mul" or "inv"
        g (UnitriangularElt): First element
        h (UnitriangularElt, optional): Second element for "mul"

    Returns:
        UnitriangularElt: The product or inverse
    """
    if op == "mul":
        if g.level != h.level:
            raise ValueError(f"levels differ: {g.level} and {h.level}")
        return g * h
    if op == "inv":
        return g.inverse()
    raise ValueError(f"Unknown group operation: {op}")


def n_root(datum: RootDatum, root: Root, value: int, p: int,
           level: Optional[int] = None) -> UnitriangularElt:
    """Root-subgroup element n_beta(value)."""
    return UnitriangularElt.from_entries(datum.n, level, p, {root: value})


def phi_t_group(t: TorusElt, g: UnitriangularElt) -> UnitriangularElt:
    """
    Conjugation t g t^-1: coordinates x_beta scale by beta(t).

    Args:
        t (TorusElt): Torus element
        g (UnitriangularElt): Group element

    Returns:
        UnitriangularElt: The transported element
    """
    scaled = {}
    for root, c in g.entries.items():
        value = t.root_value(root) * c
        if c and valuation(g.p, value) < 0:
            raise LevelOverflow(f"coordinate {c} on {root} leaves Z_p under {t.diag}")
        if g.level is None:
            if value.denominator != 1:
                raise LevelOverflow(f"coordinate {value} on {root} is not an integer")
            scaled[root] = int(value)
        else:
            scaled[root] = int(reduce_mod(g.p, value, g.level)) if c else 0
    return UnitriangularElt.from_entries(g.n, g.level, g.p, scaled)


def ell(g: UnitriangularElt) -> int:
    """ell(g) = the alpha coordinate."""
    return g.coords[0]


def iota(x: int, n: int, p: int, level: Optional[int] = None) -> UnitriangularElt:
    """iota(x) = n_alpha(x)."""
    return UnitriangularElt.from_entries(n, level, p, {(0, 1): x})


def ell_and_iota(direction: str, value, n: int = 3, p: int = 3,
                 level: Optional[int] = None) -> Union[int, UnitriangularElt]:
    """
    Apply ell to a group element or iota to a coordinate.

    Args:
        direction (str): "ell" or "iota"
        value: Group element for "ell", integer for "iota"

    Returns:
        int or UnitriangularElt
    """
    if direction == "ell":
        return ell(value)
    if direction == "iota":
        return iota(value, n, p, level)
    raise ValueError(f"Unknown direction: {direction}")


def decompose_iota(g: UnitriangularElt) -> Tuple[int, UnitriangularElt]:
    """Write g = iota(i) h with h in H1 = ker(ell)."""
    i = ell(g)
    h = iota(i, g.n, g.p, g.level).inverse() * g
    return i, h


@memoized("quotient_spec")
def quotient_spec(group: str, p: int, k: int) -> QuotientSpec:
    """
    Describe H1/H_k.

    Args:
        group (str): "GL2" or "GL3"
        p (int): Prime
        k (int): Level, at least 1

    Returns:
        QuotientSpec: The quotient with its canonical representatives
    """
    if k < 1:
        raise ValueError(f"level must be >= 1, got {k}")
    if group not in ("GL2", "GL3"):
        raise ValueError(f"quotients are built in for GL2 and GL3 only, got {group}")
    return QuotientSpec(group, p, k)


def h1_generators(datum: RootDatum, p: int, level: int) -> List[UnitriangularElt]:
    """Topological generators of H1: root elements off alpha."""
    return [n_root(datum, r, 1, p, level) for r in datum.positive if r != datum.alpha]


def n0_generators(datum: RootDatum, p: int, level: int) -> List[UnitriangularElt]:
    return [n_root(datum, r, 1, p, level) for r in datum.positive]


@memoized("normal_closure")
def normal_closure(n: int, p: int, level: int, generators: Tuple[Tuple[int, ...], ...]) -> FrozenSet[Tuple[int, ...]]:
    """
    Normal closure in N0 mod p^level of the subgroup generated by the given coordinates.

    Saturates under multiplication and conjugation by the root generators.
    """
    datum = RootDatum(n)
    gens = [UnitriangularElt(n, level, p, c) for c in generators]
    conj = n0_generators(datum, p, level)
    conj += [c.inverse() for c in conj]

    found = {UnitriangularElt.identity(n, level, p).coords}
    frontier = deque(found)
    while frontier:
        g = UnitriangularElt(n, level, p, frontier.popleft())
        candidates = [g * s for s in gens]
        candidates += [c * g * c.inverse() for c in conj]
        for h in candidates:
            if h.coords not in found:
                found.add(h.coords)
                frontier.append(h.coords)
                if len(found) > MAX_SATURATION_SIZE:
                    raise LevelOverflow(f"saturation exceeded {MAX_SATURATION_SIZE} elements")
    logger.debug(f"normal closure of {len(generators)} generators has {len(found)} elements")
    return frozenset(found)


def h_k_by_saturation(group: str, p: int, k: int, level: int) -> FrozenSet[Tuple[int, ...]]:
    """H_k mod p^level as the normal closure of phi^(k-1)(H1)."""
    datum = datum_for(group)
    s = s_element(datum, p)
    gens = []
    for g in h1_generators(datum, p, level):
        for _ in range(k - 1):
            g = phi_t_group(s, g)
        gens.append(g.coords)
    return normal_closure(datum.n, p, level, tuple(gens))


def h_k_closed_form(group: str, p: int, k: int, level: int) -> FrozenSet[Tuple[int, ...]]:
    """H_k mod p^level from the closed form."""
    if group == "GL2":
        return frozenset({(0,)})
    step = p ** (k - 1)
    mod = p ** level
    return frozenset((0, a * step % mod, b * step % mod)
                     for a in range(max(1, mod // step)) for b in range(max(1, mod // step)))


def phi_lattice(t: TorusElt, datum: RootDatum) -> Lattice:
    """The lattice phi_t(N0) for the built-in groups."""
    if datum.n == 2:
        return Lattice(t.m((0, 1)))
    return Lattice(t.m((0, 1)), t.m((1, 2)), t.m((0, 2)))


def _pad(g: UnitriangularElt) -> Tuple[int, int, int]:
    return tuple(g.coords) + (0,) * (3 - len(g.coords))


def left_coset_rep(g: UnitriangularElt, sub: Lattice) -> UnitriangularElt:
    """Canonical n with g in n * sub."""
    p = g.p
    x, y, z = _pad(g)
    a = x % p ** sub.ex if sub.ex is not None else x
    b = y % p ** sub.ey if sub.ey is not None else y
    c = z - a * (y - b)
    c = c % p ** sub.ez if sub.ez is not None else c
    return UnitriangularElt(g.n, g.level, p, (a, b, c)[:len(g.coords)])


def right_coset_rep(g: UnitriangularElt, sub: Lattice) -> UnitriangularElt:
    """Canonical n with g in sub * n."""
    p = g.p
    x, y, z = _pad(g)
    a = x % p ** sub.ex if sub.ex is not None else x
    b = y % p ** sub.ey if sub.ey is not None else y
    c = z - b * (x - a)
    c = c % p ** sub.ez if sub.ez is not None else c
    return UnitriangularElt(g.n, g.level, p, (a, b, c)[:len(g.coords)])


def coset_reps(ambient: Lattice, sub: Lattice, n: int, p: int,
               level: Optional[int] = None) -> List[UnitriangularElt]:
    """
    Canonical digit representatives of ambient/sub (left and right cosets share them).

    Args:
        ambient (Lattice): Containing lattice
        sub (Lattice): Finite-index sublattice
        n (int): 2 or 3
        p (int): Prime
        level (int, optional): Level of the returned elements

    Returns:
        List[UnitriangularElt]: Representatives in lexicographic order
    """
    ranges = []
    for a_exp, s_exp in list(zip(ambient.exponents(), sub.exponents()))[:n * (n - 1) // 2]:
        if s_exp is None:
            if a_exp is not None:
                raise ValueError("sublattice of infinite index")
            ranges.append([0])
        elif a_exp is None:
            ranges.append([0])
        else:
            ranges.append([d * p ** a_exp for d in range(p ** (s_exp - a_exp))])
    return [UnitriangularElt(n, level, p, c) for c in product(*ranges)]


def factor_phi(spec: QuotientSpec, h: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    Write h = phi(u) v in H1/H_k with v the canonical representative of phi(H1)\\H1.

    Args:
        spec (QuotientSpec): Level-k quotient
        h (Tuple[int, ...]): Key of h

    Returns:
        Tuple: (u, v) as least-digit keys
    """
    if spec.trivial:
        return spec.identity, spec.canon(h)
    y, z = spec.canon(h)
    p = spec.p
    v = (y % p, z % p ** 2)
    u = ((y - v[0]) // p, (z - v[1]) // p ** 2)
    return u, v


def phi_key(spec: QuotientSpec, key: Tuple[int, ...], target: QuotientSpec) -> Tuple[int, ...]:
    """phi on keys from H1/H_k to H1/H_target."""
    if target.trivial:
        return target.identity
    return target.canon((spec.p * key[0], spec.p ** 2 * key[1]))


def phi_t_key(t: TorusElt, key: Tuple[int, ...], target: QuotientSpec) -> Tuple[int, ...]:
    """t h t^-1 on keys."""
    if target.trivial:
        return target.identity
    y = t.root_value((1, 2)) * key[0]
    z = t.root_value((0, 2)) * key[1]
    if y.denominator % t.p == 0 or z.denominator % t.p == 0:
        raise LevelOverflow(f"{t.diag} does not preserve H1")
    mod = target.modulus
    return target.canon((int(reduce_mod(t.p, y, target.k)) % mod,
                         int(reduce_mod(t.p, z, target.k)) % mod))


def reduce_key(key: Tuple[int, ...], target: QuotientSpec) -> Tuple[int, ...]:
    return target.canon(key)


def all_keys(spec: QuotientSpec) -> Iterable[Tuple[int, ...]]:
    return spec.reps()
