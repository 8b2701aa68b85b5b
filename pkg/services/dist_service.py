"""
Distribution Algebra Service for PhiGamma

This module handles truncated distribution algebras of the uniform lattice
N0': conversion between the group-algebra vector and ordered b-monomials,
exact multiplication, the T+ transport phi_t and the decomposition over
cosets of phi_t(N0').
"""
import logging
from collections import defaultdict
from fractions import Fraction
from itertools import product
from typing import Dict, Optional, Tuple

import numpy as np

from models.dist import Coords, DistElt, Exps, group_law
from models.groups import RootDatum, TorusElt
from services.group_service import datum_for, in_tplus
from utils.arith import binomial_int, reduce_mod, valuation
from utils.caching import memoized
from utils.errors import CertificationFailed, LevelOverflow, MicrolocalReorderUnsupported

# Set up logging
logger = logging.getLogger(__name__)

# Roots attached to the coordinates (x, y, z) and to the exponents (i, j, k)
COORD_ROOTS = {"GL2": ((0, 1),), "GL3": ((0, 1), (1, 2), (0, 2))}
EXP_ROOTS = {"GL2": ((0, 1),), "GL3": ((0, 2), (1, 2), (0, 1))}


def certified_degree(p: int, level: int, prec: int) -> int:
    """
    Largest per-variable degree whose monomial coordinates are determined
    modulo p^prec by the group algebra at the given level.
    """
    if level < prec:
        return 0
    return p ** (level - prec + 1) - 1


def _rank_mod_p(matrix: np.ndarray, p: int) -> int:
    m = matrix.copy() % p
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, col] % p), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        m[rank] = (m[rank] * pow(int(m[rank, col]), -1, p)) % p
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] = (m[r] - m[r, col] * m[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


@memoized("rank_check")
def rank_check(p: int, level: int, degree: int, prec: int) -> Dict[str, object]:
    """
    Certify that monomials of degree <= ``degree`` are faithful at (level, prec).

    Checks that the images of b^0 .. b^degree in Z/p^prec[Z/p^level] have full
    rank modulo p, and that the relation b^(p^L) = -sum_a C(p^L, a) b^a leaves
    no coefficient of degree <= ``degree`` alive modulo p^prec.

    Returns:
        Dict: {"ok", "rank", "pollution_free"}
    """
    order = p ** level
    if degree >= order:
        return {"ok": False, "rank": order, "pollution_free": False}
    rows = np.zeros((degree + 1, order), dtype=object)
    for i in range(degree + 1):
        for a in range(i + 1):
            rows[i, a] = binomial_int(i, a) * (-1) ** (i - a)
    rank = _rank_mod_p(rows, p)
    pollution_free = all(binomial_int(order, a) % p ** prec == 0 for a in range(1, degree + 1))
    ok = rank == degree + 1 and pollution_free
    logger.debug(f"rank check p={p} L={level} M={degree} N={prec}: rank {rank}, clean {pollution_free}")
    return {"ok": ok, "rank": rank, "pollution_free": pollution_free}


def _mahler(group: str, g: Coords, degree: int) -> Dict[Exps, int]:
    """Ordered-monomial coordinates of a group element: prod C(x_beta, k_beta)."""
    if group == "GL3":
        x, y, z = g
        return {
            (i, j, k): binomial_int(z, i) * binomial_int(y, j) * binomial_int(x, k)
            for i in range(min(z, degree) + 1)
            for j in range(min(y, degree) + 1)
            for k in range(min(x, degree) + 1)
        }
    (x,) = g
    return {(k,): binomial_int(x, k) for k in range(min(x, degree) + 1)}


def _expand_monomial(group: str, k: Exps) -> Dict[Coords, int]:
    """Group-algebra vector of an ordered monomial with non-negative exponents."""
    out: Dict[Coords, int] = defaultdict(int)
    ranges = [range(e + 1) for e in k]
    for a in product(*ranges):
        sign = (-1) ** sum(e - b for e, b in zip(k, a))
        coeff = sign
        for e, b in zip(k, a):
            coeff *= binomial_int(e, b)
        coords = (a[2], a[1], a[0]) if group == "GL3" else a
        out[coords] += coeff
    return out


def dist_convert(x: DistElt, direction: str, degree: Optional[int] = None,
                 moduli: Optional[Tuple[int, ...]] = None) -> DistElt:
    """
    Materialize the other representation.

    Args:
        x (DistElt): Element
        direction (str): "to_monomial" or "to_group"
        degree (int, optional): Requested monomial window (default: certified degree)
        moduli (Tuple, optional): Target moduli for "to_group" (default: x.moduli)

    Returns:
        DistElt: x with both representations

    Raises:
        CertificationFailed: The rank check at (L, M, N) fails or the monomials
            leave the certified window
    """
    if direction == "to_monomial":
        if x.vector is None:
            raise CertificationFailed("element has no group-algebra vector")
        certified = certified_degree(x.p, x.level, x.prec)
        window = certified if degree is None else degree
        if window > certified or not rank_check(x.p, x.level, window, x.prec)["ok"]:
            raise CertificationFailed(
                f"degree {window} is not certified at level {x.level}, precision {x.prec}"
            )
        coeffs: Dict[Exps, Fraction] = defaultdict(Fraction)
        for g, c in x.vector:
            for k, b in _mahler(x.group, g, window).items():
                if b:
                    coeffs[k] += c * b
        return x.with_monomials(coeffs, window)

    if direction == "to_group":
        if x.monomials is None:
            raise CertificationFailed("element has no monomial coordinates")
        if x.denominator:
            raise CertificationFailed("negative powers of b_alpha have no group-algebra image")
        moduli = moduli or x.moduli
        if moduli is None:
            raise CertificationFailed("a target level is needed for the group-algebra image")
        top = max([0] + [max(k) for k, _ in x.monomials])
        if top > certified_degree(x.p, min(moduli), x.prec):
            raise CertificationFailed(f"monomial degree {top} exceeds the certified window")
        vector: Dict[Coords, Fraction] = defaultdict(Fraction)
        for k, c in x.monomials:
            for g, b in _expand_monomial(x.group, k).items():
                vector[g] += c * b
        return x.with_vector(tuple(moduli), vector)

    raise ValueError(f"Unknown conversion direction: {direction}")


@memoized("reorder")
def reorder_alpha_beta(p: int, k: int, j: int) -> Dict[Exps, int]:
    """
    Ordered form of b_alpha^k b_beta^j in N0'.

    Uses n_alpha^a n_beta^b = n_beta^b n_alpha^a n_gamma^(p a b).
    """
    out: Dict[Exps, int] = defaultdict(int)
    for a in range(k + 1):
        for b in range(j + 1):
            sign = (-1) ** (k - a + j - b) * binomial_int(k, a) * binomial_int(j, b)
            e = p * a * b
            for i in range(e + 1):
                for jj in range(b + 1):
                    for kk in range(a + 1):
                        out[(i, jj, kk)] += (sign * binomial_int(e, i) * binomial_int(b, jj)
                                             * binomial_int(a, kk))
    return {key: c for key, c in out.items() if c}


def _monomial_product(group: str, p: int, k1: Exps, k2: Exps) -> Dict[Exps, int]:
    if group != "GL3":
        return {(k1[0] + k2[0],): 1}
    i1, j1, a1 = k1
    i2, j2, a2 = k2
    if j2 == 0 or a1 == 0:
        return {(i1 + i2, j1 + j2, a1 + a2): 1}
    if a1 < 0:
        raise MicrolocalReorderUnsupported(
            f"b_alpha^{a1} cannot be moved past b_beta^{j2} in a truncated window"
        )
    out: Dict[Exps, int] = defaultdict(int)
    for (i, j, a), c in reorder_alpha_beta(p, a1, j2).items():
        out[(i1 + i2 + i, j1 + j, a + a2)] += c
    return out


def dist_mul(x: DistElt, y: DistElt) -> DistElt:
    """
    Product in D(N0').

    Group-algebra vectors are convolved at their common moduli; monomial-only
    elements are multiplied in ordered form.

    Raises:
        LevelOverflow: The two vectors live at different levels
        MicrolocalReorderUnsupported: A negative b_alpha power meets b_beta
    """
    if x.group != y.group or x.p != y.p:
        raise ValueError("distributions over different groups")
    prec = min(x.prec, y.prec)
    if x.vector is not None and y.vector is not None:
        if x.moduli != y.moduli:
            raise LevelOverflow(f"levels differ: {x.moduli} vs {y.moduli}")
        out: Dict[Coords, Fraction] = defaultdict(Fraction)
        for g, a in x.vector:
            for h, b in y.vector:
                out[group_law(x.group, x.p, g, h)] += a * b
        return DistElt.from_vector(x.group, x.p, prec, x.moduli, out)
    if x.monomials is None or y.monomials is None:
        raise CertificationFailed("operands share no representation")
    coeffs: Dict[Exps, Fraction] = defaultdict(Fraction)
    for k1, a in x.monomials:
        for k2, b in y.monomials:
            for k, c in _monomial_product(x.group, x.p, k1, k2).items():
                coeffs[k] += a * b * c
    degrees = [d for d in (x.degree, y.degree) if d is not None]
    return DistElt.from_monomials(x.group, x.p, prec, coeffs, min(degrees) if degrees else None)


def root_scalars(t: TorusElt, group: str) -> Tuple[Fraction, ...]:
    """beta(t) for the coordinate roots (alpha, beta, gamma)."""
    return tuple(t.root_value(r) for r in COORD_ROOTS[group])


def _scale(p: int, value: int, factor: Fraction, exponent: int) -> int:
    scaled = factor * value
    if scaled.denominator % p == 0:
        raise LevelOverflow(f"coordinate {value} scaled by {factor} leaves N0'")
    return int(reduce_mod(p, scaled, exponent)) % p ** exponent if exponent > 0 else 0


def _check_tplus(t: TorusElt, group: str) -> RootDatum:
    datum = datum_for(group)
    if not in_tplus(datum, t):
        raise LevelOverflow(f"{t.diag} is not in T+")
    return datum


def _power_minus_one(n: int) -> Dict[int, int]:
    """(1+b)^n - 1 as a coefficient map."""
    return {i: binomial_int(n, i) for i in range(1, n + 1)}


def dist_phi_t(t: TorusElt, x: DistElt, target_moduli: Optional[Tuple[int, ...]] = None) -> DistElt:
    """
    Transport by phi_t: n_beta(v) -> n_beta(beta(t) v), b_beta -> (1+b_beta)^beta(t) - 1.

    Args:
        t (TorusElt): Element of T+
        x (DistElt): Element with a vector, or monomials with integral beta(t)
        target_moduli (Tuple, optional): Moduli of the image (default x.moduli)

    Returns:
        DistElt: The image

    Raises:
        LevelOverflow: t is not in T+ or the image is not representable
    """
    _check_tplus(t, x.group)
    scalars = root_scalars(t, x.group)
    if x.vector is not None:
        target = tuple(target_moduli or x.moduli)
        for src, dst, f in zip(x.moduli, target, scalars):
            if src + valuation(x.p, f) < dst:
                raise LevelOverflow(f"image of modulus p^{src} is not defined modulo p^{dst}")
        out: Dict[Coords, Fraction] = defaultdict(Fraction)
        for g, c in x.vector:
            out[tuple(_scale(x.p, a, f, e) for a, f, e in zip(g, scalars, target))] += c
        return DistElt.from_vector(x.group, x.p, x.prec, target, out)

    by_exponent = dict(zip(COORD_ROOTS[x.group], scalars))
    factors = [by_exponent[r] for r in EXP_ROOTS[x.group]]
    if any(f.denominator != 1 for f in factors):
        raise CertificationFailed("monomial transport needs integral beta(t)")
    factors = [int(f) for f in factors]
    if x.denominator and factors[-1] != 1:
        raise CertificationFailed("b_alpha^-1 has no polynomial image under this phi_t")
    coeffs: Dict[Exps, Fraction] = defaultdict(Fraction)
    for k, c in x.monomials:
        partial: Dict[Exps, Fraction] = {(): c}
        for e, n in zip(k, factors):
            step = _power_minus_one(n)
            power = _poly_power(step, e) if e >= 0 else {e: 1}
            partial = {key + (d,): a * b for key, a in partial.items() for d, b in power.items()}
        for key, a in partial.items():
            coeffs[key] += a
    return DistElt.from_monomials(x.group, x.p, x.prec, coeffs, x.degree)


def _poly_power(poly: Dict[int, int], e: int) -> Dict[int, int]:
    out = {0: 1}
    for _ in range(e):
        step: Dict[int, int] = defaultdict(int)
        for a, c in out.items():
            for b, d in poly.items():
                step[a + b] += c * d
        out = dict(step)
    return out


def coset_moduli(t: TorusElt, group: str, moduli: Tuple[int, ...]) -> Tuple[int, ...]:
    """Moduli of phi_t^-1(N_L) on each coordinate."""
    scalars = root_scalars(t, group)
    return tuple(max(0, e - valuation(t.p, f)) for e, f in zip(moduli, scalars))


def dist_coset_decompose(x: DistElt, t: TorusElt) -> Dict[Coords, DistElt]:
    """
    Components x_n with x = sum_n n * phi_t(x_n) over n in J(N0'/phi_t(N0')).

    Args:
        x (DistElt): Element with a group-algebra vector
        t (TorusElt): Element of T+

    Returns:
        Dict: Map coset representative -> component

    Raises:
        CertificationFailed: x has no vector
    """
    if x.vector is None:
        raise CertificationFailed("coset decomposition needs the group-algebra vector")
    _check_tplus(t, x.group)
    p = x.p
    scalars = root_scalars(t, x.group)
    ms = [valuation(p, f) for f in scalars]
    sub_moduli = coset_moduli(t, x.group, x.moduli)
    collected: Dict[Coords, Dict[Coords, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
    for g, c in x.vector:
        if x.group == "GL3":
            gx, gy, gz = g
            a = gx % p ** min(ms[0], x.moduli[0])
            b = gy % p ** min(ms[1], x.moduli[1])
            rest = gz - p * a * (gy - b)
            cz = rest % p ** min(ms[2], x.moduli[2])
            n = (a, b, cz)
            diffs = (gx - a, gy - b, rest - cz)
        else:
            a = g[0] % p ** min(ms[0], x.moduli[0])
            n = (a,)
            diffs = (g[0] - a,)
        h = tuple(
            int(reduce_mod(p, Fraction(d) / f, e)) % p ** e if e > 0 else 0
            for d, f, e in zip(diffs, scalars, sub_moduli)
        )
        collected[n][h] += c
    return {
        n: DistElt.from_vector(x.group, p, x.prec, sub_moduli, comp)
        for n, comp in sorted(collected.items())
    }


def dist_coset_recombine(components: Dict[Coords, DistElt], t: TorusElt,
                         moduli: Tuple[int, ...]) -> DistElt:
    """sum_n n * phi_t(x_n) at the given moduli."""
    group = next(iter(components.values())).group
    p = next(iter(components.values())).p
    prec = min(c.prec for c in components.values())
    total: Dict[Coords, Fraction] = defaultdict(Fraction)
    for n, comp in components.items():
        image = dist_phi_t(t, comp, target_moduli=moduli)
        for g, c in image.vector:
            total[group_law(group, p, n, g)] += c
    return DistElt.from_vector(group, p, prec, moduli, total)


def group_element(group: str, p: int, prec: int, level: int, g: Coords) -> DistElt:
    """The Dirac distribution at g."""
    return DistElt.at_level(group, p, prec, level, {tuple(g): 1})


def group_matrix(group: str, p: int, g: Coords) -> np.ndarray:
    """Unitriangular matrix of an N0' element (beta entry scaled by p)."""
    if group == "GL3":
        x, y, z = g
        return np.array([[1, x, z], [0, 1, p * y], [0, 0, 1]], dtype=object)
    return np.array([[1, g[0]], [0, 1]], dtype=object)


def coords_of_matrix(group: str, p: int, m: np.ndarray) -> Coords:
    if group == "GL3":
        return (int(m[0, 1]), int(m[1, 2]) // p, int(m[0, 2]))
    return (int(m[0, 1]),)
