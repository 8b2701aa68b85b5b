"""
Skew Ring Service for PhiGamma

This module handles the finite levels R[H1/H_k, ell, iota] of the completed
skew group ring: the twisted multiplication, phi and the T+ action, the
embedding chi_k, level reduction and the ideals I_k, the group-level etale
decomposition and the change of splitting iota -> iota'.
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Tuple

from models.groups import QuotientSpec, TorusElt, UnitriangularElt
from models.series import Certificate, LaurentSeries
from models.skew import Key, SkewElt, min_prec
from services.group_service import factor_phi, phi_key, phi_t_key
from services.series_service import (
    chi_series,
    etale_decompose,
    frobenius_series,
    template_prec,
    tplus_act_series,
)
from utils.arith import binomial_int
from utils.errors import DepthTooShallow, LevelTooSmall, NotAUnit

# Set up logging
logger = logging.getLogger(__name__)

ComponentKey = Tuple[Key, int]


def min_decomposition_level(group: str) -> int:
    """Smallest k with H_k inside phi(H1) (k0)."""
    return 3 if group == "GL3" else 1


def skew_one(group: str, p: int, level: int, prec: int,
             cert: Optional[Certificate] = None) -> SkewElt:
    """The unit element 1 * 1."""
    spec = QuotientSpec(group, p, level)
    return SkewElt.monomial(group, p, level, spec.identity, LaurentSeries.constant(p, 1, prec, cert))


def skew_scalar(series: LaurentSeries, group: str, level: int) -> SkewElt:
    """The element r * 1."""
    spec = QuotientSpec(group, series.p, level)
    return SkewElt.monomial(group, series.p, level, spec.identity, series)


def group_minus_one(group: str, p: int, level: int, key: Key, prec: int,
                    cert: Optional[Certificate] = None) -> SkewElt:
    """h - 1 for h in H1/H_k."""
    spec = QuotientSpec(group, p, level)
    one = LaurentSeries.constant(p, 1, prec, cert)
    return SkewElt.build(group, p, level, [(key, one), (spec.identity, -one)])


def skew_mul(x: SkewElt, y: SkewElt, depth: Optional[int] = None, rep_shift: int = 0) -> SkewElt:
    """
    Twisted product in R[H1/H_k, ell, iota].

    Each coefficient r2 of y is expanded as sum_i (1+T)^i phi^d(r_{i,2}) and
    (r1 h1)(r2 h2) = sum_i r1 (1+T)^i phi^d(r_{i,2}) (iota(i)^-1 h1 iota(i)) h2.

    Args:
        x (SkewElt): Left factor
        y (SkewElt): Right factor
        depth (int, optional): Expansion depth d, at least c_k (default c_k)
        rep_shift (int, optional): Use representatives i + p^d * rep_shift

    Returns:
        SkewElt: The product
    """
    x._check(y)
    spec = x.spec
    d = spec.c_k if depth is None else depth
    if d < spec.c_k:
        raise DepthTooShallow(f"expansion depth {d} below c_k = {spec.c_k}")
    p = x.p
    q = p ** d
    out: List[Tuple[Key, LaurentSeries]] = []
    for h2, r2 in y.body:
        for i, ri in enumerate(etale_decompose(r2, d)):
            if ri.is_zero:
                continue
            rep = i + q * rep_shift
            if rep_shift:
                ri = chi_series(p, -rep_shift, template_prec(ri), width=ri.hi) * ri
            twisted = chi_series(p, rep, template_prec(ri)) * frobenius_series(ri, d)
            for h1, r1 in x.body:
                key = spec.mul(spec.conj_iota(rep, h1), h2)
                out.append((key, r1 * twisted))
    return SkewElt.build(x.group, p, x.level, out, x.product_prec(y))


def skew_product(factors: Iterable[SkewElt]) -> SkewElt:
    """Left-to-right product of a non-empty sequence."""
    factors = list(factors)
    result = factors[0]
    for f in factors[1:]:
        result = skew_mul(result, f)
    return result


def _target_spec(x: SkewElt, target_level: Optional[int]) -> QuotientSpec:
    return QuotientSpec(x.group, x.p, x.level if target_level is None else target_level)


def skew_phi(x: SkewElt, target_level: Optional[int] = None) -> SkewElt:
    """
    phi(sum r_h h) = sum phi(r_h) phi(h).

    Args:
        x (SkewElt): Element at level k
        target_level (int, optional): Level of the image, at most k + 1

    Returns:
        SkewElt: The image
    """
    target = _target_spec(x, target_level)
    if target.k > x.level + 1:
        raise LevelTooSmall(f"phi maps level {x.level} at most to level {x.level + 1}")
    spec = x.spec
    terms = [(phi_key(spec, h, target), frobenius_series(r, 1)) for h, r in x.body]
    return SkewElt.build(x.group, x.p, target.k, terms, x.prec)


def skew_phi_t(t: TorusElt, x: SkewElt, target_level: Optional[int] = None) -> SkewElt:
    """
    phi_t for t in T+: gamma_u phi^m on coefficients, t h t^-1 on keys.

    Args:
        t (TorusElt): Torus element
        x (SkewElt): Element
        target_level (int, optional): Level of the image

    Returns:
        SkewElt: The image
    """
    target = _target_spec(x, target_level)
    terms = [(phi_t_key(t, h, target), tplus_act_series(t, r)) for h, r in x.body]
    return SkewElt.build(x.group, x.p, target.k, terms, x.prec)


def chi_k_embed(g: UnitriangularElt, group: str, level: int, prec: int,
                cert: Optional[Certificate] = None) -> SkewElt:
    """
    chi_k(iota(i) h) = (1+T)^i at key h H_k.

    Leveled coordinates use the least non-negative residue of ell(g).

    Args:
        g (UnitriangularElt): Element of N0
        group (str): "GL2" or "GL3"
        level (int): Level k
        prec (int): Coefficient precision

    Returns:
        SkewElt: Single-term element
    """
    p = g.p
    x = g.coords[0]
    spec = QuotientSpec(group, p, level)
    if group == "GL3":
        _, y, z = g.coords
        key = (y, z - x * y)
    else:
        key = ()
    return SkewElt.monomial(group, p, level, spec.canon(key), chi_series(p, x, prec, cert))


def reduce_level(x: SkewElt, k: int) -> SkewElt:
    """
    Image under H1/H_l -> H1/H_k (coefficients summed over fibers).

    Args:
        x (SkewElt): Element at level l
        k (int): Target level, at most l

    Returns:
        SkewElt: The reduced element
    """
    if k > x.level:
        raise ValueError(f"cannot reduce level {x.level} to {k}")
    target = QuotientSpec(x.group, x.p, k)
    return SkewElt.build(x.group, x.p, k, [(target.canon(h), r) for h, r in x.body], x.prec)


def ideal_member(x: SkewElt, k: int) -> bool:
    """True iff x lies in I_k (vanishes at level k)."""
    return reduce_level(x, k).is_zero


def component_level(x: SkewElt) -> int:
    return max(1, x.level - 1)


def skew_etale_decompose(x: SkewElt) -> Dict[ComponentKey, SkewElt]:
    """
    Components y_(v, i) with x = sum phi(y_(v, i)) chi_k(v iota(i)).

    v runs over the least-digit representatives of phi(H1)\\H1 and i over
    0..p-1. Components live one level down with least-digit keys u; they are
    unique as canonical representatives modulo the kernel of phi.

    Args:
        x (SkewElt): Element at level k >= k0

    Returns:
        Dict: Map (v, i) -> component
    """
    k0 = min_decomposition_level(x.group)
    if x.level < k0:
        raise LevelTooSmall(f"decomposition needs level >= {k0}, got {x.level}")
    spec = x.spec
    lower = QuotientSpec(x.group, x.p, component_level(x))
    collected: Dict[ComponentKey, List[Tuple[Key, LaurentSeries]]] = defaultdict(list)
    for h, r in x.body:
        for i, ri in enumerate(etale_decompose(r, 1)):
            if ri.is_zero:
                continue
            conjugated = spec.conj_iota(-i, h)
            u, v = factor_phi(spec, conjugated)
            collected[(v, i)].append((lower.canon(u), ri))
    return {
        w: SkewElt.build(x.group, x.p, lower.k, terms, x.prec)
        for w, terms in sorted(collected.items())
    }


def skew_etale_recombine(components: Dict[ComponentKey, SkewElt], group: str, p: int,
                         level: int) -> SkewElt:
    """sum_(v, i) phi(y_(v, i)) * chi_k(v iota(i))."""
    spec = QuotientSpec(group, p, level)
    total = SkewElt.zero(group, p, level, min_prec(*(y.prec for y in components.values())))
    for (v, i), y in components.items():
        if y.is_zero:
            continue
        lifted = skew_phi(y, target_level=level)
        prec = max(template_prec(r) for _, r in lifted.body)
        chi = SkewElt.monomial(group, p, level, spec.conj_iota(i, v), chi_series(p, i, prec))
        total = total + skew_mul(lifted, chi)
    return total


def transport_depth(spec: QuotientSpec) -> int:
    """m_k + max(c_k, c'_k) with H1^(p^m_k) in H_k; both splittings share c_k."""
    m_k = 0 if spec.trivial else spec.k - 1
    return m_k + spec.c_k


def iota_prime_key(spec: QuotientSpec, h0: Key, i: int) -> Key:
    """Key of iota(i)^-1 iota'(i) for iota'(1) = iota(1) h0."""
    if spec.trivial:
        return spec.identity
    y, z = h0
    w = z + y
    return spec.canon((i * y, i * w + binomial_int(i, 2) * y - i * i * y))


def equivariant_h0(p: int, level: int, y: int) -> Key:
    """
    h0 = (y, -y/2) making iota' phi-equivariant.

    Raises:
        NotAUnit: 2 is not invertible modulo p^(level-1) (p = 2, level >= 2)
    """
    mod = p ** max(level - 1, 0)
    if mod == 1:
        return (0, 0)
    if p == 2:
        raise NotAUnit(f"-y/2 is undefined modulo {mod} for p = 2")
    return (y % mod, (-y * pow(2, -1, mod)) % mod)


def iota_transport(x: SkewElt, h0: Key, m: int) -> SkewElt:
    """
    Identify the ring built on iota' = iota * h0 with the ring built on iota.

    r h maps to sum_i (1+T)^i phi^m(r_i) (iota(i)^-1 iota'(i)) h where
    r = sum_i (1+T)^i phi^m(r_i) at depth m.

    Args:
        x (SkewElt): Element of the iota' ring
        h0 (Key): iota(1)^-1 iota'(1) in H1
        m (int): Expansion depth

    Returns:
        SkewElt: Element of the iota ring
    """
    spec = x.spec
    need = transport_depth(spec)
    if m < need:
        raise DepthTooShallow(f"transport depth {m} below {need}")
    if spec.trivial or spec.canon(h0) == spec.identity:
        return x
    p = x.p
    out: List[Tuple[Key, LaurentSeries]] = []
    for h, r in x.body:
        for i, ri in enumerate(etale_decompose(r, m)):
            if ri.is_zero:
                continue
            coeff = chi_series(p, i, template_prec(ri)) * frobenius_series(ri, m)
            out.append((spec.mul(iota_prime_key(spec, h0, i), h), coeff))
    return SkewElt.build(x.group, p, x.level, out, x.prec)
