"""
Series Service for PhiGamma

This module handles the one-variable coefficient rings: ring arithmetic,
inversion, substitution, the Frobenius phi, the Gamma action, the T+ action
through alpha, and the etale decomposition
R = sum_{i < p^c} (1+T)^i phi^c(R).
"""
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

# Import configuration
from config.settings import DEFAULT_SERIES_WIDTH

from models.groups import RootDatum, TorusElt
from models.padic import PadicScalar
from models.series import (
    E_DAGGER,
    IWASAWA,
    OE,
    OE_DAGGER,
    ROBBA,
    Certificate,
    LaurentSeries,
    sum_series,
)
from services.group_service import in_tplus
from utils.arith import binomial_int, valuation
from utils.caching import memoized
from utils.errors import (
    NotAUnit,
    NotInTPlus,
    SubstitutionDiverges,
    WindowUnderflow,
)

# Set up logging
logger = logging.getLogger(__name__)


def ser_arith(op: str, f: LaurentSeries, g: Optional[LaurentSeries] = None) -> LaurentSeries:
    """
    Ring operations on truncated series.

    Args:
        op (str): One of "add", "mul", "neg"
        f (LaurentSeries): First operand
        g (LaurentSeries, optional): Second operand

    Returns:
        LaurentSeries: Result on the propagated window
    """
    if op == "neg":
        return -f
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ValueError(f"Unknown series operation: {op}")


def one_like(f: LaurentSeries, prec: Optional[int] = None) -> LaurentSeries:
    return LaurentSeries.constant(f.p, 1, f.prec if prec is None else prec, f.cert)


def template_prec(f: LaurentSeries) -> int:
    """Precision for exact integer templates multiplied into f."""
    return f.prec + max(0, -f.vmin)


def _power_series_inverse(coeffs: Dict[int, Fraction], p: int, prec: int, width: int) -> Dict[int, Fraction]:
    """Inverse of sum a_k T^k (a_0 a unit) modulo T^width."""
    a0_inv = 1 / coeffs[0]
    out: Dict[int, Fraction] = {0: a0_inv}
    for n in range(1, width):
        acc = sum((coeffs.get(k, 0) * out[n - k] for k in range(1, n + 1)), Fraction(0))
        out[n] = -a0_inv * acc
    return out


def ser_invert(f: LaurentSeries) -> LaurentSeries:
    """
    Invert a series with an invertible leading term.

    The series is scaled to minimum valuation 0 (allowed for E-dagger and
    Robba classes only), split at the lowest exponent m carrying a unit as
    f = f_plus + f_low, and inverted as f_plus^-1 * sum_n (-f_plus^-1 f_low)^n.

    Args:
        f (LaurentSeries): Series to invert

    Returns:
        LaurentSeries: g with f * g = 1 on the output window
    """
    if f.is_zero:
        raise NotAUnit("zero series is not invertible")
    shift = f.vmin
    if shift != 0 and f.cert.integral:
        raise NotAUnit(f"minimum valuation {shift} is not a unit in {f.cert.tag}")
    g = f.scaled(-shift) if shift else f
    p = g.p

    units = [n for n, c in g.terms if valuation(p, c) == 0]
    if not units:
        raise NotAUnit("no unit coefficient at precision")
    m = units[0]
    if g.cert.tag == IWASAWA and m != 0:
        raise NotAUnit(f"leading unit at T^{m} is not invertible in o[[T]]")

    high = {n - m: c for n, c in g.terms if n >= m}
    low = {n: c for n, c in g.terms if n < m}

    monomial = len(high) == 1 and g.exact
    if monomial:
        width = None
        inv = {0: 1 / high[0]}
    else:
        width = (g.hi - m) if g.hi is not None else DEFAULT_SERIES_WIDTH
        if g.hi is None:
            logger.debug(f"inverting an exact series with {len(high)} terms, truncating at T^{width}")
        if width <= 0:
            raise WindowUnderflow(f"window [{g.lo}, {g.hi}) leaves nothing above T^{m}")
        inv = _power_series_inverse(high, p, g.prec, width)
    f_plus_inv = LaurentSeries.build(p, inv, g.prec, hi=width, cert=g.cert).shift(-m)

    result = f_plus_inv
    if low:
        f_low = LaurentSeries.build(p, low, g.prec, hi=g.hi, cert=g.cert)
        x = -(f_plus_inv * f_low)
        terms = [one_like(x, template_prec(x))]
        power = terms[0]
        for _ in range(1, g.prec):
            power = power * x
            if power.is_zero and power.exact:
                break
            terms.append(power)
        result = f_plus_inv * sum_series(terms, p, template_prec(x), g.cert)
    result = result.with_cert(f.cert)
    return result.scaled(-shift) if shift else result


def _tail_order(g_power: LaurentSeries) -> Optional[int]:
    """Lowest exponent that can be affected by the unknown tail of f."""
    if g_power.terms:
        return g_power.terms[0][0]
    return g_power.hi


def _as_invertible(g: LaurentSeries) -> LaurentSeries:
    if g.cert.tag == IWASAWA:
        return g.with_cert(Certificate(OE, g.cert.radius))
    return g


def ser_subst(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """
    Substitute g for T in f.

    Negative exponents of f go through ser_invert(g). When f is truncated at
    T^hi, the unknown tail is a multiple of g^hi, so the result is kept below
    the lowest exponent of g^hi that survives modulo the working precision.

    Args:
        f (LaurentSeries): Outer series
        g (LaurentSeries): Integral series with non-negative exponents and
            constant term divisible by p

    Returns:
        LaurentSeries: f(g) on the certified window
    """
    if g.is_zero:
        raise SubstitutionDiverges("cannot substitute zero")
    if g.vmin < 0 or g.lo < 0 or valuation(g.p, g.coeff(0)) == 0:
        raise SubstitutionDiverges("substituted series must be integral, with p | g(0) and no negative exponents")
    p = f.p
    work_prec = template_prec(f)
    rel = f.prec - min(f.vmin, 0)
    g_inv = None

    hi_cut = None
    if f.hi is not None:
        if f.hi >= 0:
            tail = g.with_prec(rel) ** f.hi
        else:
            g_inv = ser_invert(_as_invertible(g).with_prec(max(g.prec, work_prec)))
            tail = g_inv.with_prec(rel) ** (-f.hi)
        hi_cut = _tail_order(tail)
        if hi_cut is not None:
            logger.debug(f"substitution keeps exponents below {hi_cut}")

    parts: List[LaurentSeries] = []
    positive_top = max((n for n in f.support if n >= 0), default=-1)
    g_cut = g.truncate(hi_cut)
    power = one_like(g_cut, work_prec + rel)
    for k in range(0, positive_top + 1):
        c = f.coeff(k)
        if c:
            parts.append(power.scale_by(c, f.prec))
        if k < positive_top:
            power = (power * g_cut).truncate(hi_cut)

    lowest = min((n for n in f.support if n < 0), default=0)
    if lowest < 0:
        if g_inv is None:
            g_inv = ser_invert(_as_invertible(g).with_prec(max(g.prec, work_prec)))
        power = g_inv.truncate(hi_cut)
        for k in range(-1, lowest - 1, -1):
            c = f.coeff(k)
            if c:
                parts.append(power.scale_by(c, f.prec))
            if k > lowest:
                power = (power * g_inv).truncate(hi_cut)

    result = sum_series(parts, p, work_prec + rel, f.cert).with_prec(f.prec)
    if hi_cut is not None:
        result = result.truncate(hi_cut)
    return result.with_cert(f.cert if g.cert.tag == IWASAWA else f.cert.join(g.cert))


@memoized("phi_poly")
def phi_t_poly(p: int, c: int, prec: int) -> LaurentSeries:
    """phi^c(T) = (1+T)^(p^c) - 1 as an exact polynomial."""
    q = p ** c
    return LaurentSeries.build(p, {n: binomial_int(q, n) for n in range(1, q + 1)}, prec,
                               cert=Certificate(IWASAWA))


def frobenius_series(f: LaurentSeries, c: int = 1) -> LaurentSeries:
    """
    phi^c(f) = f((1+T)^(p^c) - 1).

    Args:
        f (LaurentSeries): Series
        c (int, optional): Number of iterations

    Returns:
        LaurentSeries: The image, with the certificate of f
    """
    if c == 0:
        return f
    g = phi_t_poly(f.p, c, template_prec(f) + max(0, -f.vmin))
    return ser_subst(f, g).with_cert(f.cert)


def gamma_series(a: Union[int, PadicScalar], p: int, prec: int, width: Optional[int]) -> LaurentSeries:
    """(1+T)^a - 1."""
    if isinstance(a, int) and a >= 0:
        return LaurentSeries.build(p, {n: binomial_int(a, n) for n in range(1, a + 1)}, prec,
                                   cert=Certificate(IWASAWA))
    width = width or DEFAULT_SERIES_WIDTH
    if isinstance(a, int):
        coeffs = {n: binomial_int(a, n) for n in range(1, width)}
        return LaurentSeries.build(p, coeffs, prec, hi=width, cert=Certificate(IWASAWA))
    from services.padic_service import binom
    scalars = {n: binom(a, n) for n in range(1, width)}
    prec = min([prec] + [s.abs_prec for s in scalars.values()])
    return LaurentSeries.build(p, {n: s.value for n, s in scalars.items()}, prec, hi=width,
                               cert=Certificate(IWASAWA))


def gamma_act(a: Union[int, PadicScalar, Fraction], f: LaurentSeries) -> LaurentSeries:
    """
    gamma_a(f) = f((1+T)^a - 1) for a p-adic unit a.

    Args:
        a: Unit, as an exact integer, unit rational or scalar
        f (LaurentSeries): Series

    Returns:
        LaurentSeries: The transported series
    """
    if isinstance(a, Fraction):
        if a.denominator == 1:
            a = int(a)
        else:
            a = PadicScalar.from_value(f.p, a, template_prec(f) + 2)
    if isinstance(a, PadicScalar) and not a.is_unit():
        raise NotAUnit(f"gamma needs a unit, got {a}")
    if isinstance(a, int) and a % f.p == 0:
        raise NotAUnit(f"gamma needs a unit, got {a}")
    if isinstance(a, int) and a == 1:
        return f
    g = gamma_series(a, f.p, template_prec(f) + max(0, -f.vmin), f.hi)
    return ser_subst(f, g).with_cert(f.cert)


def tplus_act_series(t: TorusElt, f: LaurentSeries, datum: Optional[RootDatum] = None) -> LaurentSeries:
    """
    Action of t in T+ through alpha: gamma_u(phi^m(f)) with alpha(t) = p^m u.

    Args:
        t (TorusElt): Torus element
        f (LaurentSeries): Series

    Returns:
        LaurentSeries: The transported series
    """
    datum = datum or RootDatum(t.n)
    if not in_tplus(datum, t):
        raise NotInTPlus(f"{t.diag} is not in T+")
    m = t.m(datum.alpha)
    u = t.unit_part(datum.alpha)
    out = frobenius_series(f, m)
    if u != 1:
        out = gamma_act(u, out)
    return out


@memoized("window_bound")
def window_bound(p: int, W: int, N: int) -> int:
    """
    T-adic order below which depth-1 components ignore a tail T^W h modulo p^N.

    Uses T^p = phi(T) - p S(T) with ord_T S = 1.
    """
    if W <= 0 or N <= 0:
        return 0 if N > 0 else 10 ** 9
    k = W // p
    return min(k - j + window_bound(p, j, N - j) for j in range(0, min(N, k + 1)))


def _to_u_basis(coeffs: Dict[int, Fraction]) -> Dict[int, Fraction]:
    """Coefficients in u = 1 + T of a polynomial in T."""
    out: Dict[int, Fraction] = defaultdict(Fraction)
    for k, c in coeffs.items():
        for j in range(k + 1):
            out[j] += c * binomial_int(k, j) * (-1) ** (k - j)
    return out


def _from_u_basis(coeffs: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = defaultdict(Fraction)
    for l, c in coeffs.items():
        for n in range(l + 1):
            out[n] += c * binomial_int(l, n)
    return out


@memoized("etale_decompose")
def _decompose_cached(key, c: int):
    f = LaurentSeries(*key)
    return _decompose(f, c)


def _decompose(f: LaurentSeries, c: int) -> List[LaurentSeries]:
    p = f.p
    q = p ** c
    n = max(0, -f.lo)
    G = f.shift(n)
    if n:
        Q = LaurentSeries.build(p, {k - 1: binomial_int(q, k) for k in range(1, q + 1)},
                                template_prec(f), cert=Certificate(IWASAWA))
        G = G * (Q ** n).with_prec(template_prec(f) + n)
    G = G.with_prec(f.prec)

    u_coeffs = _to_u_basis(G.coeff_map)
    buckets: List[Dict[int, Fraction]] = [dict() for _ in range(q)]
    for j, a in u_coeffs.items():
        if a:
            buckets[j % q][j // q] = a

    hi = None
    if G.hi is not None:
        N = G.prec - min(G.vmin, 0)
        W = G.hi
        for _ in range(c):
            W = window_bound(p, W, N)
        hi = W - n
        if W <= 0:
            raise WindowUnderflow(f"window [{f.lo}, {f.hi}) too short for depth {c}")
        logger.debug(f"depth-{c} components keep T-order {W} of {G.hi}")

    parts = []
    for bucket in buckets:
        g = LaurentSeries.build(p, _from_u_basis(bucket), G.prec, lo=0,
                                hi=None if hi is None else hi + n, cert=f.cert)
        parts.append(g.shift(-n))
    return parts


def etale_decompose(f: LaurentSeries, c: int = 1) -> List[LaurentSeries]:
    """
    Components r_i with f = sum_i (1+T)^i phi^c(r_i).

    Args:
        f (LaurentSeries): Series with integral or scaled-integral coefficients
        c (int, optional): Depth

    Returns:
        List[LaurentSeries]: p^c components indexed by i
    """
    if c == 0:
        return [f]
    return list(_decompose_cached(f.key(), c))


def etale_recombine(parts: Sequence[LaurentSeries], c: int = 1) -> LaurentSeries:
    """
    sum_i (1+T)^i phi^c(r_i).

    Args:
        parts (Sequence[LaurentSeries]): p^c components
        c (int, optional): Depth

    Returns:
        LaurentSeries: The recombined series
    """
    if not parts:
        raise ValueError("recombine needs p^c parts")
    p = parts[0].p
    if len(parts) != p ** c:
        raise ValueError(f"expected {p ** c} parts, got {len(parts)}")
    prec = max(template_prec(r) for r in parts)
    out = []
    for i, r in enumerate(parts):
        chi = LaurentSeries.build(p, {n: binomial_int(i, n) for n in range(i + 1)}, prec, cert=r.cert)
        out.append(chi * frobenius_series(r, c))
    return sum_series(out, p, prec, parts[0].cert)


def psi_series(f: LaurentSeries, c: int = 1) -> LaurentSeries:
    """Left inverse of phi^c: the component r_0."""
    return etale_decompose(f, c)[0]


def cert_join(f: LaurentSeries, g: LaurentSeries) -> Certificate:
    return f.cert.join(g.cert)


def cert_check(f: LaurentSeries) -> Dict[str, object]:
    """
    Check the window-verifiable constraints of the certificate of f.

    Returns:
        Dict: {"ok": bool, "reason": str}
    """
    tag = f.cert.tag
    vals = {n: valuation(f.p, c) for n, c in f.terms}
    if tag == IWASAWA and (f.lo < 0 or f.vmin < 0):
        return {"ok": False, "reason": "Iwasawa series need non-negative exponents and valuations"}
    if tag in (OE, OE_DAGGER) and f.vmin < 0:
        return {"ok": False, "reason": f"{tag} series need integral coefficients"}
    radius = f.cert.radius
    if radius is not None and tag in (OE_DAGGER, E_DAGGER, ROBBA):
        floor = min([0] + [v for n, v in vals.items() if n >= 0])
        for n, v in vals.items():
            if n < 0 and v < radius * (-n) + floor:
                return {"ok": False,
                        "reason": f"coefficient of T^{n} has valuation {v} below growth bound"}
    return {"ok": True, "reason": ""}


def chi_series(p: int, i: int, prec: int, cert: Optional[Certificate] = None,
               width: Optional[int] = None) -> LaurentSeries:
    """chi(i) = (1+T)^i; exact for i >= 0, truncated at width otherwise."""
    cert = cert or Certificate(IWASAWA)
    if i >= 0:
        return LaurentSeries.build(p, {n: binomial_int(i, n) for n in range(i + 1)}, prec, cert=cert)
    width = width or DEFAULT_SERIES_WIDTH
    return LaurentSeries.build(p, {n: binomial_int(i, n) for n in range(width)}, prec,
                               hi=width, cert=cert)
