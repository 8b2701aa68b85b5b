"""
Norm Service for PhiGamma

This module handles the analytic layer: exact rho-norms of truncated
distributions, the closed form for ||phi_t(b_beta)||, the q_t norm built on
coset decompositions, convergence regions, coefficient classes, the reduction
pi_H to the skew ring and the kernel and divergence witnesses.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from models.dist import DistElt, Exps
from models.groups import Root, TorusElt
from models.padic import NormValue, PadicScalar, RhoExponent
from models.region import Region
from models.series import OE_DAGGER, ROBBA, Certificate, LaurentSeries
from models.skew import SkewElt
from services.dist_service import (
    COORD_ROOTS,
    EXP_ROOTS,
    dist_convert,
    dist_coset_decompose,
    dist_phi_t,
)
from services.group_service import datum_for, in_tplus, leq_alpha, s_bar
from services.skew_service import group_minus_one, skew_mul, skew_one, skew_scalar
from utils.arith import binomial_int, ceil_log, integer_log, valuation
from utils.errors import NotInTPlus, PrecisionExhausted, WindowInsufficient

# Set up logging
logger = logging.getLogger(__name__)

Radius = Union[RhoExponent, Tuple[RhoExponent, RhoExponent]]


def _radii(at: Radius) -> Tuple[RhoExponent, ...]:
    return at if isinstance(at, tuple) else (at,)


def _monomial_view(x: DistElt) -> DistElt:
    return x if x.monomials is not None else dist_convert(x, "to_monomial")


def _window_norm(x: DistElt, at: Radius) -> Tuple[NormValue, NormValue]:
    """Norm over the monomial window and the largest value the unknown part can reach."""
    x = _monomial_view(x)
    radii = _radii(at)
    best = NormValue.zero()
    for k, c in x.monomials:
        d = sum(k)
        for rho in radii:
            best = best.max(NormValue(valuation(x.p, c) + rho.e * d))
    if best.is_zero and x.degree is None:
        return best, NormValue.zero()

    floor = NormValue.zero()
    for rho in radii:
        floor = floor.max(NormValue(Fraction(x.prec) - rho.e * x.denominator))
    if x.degree is not None:
        source = x.vector if x.vector is not None else x.monomials
        vmin = min([0] + [valuation(x.p, c) for _, c in source])
        for rho in radii:
            floor = floor.max(NormValue(vmin + rho.e * (x.degree + 1)))
    return best, floor


def spectral_norm(x: DistElt, at: Radius) -> NormValue:
    """
    max_k |d_k| rho^|k| over the monomial window, maximized over the radii.

    Args:
        x (DistElt): Element (monomials are materialized when missing)
        at (Radius): A radius or a pair (rho1, rho2)

    Returns:
        NormValue: The exact norm

    Raises:
        WindowInsufficient: The truncation tail or the precision floor could
            reach the maximum
    """
    best, floor = _window_norm(x, at)
    if floor.is_zero:
        return best
    if not floor < best:
        raise WindowInsufficient(f"norm {best} does not exceed the window bound {floor}")
    return best


def phi_t_norm_closed(root: Root, t: TorusElt, rho: RhoExponent) -> NormValue:
    """
    ||phi_t(b_beta)||_rho = max_{0 <= j <= m} rho^(p^j) p^(j - m), m = val_p(beta(t)).

    Args:
        root (Root): The root beta
        t (TorusElt): Element of T+
        rho (RhoExponent): Radius in (1/p, 1)

    Returns:
        NormValue: The closed-form value
    """
    p = t.p
    m = t.m(root)
    return NormValue(min(rho.e * p ** j + m - j for j in range(m + 1)))


def expanded_norm(p: int, n: int, rho: RhoExponent) -> NormValue:
    """||(1+b)^n - 1||_rho by expanding the binomial."""
    best = NormValue.zero()
    for j in range(1, n + 1):
        v = valuation(p, binomial_int(n, j))
        best = best.max(NormValue(v + rho.e * j))
    return best


def torus_defect(t: TorusElt, group: str) -> int:
    """sum_beta (p^m(beta, t) - 1) over the coordinate roots."""
    return sum(t.p ** t.m(r) - 1 for r in COORD_ROOTS[group])


def qt_norm(x: DistElt, t: TorusElt, rho: RhoExponent) -> NormValue:
    """
    ||x||_(q_t(r_t(rho))) = max_n ||phi_t(x_n)||_rho over the coset components.

    Only the maximum is certified: a component whose window cannot separate
    its norm from the truncation floor is fine as long as the floor stays
    below the largest component norm.

    Returns:
        NormValue: The q_t norm

    Raises:
        WindowInsufficient: Some floor reaches the largest component norm
    """
    components = dist_coset_decompose(x, t)
    best, floor = NormValue.zero(), NormValue.zero()
    for comp in components.values():
        if comp.is_zero:
            continue
        image = dist_phi_t(t, comp, target_moduli=x.moduli)
        norm, bound = _window_norm(image, rho)
        best, floor = best.max(norm), floor.max(bound)
    if not floor.is_zero and not floor < best:
        raise WindowInsufficient(f"q_t norm {best} does not exceed the window bound {floor}")
    return best


def sandwich(x: DistElt, t: TorusElt, rho: RhoExponent) -> Dict[str, object]:
    """
    Evaluate ||x||_rho <= q_t-norm <= rho^(-sum (p^m - 1)) ||x||_rho.

    Returns:
        Dict: The three values, "holds" and "tight" (left equality)
    """
    lower = spectral_norm(x, rho)
    middle = qt_norm(x, t, rho)
    upper = lower * NormValue(-rho.e * torus_defect(t, x.group))
    holds = lower <= middle <= upper
    logger.debug(f"sandwich {lower} <= {middle} <= {upper}: {holds}")
    return {"lower": lower, "middle": middle, "upper": upper, "holds": holds, "tight": lower == middle}


def region_of_t(t: TorusElt, rho0: Optional[RhoExponent] = None) -> Region:
    """
    Annulus certified for series transported by phi_t.

    r = max_beta (p^m(beta, t) + 1) and rho2 = max(rho0, p^(-1/p^M)) with M = max m.

    Raises:
        NotInTPlus: t is not in T+
    """
    datum = datum_for(f"GL{t.n}")
    if not in_tplus(datum, t):
        raise NotInTPlus(f"{t.diag} is not in T+")
    ms = [t.m(r) for r in datum.positive]
    r = max(t.p ** m + 1 for m in ms)
    rho0 = rho0 or RhoExponent(Fraction(1, 2))
    e = min(rho0.e, Fraction(1, t.p ** max(ms)))
    return Region(RhoExponent(e), r)


def t_of_region(reg: Region, group: str, p: int) -> TorusElt:
    """
    t = s_bar^k with k = floor(log_p r / m) + 1, m the smallest positive m(beta, s_bar).
    """
    datum = datum_for(group)
    sb = s_bar(datum, p)
    ms = [sb.m(r) for r in datum.positive if sb.m(r) > 0]
    if not ms:
        return sb
    k = integer_log(p, reg.r) // min(ms) + 1
    return sb ** k


def coeff_class_check(x: DistElt) -> Dict[str, object]:
    """
    Classify by the valuation profile: integral, bounded or general.

    "general" means the valuations keep decreasing along b_alpha^-n: the
    powers n = 1..N (N >= 2) all occur, the minimum valuation at b_alpha^-n
    drops strictly with n, and the deepest power carries the overall
    minimum. Any other negative profile is bounded on the window.

    Returns:
        Dict: {"class", "witness", "valuation"}
    """
    x = _monomial_view(x)
    if not x.monomials:
        return {"class": "integral", "witness": None, "valuation": None}
    vals = {k: valuation(x.p, c) for k, c in x.monomials}
    witness = min(vals, key=lambda k: (vals[k], k))
    vmin = vals[witness]
    if vmin >= 0:
        return {"class": "integral", "witness": list(witness), "valuation": vmin}

    profile: Dict[int, int] = {}
    for k, v in vals.items():
        if k[-1] < 0:
            profile[-k[-1]] = min(v, profile.get(-k[-1], v))
    depth = max(profile, default=0)
    run = [profile.get(n) for n in range(1, depth + 1)]
    descending = (
        depth >= 2
        and None not in run
        and all(b < a for a, b in zip(run, run[1:]))
        and run[-1] == vmin
    )
    if descending:
        witness = min((k for k in vals if k[-1] == -depth), key=lambda k: (vals[k], k))
        return {"class": "general", "witness": list(witness), "valuation": vals[witness]}
    return {"class": "bounded", "witness": list(witness), "valuation": vmin}


def pi_H_map(x: DistElt, level: int) -> SkewElt:
    """
    Reduce b_gamma -> n_gamma(1) - 1, b_beta -> n_beta(p) - 1, b_alpha -> T.

    Integral inputs land in the OE-dagger model, others in the Robba model.

    Args:
        x (DistElt): Element with exact monomial coordinates
        level (int): Target level of the skew ring

    Returns:
        SkewElt: The image

    Raises:
        WindowInsufficient: x is only known on a truncated window
    """
    if x.monomials is None or x.degree is not None:
        raise WindowInsufficient("pi_H needs a polynomially supported N1-part")
    p, prec = x.p, x.prec
    integral = all(valuation(p, c) >= 0 for _, c in x.monomials)
    cert = Certificate(OE_DAGGER if integral else ROBBA)
    total = SkewElt.zero(x.group, p, level)
    gens = {}
    if x.group == "GL3":
        gens = {0: group_minus_one(x.group, p, level, (0, 1), prec, cert),
                1: group_minus_one(x.group, p, level, (p, 0), prec, cert)}
    for k, c in x.monomials:
        term = skew_one(x.group, p, level, prec, cert)
        for axis, e in enumerate(k[:-1]):
            for _ in range(e):
                term = skew_mul(term, gens[axis])
        coeff = LaurentSeries.monomial(p, k[-1], prec, c, cert)
        term = skew_mul(term, skew_scalar(coeff, x.group, level))
        total = total + term
    return total


def log_division_check(p: int, r: int, M: int, N: int, m_beta: int = 1) -> Dict[str, object]:
    """
    Quotient q = trunc_M(log(1+b)) / phi^r(b) with phi^r(b) = (1+b)^(p^R) - 1, R = r m_beta.

    The closed form q_i = p^-R sum_{n <= i} (-1)^n / (n+1) [b^i] w^n with
    w = phi^r(b) is cross-checked by long division, the valuation bound
    val(q_i) >= -R - ceil(log_p(i+1)) is scanned, and phi^r(trunc log) is
    compared with p^R trunc log below degree M.

    Returns:
        Dict: Report with coefficients, valuations and the three verdicts

    Raises:
        PrecisionExhausted: N leaves no digit to report
    """
    if N < 1:
        raise PrecisionExhausted("log-division report needs N >= 1")
    R = r * m_beta
    q_pow = p ** R
    w = [Fraction(binomial_int(q_pow, k)) for k in range(M + 2)]
    w[0] = Fraction(0)
    log = [Fraction(0)] + [Fraction((-1) ** (n + 1), n) for n in range(1, M + 2)]

    powers = [[Fraction(1)] + [Fraction(0)] * (M + 1)]
    for _ in range(M + 1):
        prev = powers[-1]
        powers.append([sum((prev[a] * w[i - a] for a in range(i + 1)), Fraction(0))
                       for i in range(M + 2)])
    closed = [
        sum((Fraction((-1) ** n, n + 1) * powers[n][i] for n in range(i + 1)), Fraction(0)) / q_pow
        for i in range(M + 1)
    ]

    long_div: List[Fraction] = []
    for i in range(M + 1):
        acc = log[i + 1] - sum((long_div[j] * w[i + 1 - j] for j in range(i)), Fraction(0))
        long_div.append(acc / w[1])

    vals = [valuation(p, c) for c in closed]
    bounds = [-R - ceil_log(p, i + 1) for i in range(M + 1)]
    bound_ok = all(v is None or v >= b for v, b in zip(vals, bounds))

    transported = [sum((log[n] * powers[n][i] for n in range(1, M + 1)), Fraction(0))
                   for i in range(M + 1)]
    identity_ok = all(transported[i] == q_pow * log[i] for i in range(M + 1))

    return {
        "p": p, "r": r, "m_beta": m_beta,
        "coefficients": [PadicScalar.from_absolute(p, c, N).as_dict() for c in closed],
        "exact": [str(c) for c in closed],
        "valuations": vals,
        "bounds": bounds,
        "bound_ok": bound_ok,
        "long_division_ok": closed == long_div,
        "identity_ok": identity_ok,
    }


def witness_series_ex(n_max: int, t: TorusElt, rho: RhoExponent,
                      group: str = "GL3") -> Dict[str, object]:
    """
    Norms of b_gamma^n b_alpha^-n before and after phi_t.

    The untransported terms have norm 1. The transported term
    phi_t(b_gamma)^n phi_t(b_alpha)^-n is measured as
    ||phi_t(b_gamma^n)|| / ||phi_t(b_alpha^n)|| from the actual images,
    the rho-norm being multiplicative; the closed form is kept next to it.

    Returns:
        Dict: {"rows", "plain_verdict", "transported_verdict"}
    """
    if group != "GL3":
        raise ValueError("the witness needs a non-simple root")
    top, alpha = EXP_ROOTS[group][0], EXP_ROOTS[group][-1]
    step = phi_t_norm_closed(top, t, rho) * phi_t_norm_closed(alpha, t, rho) ** -1
    m = max(t.m(top), t.m(alpha))
    rows = []
    for n in range(1, n_max + 1):
        prec = n * (m + 1) + 1
        plain = spectral_norm(DistElt.from_monomials(group, t.p, n + 2, {(n, 0, -n): 1}), rho)
        upper = dist_phi_t(t, DistElt.from_monomials(group, t.p, prec, {(n, 0, 0): 1}))
        lower = dist_phi_t(t, DistElt.from_monomials(group, t.p, prec, {(0, 0, n): 1}))
        transported = spectral_norm(upper, rho) * spectral_norm(lower, rho) ** -1
        rows.append({"n": n, "plain": plain, "transported": transported, "closed": step ** n})
    first = rows[0]["transported"].exponent
    geometric = first > 0 and all(r["transported"].exponent == r["n"] * first for r in rows)
    verdict = "null geometric" if geometric else "not null"
    plain_verdict = "not null" if all(r["plain"] == NormValue.of(0) for r in rows) else "null geometric"
    logger.debug(f"witness rows up to n = {n_max}: transported {verdict}")
    return {"rows": rows, "plain_verdict": plain_verdict, "transported_verdict": verdict}


def phi_t_monomial_isometry(ks: Sequence[Exps], t: TorusElt, rho: RhoExponent,
                         group: str, prec: int) -> Dict[str, object]:
    """
    Compare ||sum_k phi_t(b)^k||_rho with max_k ||phi_t(b)^k||_rho for 1 <=_alpha t.

    Raises:
        NotInTPlus: t does not dominate the identity under <=_alpha
    """
    datum = datum_for(group)
    if not leq_alpha(datum, TorusElt.identity(t.p, datum.n), t):
        raise NotInTPlus(f"{t.diag} is not above 1 for <=_alpha")
    x = DistElt.from_monomials(group, t.p, prec, {tuple(k): 1 for k in ks})
    total = spectral_norm(dist_phi_t(t, x), rho)
    closed = [phi_t_norm_closed(r, t, rho) for r in EXP_ROOTS[group]]
    term_max = NormValue.zero()
    for k in ks:
        value = NormValue.of(0)
        for c, e in zip(closed, k):
            value = value * c ** e
        term_max = term_max.max(value)
    return {"sum_norm": total, "term_max": term_max, "ok": total == term_max}
