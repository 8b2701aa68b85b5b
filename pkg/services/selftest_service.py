"""
Self-test Service for PhiGamma

This module handles the property suite behind the ``selftest`` sub-command:
one group of seeded random checks per kernel module, each row naming the
statement it instantiates.
"""
import logging
import random
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from tqdm import tqdm

# Import configuration
from config.settings import SELFTEST_CASES, SELFTEST_PROGRESS

from models.dist import DistElt
from models.groups import QuotientSpec
from models.modules import SkewModuleLevel
from models.padic import PadicScalar, RhoExponent
from models.region import Region
from models.series import LaurentSeries
from models.skew import SkewElt
from services.dist_service import certified_degree, dist_convert, dist_mul, rank_check
from services.group_service import datum_for, h_k_by_saturation, h_k_closed_form, s_bar, s_element
from services.norm_service import (
    expanded_norm,
    log_division_check,
    phi_t_norm_closed,
    pi_H_map,
    region_of_t,
    sandwich,
    spectral_norm,
    t_of_region,
    witness_series_ex,
)
from services.padic_service import scalar_arith
from services.phimod_service import solve_X, theta_verify
from services.series_service import etale_decompose, etale_recombine
from services.skew_service import (
    equivariant_h0,
    group_minus_one,
    ideal_member,
    iota_transport,
    skew_mul,
    skew_phi,
    skew_scalar,
    transport_depth,
)
from utils.caching import cache_sizes, clear_caches

# Set up logging
logger = logging.getLogger(__name__)

Check = Callable[[random.Random, int], bool]


def _random_scalar(rng: random.Random, p: int, prec: int) -> PadicScalar:
    return PadicScalar.from_value(p, Fraction(rng.randrange(1, p ** prec)), prec)


def _random_series(rng: random.Random, p: int, prec: int, lo: int, hi: int) -> LaurentSeries:
    return LaurentSeries.build(p, {n: rng.randrange(p ** prec) for n in range(lo, hi)}, prec, lo, hi)


def _random_skew(rng: random.Random, p: int, level: int, prec: int, size: int = 2) -> SkewElt:
    keys = QuotientSpec("GL3", p, level).reps()
    terms = [(rng.choice(keys), LaurentSeries.build(p, {n: rng.randrange(1, p ** prec) for n in range(2)}, prec))
             for _ in range(size)]
    return SkewElt.build("GL3", p, level, terms)


def _random_dist(rng: random.Random, p: int, prec: int, level: int, size: int = 3) -> DistElt:
    mod = p ** level
    coeffs = {tuple(rng.randrange(mod) for _ in range(3)): rng.randrange(1, p ** prec) for _ in range(size)}
    return DistElt.at_level("GL3", p, prec, level, coeffs)


def _random_polynomial(rng: random.Random, p: int, prec: int, degree: int = 6) -> DistElt:
    coeffs = {}
    for n in range(3):
        total = rng.randrange(1, degree + 1)
        i = rng.randrange(total + 1)
        j = rng.randrange(total - i + 1)
        coeffs.setdefault((i, j, total - i - j), 1 if n == 0 else rng.randrange(1, p ** prec))
    return DistElt.from_monomials("GL3", p, prec, coeffs)


def check_scalar_division(rng: random.Random, p: int) -> bool:
    x, y = _random_scalar(rng, p, 5), _random_scalar(rng, p, 5)
    return scalar_arith("mul", scalar_arith("div", x, y), y) == x


def check_series_decomposition(rng: random.Random, p: int) -> bool:
    f = _random_series(rng, p, 4, -4, 12)
    return etale_recombine(etale_decompose(f, 1), 1).agrees_with(f)


def check_hk_closed_form(rng: random.Random, p: int) -> bool:
    k = rng.choice((2, 3))
    return h_k_by_saturation("GL3", p, k, 3) == h_k_closed_form("GL3", p, k, 3)


def check_skew_associativity(rng: random.Random, p: int) -> bool:
    x, y, z = (_random_skew(rng, p, 2, 3) for _ in range(3))
    return skew_mul(skew_mul(x, y), z).agrees_with(skew_mul(x, skew_mul(y, z)))


def check_skew_phi_multiplicative(rng: random.Random, p: int) -> bool:
    x, y = _random_skew(rng, p, 2, 3), _random_skew(rng, p, 2, 3)
    return skew_phi(skew_mul(x, y)).agrees_with(skew_mul(skew_phi(x), skew_phi(y)))


def check_rep_shift(rng: random.Random, p: int) -> bool:
    x, y = _random_skew(rng, p, 2, 3), _random_skew(rng, p, 2, 3)
    return skew_mul(x, y, rep_shift=rng.randrange(1, 3)).agrees_with(skew_mul(x, y))


def check_transport(rng: random.Random, p: int) -> bool:
    spec = QuotientSpec("GL3", p, 2)
    h0 = equivariant_h0(p, 2, rng.randrange(1, p)) if p > 2 else (1, 0)
    m = transport_depth(spec)
    x, y = _random_skew(rng, p, 2, 3), _random_skew(rng, p, 2, 3)
    lhs = iota_transport(skew_mul(x, y), h0, m)
    if not lhs.agrees_with(skew_mul(iota_transport(x, h0, m), iota_transport(y, h0, m))):
        return False
    return p == 2 or iota_transport(skew_phi(x), h0, m).agrees_with(skew_phi(iota_transport(x, h0, m)))


def check_phi_kernel(rng: random.Random, p: int) -> bool:
    level = 3
    x = SkewElt.zero("GL3", p, level, 3)
    for _ in range(2):
        r = LaurentSeries.build(p, {n: rng.randrange(1, p ** 3) for n in range(2)}, 3)
        x = x + group_minus_one("GL3", p, level, (0, rng.randrange(1, p)), 3).left_scale(r)
    return skew_phi(x).is_zero and ideal_member(x, max(1, level - 2))


def check_basis_change(rng: random.Random, p: int) -> bool:
    h = (0, rng.randrange(1, p))
    P = SkewElt.monomial("GL3", p, 2, h, LaurentSeries.constant(p, 1, 3))
    M = SkewModuleLevel("GL3", p, 2, 1, [[P]])
    X, terms = solve_X(M)
    return theta_verify(M, X, terms).ok and X[0][0].agrees_with(group_minus_one("GL3", p, 2, h, 3))


def check_dist_associativity(rng: random.Random, p: int) -> bool:
    x, y, z = (_random_dist(rng, p, 3, 2) for _ in range(3))
    return dist_mul(dist_mul(x, y), z).agrees_with(dist_mul(x, dist_mul(y, z)))


def check_certified_degree(rng: random.Random, p: int) -> bool:
    level, prec = rng.choice(((3, 2), (4, 3), (3, 1)))
    degree = certified_degree(p, level, prec)
    return rank_check(p, level, degree, prec)["ok"]


def check_closed_form(rng: random.Random, p: int) -> bool:
    datum = datum_for("GL3")
    s, sb = s_element(datum, p), s_bar(datum, p)
    t = rng.choice((s, sb, s * sb))
    rho = RhoExponent(Fraction(1, rng.choice((2, 4, 8))))
    return all(phi_t_norm_closed(r, t, rho) == expanded_norm(p, int(t.root_value(r)), rho)
               for r in datum.positive)


def check_region_round_trip(rng: random.Random, p: int) -> bool:
    reg = Region(RhoExponent(Fraction(1, 2)), rng.choice((2, 3, 5)))
    return region_of_t(t_of_region(reg, "GL3", p), reg.rho2).covers(reg)


def check_norm_multiplicative(rng: random.Random, p: int) -> bool:
    rho = RhoExponent(Fraction(1, rng.choice((2, 4))))
    gens = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 2, 0), (0, 0, 2), (1, 1, 1)]
    x, y = (DistElt.from_monomials("GL3", p, 6, {rng.choice(gens): 1}) for _ in range(2))
    return spectral_norm(dist_mul(x, y), rho) == spectral_norm(x, rho) * spectral_norm(y, rho)


def check_pi_h(rng: random.Random, p: int) -> bool:
    level, prec = 3, 3
    x, y = (_random_polynomial(rng, p, prec, degree=2) for _ in range(2))
    merged = x.monomial_map
    for k, c in y.monomial_map.items():
        merged[k] = merged.get(k, 0) + c
    total = DistElt.from_monomials("GL3", p, prec, merged)
    additive = pi_H_map(total, level).agrees_with(pi_H_map(x, level) + pi_H_map(y, level))
    b_alpha = DistElt.from_monomials("GL3", p, prec, {(0, 0, 1): 1})
    T = LaurentSeries.monomial(p, 1, prec)
    return additive and pi_H_map(b_alpha, level).agrees_with(skew_scalar(T, "GL3", level))


def check_sandwich(rng: random.Random, p: int) -> bool:
    s = s_element(datum_for("GL3"), p)
    prec = 2
    level = prec + (2 if p == 2 else 1)
    x = dist_convert(_random_polynomial(rng, p, prec), "to_group", moduli=(level,) * 3)
    return sandwich(x, s, RhoExponent(Fraction(1, 2 * p ** 2)))["holds"]


def check_witnesses(rng: random.Random, p: int) -> bool:
    t = s_element(datum_for("GL3"), p)
    ex = witness_series_ex(6, t, RhoExponent(Fraction(1, 2)))
    log = log_division_check(p, rng.choice((1, 2)), 12, 3)
    return (ex["transported_verdict"] == "null geometric" and ex["plain_verdict"] == "not null"
            and log["bound_ok"] and log["long_division_ok"] and log["identity_ok"])


def suite(cases: int) -> List[Tuple[str, str, Check, int]]:
    """(anchor, check name, check, case count) for every module of the kernel."""
    few = max(1, cases // 4)
    return [
        ("scalar division inverts multiplication", "padic", check_scalar_division, cases),
        ("recombine(decompose(f)) = f", "series", check_series_decomposition, cases),
        ("H_k closed form = normal closure", "groups", check_hk_closed_form, 2),
        ("skew product is associative", "skew", check_skew_associativity, few),
        ("phi is multiplicative on the skew ring", "skew", check_skew_phi_multiplicative, few),
        ("product independent of the representatives i + p^d s", "skew", check_rep_shift, few),
        ("iota transport is a phi-equivariant ring map", "skew", check_transport, few),
        ("phi(x) = 0 at level l puts x in I_max(1, l-2)", "skew", check_phi_kernel, few),
        ("basis change residuals vanish", "phimod", check_basis_change, few),
        ("group algebra product is associative", "distalg", check_dist_associativity, few),
        ("monomial coordinates faithful at the certified degree", "distalg", check_certified_degree, 3),
        ("closed form = expanded norm", "norms", check_closed_form, cases),
        ("region_of_t(t_of_region(R)) covers R", "norms", check_region_round_trip, 3),
        ("rho-norm is multiplicative on generator pairs", "norms", check_norm_multiplicative, cases),
        ("pi_H is additive and sends b_alpha to T", "norms", check_pi_h, few),
        ("||x|| <= q_t norm <= rho^-defect ||x||", "norms", check_sandwich, few),
        ("divergence and log-division witnesses", "norms", check_witnesses, 2),
    ]


def run_selftest(p: int, seed: int, cases: int = SELFTEST_CASES,
                 progress: bool = SELFTEST_PROGRESS) -> List[Dict[str, object]]:
    """
    Run the property suite.

    Args:
        p (int): Prime
        seed (int): Seed of the shared random generator
        cases (int, optional): Base number of random cases per check
        progress (bool, optional): Draw a tqdm progress bar on stderr

    Returns:
        List[Dict[str, object]]: One row per check with "anchor", "check", "cases", "passed"
    """
    clear_caches()
    rng = random.Random(seed)
    rows = []
    for anchor, name, check, n in tqdm(suite(cases), desc="selftest", disable=not progress):
        passed = sum(1 for _ in range(n) if check(rng, p))
        if passed != n:
            logger.warning(f"{name}: {anchor} failed {n - passed} of {n} cases")
        rows.append({"anchor": anchor, "check": name, "cases": n, "passed": passed})
    logger.debug(f"cache entries after selftest: {cache_sizes()}")
    return rows
