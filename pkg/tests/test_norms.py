from fractions import Fraction

import pytest

from models.dist import DistElt
from models.groups import TorusElt
from models.padic import NormValue, RhoExponent
from models.region import Region
from models.series import ROBBA, LaurentSeries
from services.dist_service import dist_convert, dist_mul
from services.group_service import datum_for, s_bar, s_element
from services.norm_service import (
    coeff_class_check,
    expanded_norm,
    log_division_check,
    phi_t_monomial_isometry,
    phi_t_norm_closed,
    pi_H_map,
    region_of_t,
    sandwich,
    spectral_norm,
    t_of_region,
    witness_series_ex,
)
from services.skew_service import group_minus_one, skew_scalar
from utils.errors import NotInTPlus, PrecisionExhausted, WindowInsufficient

ALPHA, BETA, GAMMA = (0, 1), (1, 2), (0, 2)
GENERATORS = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 2, 0), (0, 0, 2), (1, 1, 1)]


def rho(a, b=1):
    return RhoExponent(Fraction(a, b))


def random_polynomial(rng, p, prec, size=3, degree=6):
    coeffs = {}
    for n in range(size):
        total = rng.randrange(1, degree + 1)
        i = rng.randrange(total + 1)
        j = rng.randrange(total - i + 1)
        coeffs.setdefault((i, j, total - i - j), 1 if n == 0 else rng.randrange(1, p ** prec))
    return DistElt.from_monomials("GL3", p, prec, coeffs)


def test_spectral_norm_of_b_alpha():
    b = DistElt.from_monomials("GL3", 3, 4, {(0, 0, 1): 1})
    assert spectral_norm(b, rho(1, 2)) == NormValue.of(Fraction(1, 2))


def test_spectral_norm_with_negative_alpha_power():
    x = DistElt.from_monomials("GL3", 3, 4, {(0, 0, -1): 3})
    assert spectral_norm(x, rho(1, 4)) == NormValue.of(Fraction(3, 4))


def test_spectral_norm_over_a_pair_of_radii():
    x = DistElt.from_monomials("GL3", 2, 4, {(0, 0, 1): 1, (0, 0, 0): 2})
    assert spectral_norm(x, (rho(1, 2), rho(1, 4))) == NormValue.of(Fraction(1, 4))


def test_truncated_window_must_dominate():
    x = DistElt.from_monomials("GL2", 2, 2, {(3,): 1}, degree=3)
    with pytest.raises(WindowInsufficient):
        spectral_norm(x, rho(3, 4))


@pytest.mark.parametrize("p, root, e, expected", [
    (2, ALPHA, Fraction(1, 2), 1),
    (3, GAMMA, Fraction(1, 8), Fraction(9, 8)),
])
def test_closed_form_examples(p, root, e, expected):
    s = s_element(datum_for("GL3"), p)
    assert phi_t_norm_closed(root, s, RhoExponent(e)) == NormValue.of(expected)


def test_closed_form_matches_expansion(prime):
    datum = datum_for("GL3")
    for t in (s_element(datum, prime), s_bar(datum, prime), s_element(datum, prime) * s_bar(datum, prime)):
        for e in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
            for root in datum.positive:
                n = int(t.root_value(root))
                assert phi_t_norm_closed(root, t, RhoExponent(e)) == expanded_norm(prime, n, RhoExponent(e))


def test_gl2_sandwich_for_b():
    s = s_element(datum_for("GL2"), 2)
    b = DistElt.from_vector("GL2", 2, 2, (4,), {(1,): 1, (0,): -1})
    bounds = sandwich(b, s, rho(1, 2))
    assert bounds["holds"]
    assert bounds["lower"] == NormValue.of(Fraction(1, 2))
    assert bounds["middle"] == NormValue.of(0)
    assert bounds["upper"] == bounds["middle"]
    assert not bounds["tight"]


@pytest.mark.parametrize("p, cases", [(2, 50), (3, 10)])
def test_sandwich_on_random_gl3_polynomials(rng, p, cases):
    s = s_element(datum_for("GL3"), p)
    radius = rho(1, 2 * p ** 2)
    prec = 2
    level = prec + (2 if p == 2 else 1)
    for _ in range(cases):
        x = dist_convert(random_polynomial(rng, p, prec), "to_group", moduli=(level,) * 3)
        bounds = sandwich(x, s, radius)
        assert bounds["holds"], bounds


def test_norm_is_multiplicative_on_generator_pairs(prime):
    for radius in (rho(1, 2), rho(1, 4)):
        for k1 in GENERATORS:
            for k2 in GENERATORS:
                x = DistElt.from_monomials("GL3", prime, 6, {k1: 1})
                y = DistElt.from_monomials("GL3", prime, 6, {k2: 1})
                product = spectral_norm(dist_mul(x, y), radius)
                assert product == spectral_norm(x, radius) * spectral_norm(y, radius), (k1, k2)


def test_region_of_s_bar(prime):
    region = region_of_t(s_bar(datum_for("GL3"), prime))
    assert region.r == prime + 1
    assert region.rho2.e == min(Fraction(1, 2), Fraction(1, prime))


def test_region_of_t_needs_tplus():
    with pytest.raises(NotInTPlus):
        region_of_t(TorusElt.from_valuations(3, (0, 1, 0)))


def test_t_of_region():
    datum = datum_for("GL3")
    assert t_of_region(Region(rho(1, 2), 1), "GL3", 3).diag == s_bar(datum, 3).diag
    assert t_of_region(Region(rho(1, 2), 3), "GL3", 2).diag == (1, 1, Fraction(1, 4))


def test_region_round_trip(prime):
    wanted = Region(rho(1, 2), 5)
    assert region_of_t(t_of_region(wanted, "GL3", prime), wanted.rho2).covers(wanted)


@pytest.mark.parametrize("coeffs, cls, witness", [
    ({(0, 0, 1): 1}, "integral", [0, 0, 1]),
    ({(0, 0, 0): Fraction(1, 3), (0, 0, -1): 1}, "bounded", [0, 0, 0]),
    ({(0, 0, -2): Fraction(1, 9), (0, 0, 0): 1}, "bounded", [0, 0, -2]),
    ({(0, 0, -1): Fraction(1, 27), (0, 0, 0): 1, (1, 0, 0): 1}, "bounded", [0, 0, -1]),
    ({(0, 0, -1): Fraction(1, 3), (0, 0, -2): Fraction(1, 9), (0, 0, -3): Fraction(1, 27)},
     "general", [0, 0, -3]),
    ({(0, 0, -1): Fraction(1, 9), (0, 0, -2): Fraction(1, 3)}, "bounded", [0, 0, -1]),
])
def test_coefficient_classes(coeffs, cls, witness):
    verdict = coeff_class_check(DistElt.from_monomials("GL3", 3, 3, coeffs))
    assert verdict["class"] == cls
    assert verdict["witness"] == witness


def test_pi_h_on_generators():
    p, level, prec = 3, 3, 3
    b_alpha = DistElt.from_monomials("GL3", p, prec, {(0, 0, 1): 1})
    T = LaurentSeries.monomial(p, 1, prec)
    assert pi_H_map(b_alpha, level).agrees_with(skew_scalar(T, "GL3", level))
    b_gamma = DistElt.from_monomials("GL3", p, prec, {(1, 0, 0): 1})
    assert pi_H_map(b_gamma, level).agrees_with(group_minus_one("GL3", p, level, (0, 1), prec))
    b_beta = DistElt.from_monomials("GL3", p, prec, {(0, 1, 0): 1})
    assert pi_H_map(b_beta, level).agrees_with(group_minus_one("GL3", p, level, (p, 0), prec))


def test_pi_h_classes():
    x = DistElt.from_monomials("GL3", 3, 3, {(0, 0, 1): Fraction(1, 3)})
    assert pi_H_map(x, 2).cert.tag == ROBBA
    truncated = DistElt.from_monomials("GL3", 3, 3, {(0, 0, 1): 1}, degree=4)
    with pytest.raises(WindowInsufficient):
        pi_H_map(truncated, 2)


def test_log_division_at_two():
    report = log_division_check(2, 1, 4, 3)
    assert report["exact"][:2] == ["1/2", "-1/2"]
    assert report["bounds"] == [-1, -2, -3, -3, -4]
    assert report["bound_ok"] and report["long_division_ok"] and report["identity_ok"]


@pytest.mark.parametrize("r, m_beta", [(1, 1), (2, 1), (1, 2)])
def test_log_division_bounds(prime, r, m_beta):
    report = log_division_check(prime, r, 10, 3, m_beta)
    assert report["bound_ok"]
    assert report["valuations"][0] == -r * m_beta


def test_log_division_needs_a_digit():
    with pytest.raises(PrecisionExhausted):
        log_division_check(3, 1, 4, 0)


def test_divergence_witness():
    s = s_element(datum_for("GL3"), 2)
    report = witness_series_ex(5, s, rho(1, 2))
    assert [row["transported"] for row in report["rows"]] == [NormValue.of(n) for n in range(1, 6)]
    assert all(row["closed"] == row["transported"] for row in report["rows"])
    assert all(row["plain"] == NormValue.of(0) for row in report["rows"])
    assert report["plain_verdict"] == "not null"
    assert report["transported_verdict"] == "null geometric"


def test_phi_t_monomial_sum_matches_term_max():
    s = s_element(datum_for("GL3"), 3)
    report = phi_t_monomial_isometry([(0, 0, 1), (0, 1, 0)], s, rho(1, 2), "GL3", 6)
    assert report["ok"]
    assert report["term_max"] == NormValue.of(Fraction(3, 2))
    with pytest.raises(NotInTPlus):
        phi_t_monomial_isometry([(0, 0, 1)], TorusElt.from_valuations(3, (0, 1, 0)), rho(1, 2), "GL3", 6)
