from fractions import Fraction

import pytest

from models.groups import TorusElt
from models.series import E_DAGGER, IWASAWA, OE, Certificate, LaurentSeries
from services.group_service import datum_for, s_bar, s_element
from services.series_service import (
    cert_check,
    etale_decompose,
    etale_recombine,
    frobenius_series,
    gamma_act,
    psi_series,
    ser_invert,
    ser_subst,
    tplus_act_series,
)
from utils.errors import IncompatibleClasses, NotAUnit


def poly(p, coeffs, prec=4, **kwargs):
    return LaurentSeries.build(p, coeffs, prec, **kwargs)


def T(p, prec=4, cert=None):
    return LaurentSeries.monomial(p, 1, prec, cert=cert)


def random_series(rng, p, prec=4, lo=-4, hi=16):
    return LaurentSeries.build(p, {n: rng.randrange(p ** prec) for n in range(lo, hi)}, prec, lo, hi)


def test_products():
    assert (T(3) * T(3)).agrees_with(LaurentSeries.monomial(3, 2, 4))
    inverse_t = LaurentSeries.monomial(3, -1, 4)
    assert (inverse_t * poly(3, {2: 1, 1: 3})).agrees_with(poly(3, {1: 1, 0: 3}))


def test_product_window_is_the_smaller_one():
    f = poly(2, {0: 1, 1: 1}, hi=10)
    g = poly(2, {0: 1}, hi=6)
    assert (f * g).hi == 6


def test_invert_monomial_is_exact():
    inv = ser_invert(T(5))
    assert inv.exact
    assert inv.agrees_with(LaurentSeries.monomial(5, -1, 4))


def test_invert_one_plus_t():
    f = poly(3, {0: 1, 1: 1})
    inv = ser_invert(f)
    for n in range(6):
        assert inv.coeff(n) == Fraction(1 if n % 2 == 0 else 3 ** 4 - 1)
    assert (f * inv).agrees_with(LaurentSeries.constant(3, 1, 4))


def test_invert_with_non_unit_low_term():
    f = poly(2, {2: 1, 1: 2}, prec=3)
    inv = ser_invert(f)
    assert inv.agrees_with(poly(2, {-2: 1, -3: -2, -4: 4}, prec=3))
    assert (f * inv).agrees_with(LaurentSeries.constant(2, 1, 3))


def test_invert_t_fails_in_iwasawa_model():
    with pytest.raises(NotAUnit):
        ser_invert(T(3, cert=Certificate(IWASAWA)))


def test_subst_of_t_is_identity():
    g = poly(2, {1: 2, 2: 1})
    assert ser_subst(T(2), g).agrees_with(g)


def test_subst_into_inverse_t_inverts():
    g = poly(2, {2: 1, 1: 2}, prec=3)
    out = ser_subst(LaurentSeries.monomial(2, -1, 3), g)
    assert out.agrees_with(poly(2, {-2: 1, -3: -2, -4: 4}, prec=3))
    assert out.agrees_with(ser_invert(g))


def test_frobenius():
    assert frobenius_series(LaurentSeries.constant(2, 1, 4)).agrees_with(LaurentSeries.constant(2, 1, 4))
    assert frobenius_series(T(2)).agrees_with(poly(2, {2: 1, 1: 2}))
    assert frobenius_series(T(2), 2).agrees_with(poly(2, {4: 1, 3: 4, 2: 6, 1: 4}))


def test_gamma_minus_one():
    image = gamma_act(-1, T(3))
    for n in range(1, 8):
        assert image.coeff(n) == Fraction((-1) ** n) % 3 ** 4


def test_gamma_round_trip(rng):
    f = poly(2, {n: rng.randrange(32) for n in range(6)}, prec=5)
    back = gamma_act(Fraction(1, 3), gamma_act(3, f))
    assert back.agrees_with(f)


def test_tplus_action_through_alpha():
    datum = datum_for("GL3")
    f = poly(2, {0: 1, 1: 3, 3: 1})
    assert tplus_act_series(s_element(datum, 2), f).agrees_with(frobenius_series(f))
    assert tplus_act_series(s_bar(datum, 2), f).agrees_with(f)
    assert tplus_act_series(TorusElt(2, (3, 1, 1)), f).agrees_with(gamma_act(3, f))


def test_decompose_constant():
    parts = etale_decompose(LaurentSeries.constant(3, 1, 4), 1)
    assert parts[0].agrees_with(LaurentSeries.constant(3, 1, 4))
    assert all(r.is_zero for r in parts[1:])


def test_decompose_t_at_two():
    r0, r1 = etale_decompose(T(2), 1)
    assert r0.agrees_with(LaurentSeries.constant(2, -1, 4))
    assert r1.agrees_with(LaurentSeries.constant(2, 1, 4))


def test_decompose_inverse_t_at_two():
    inverse_t = LaurentSeries.monomial(2, -1, 4)
    r0, r1 = etale_decompose(inverse_t, 1)
    assert r0.agrees_with(inverse_t)
    assert r1.agrees_with(inverse_t)


def test_recombine_units():
    parts = [LaurentSeries.constant(2, -1, 4), LaurentSeries.constant(2, 1, 4)]
    assert etale_recombine(parts, 1).agrees_with(T(2))


def test_recombine_decompose_random(rng, prime):
    for _ in range(10):
        f = random_series(rng, prime)
        assert etale_recombine(etale_decompose(f, 1), 1).agrees_with(f)


def test_depth_two_is_iterated_depth_one(rng, prime):
    f = poly(prime, {n: rng.randrange(prime ** 4) for n in range(12)})
    deep = etale_decompose(f, 2)
    for k, s_k in enumerate(etale_decompose(f, 1)):
        for j, s_kj in enumerate(etale_decompose(s_k, 1)):
            assert deep[k + prime * j].agrees_with(s_kj)


def test_psi_inverts_phi(rng):
    f = poly(3, {n: rng.randrange(81) for n in range(-2, 5)})
    assert psi_series(frobenius_series(f)).agrees_with(f)


def test_certificate_lattice():
    assert Certificate(IWASAWA).join(Certificate(E_DAGGER)).tag == E_DAGGER
    with pytest.raises(IncompatibleClasses):
        Certificate(OE).join(Certificate(E_DAGGER))


def test_cert_check_rejects_negative_exponents_in_iwasawa():
    f = LaurentSeries.monomial(3, -1, 4, cert=Certificate(IWASAWA))
    assert not cert_check(f)["ok"]
    assert cert_check(T(3))["ok"]
