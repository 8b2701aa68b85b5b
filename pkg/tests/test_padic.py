from fractions import Fraction

import pytest

from models.padic import NormValue, PadicScalar, RhoExponent
from services.padic_service import binom, norm_arith, scalar_arith
from utils.arith import ceil_log, integer_log, reduce_mod, valuation
from utils.errors import DivisionByZeroAtPrecision


def scalar(p, x, N=4):
    return PadicScalar.from_value(p, Fraction(x), N)


def test_add_carries_into_valuation():
    r = scalar_arith("add", scalar(3, 1), scalar(3, 2))
    assert (r.v, r.u) == (1, 1)
    assert r.abs_prec == 4


def test_mul_adds_valuations():
    r = scalar_arith("mul", scalar(2, Fraction(1, 2)), scalar(2, 8))
    assert (r.v, r.u) == (2, 1)


def test_div_inverts_unit_mod_p_power():
    r = scalar_arith("div", scalar(2, 1), scalar(2, 3))
    assert (r.v, r.u, r.N) == (0, 11, 4)


def test_div_by_zero_at_precision():
    with pytest.raises(DivisionByZeroAtPrecision):
        scalar_arith("div", scalar(3, 1), PadicScalar.zero_at(3, 5))


def test_division_round_trip(rng, prime):
    for _ in range(20):
        x = scalar(prime, rng.randrange(1, prime ** 6), 5)
        y = scalar(prime, rng.randrange(1, prime ** 6), 5)
        assert scalar_arith("mul", scalar_arith("div", x, y), y) == x


def test_equality_is_at_common_precision():
    assert scalar(3, 1, 2) == scalar(3, 10, 4)
    assert not scalar(3, 1, 3) == scalar(3, 10, 4)


def test_zero_keeps_certified_precision():
    z = scalar_arith("add", scalar(3, 1), scalar(3, -1))
    assert z.zero
    assert z.abs_prec == 4


@pytest.mark.parametrize("a, k, expected", [(3, 0, 1), (2, 1, 2), (-1, 2, 1), (5, 2, 10)])
def test_binom(a, k, expected):
    assert binom(scalar(2, a), k) == scalar(2, expected)


def test_binom_rejects_non_integers():
    with pytest.raises(ValueError):
        binom(scalar(3, Fraction(1, 3)), 2)


def test_norm_arith():
    half = NormValue.of(Fraction(1, 2))
    assert norm_arith("mul", half, half) == NormValue.of(1)
    assert norm_arith("max", NormValue.zero(), NormValue.of(3)) == NormValue.of(3)
    assert norm_arith("pow", NormValue.of(Fraction(1, 8)), k=9) == NormValue.of(Fraction(9, 8))
    assert norm_arith("cmp", NormValue.of(1), half) == -1


def test_norm_order():
    assert NormValue.zero() < NormValue.of(100)
    assert NormValue.of(2) < NormValue.of(1)
    assert NormValue.of(1).max(NormValue.of(2)) == NormValue.of(1)


def test_rho_exponent_range():
    assert RhoExponent(Fraction(1, 2)).value == NormValue.of(Fraction(1, 2))
    for bad in (0, 1, Fraction(3, 2)):
        with pytest.raises(ValueError):
            RhoExponent(bad)


def test_arith_helpers():
    assert valuation(2, Fraction(3, 8)) == -3
    assert valuation(5, 0) is None
    assert reduce_mod(3, Fraction(1, 2), 2) == 5
    assert reduce_mod(3, 9, 2) == 0
    assert integer_log(2, 3) == 1
    assert ceil_log(2, 3) == 2
    assert ceil_log(3, 9) == 2
    assert ceil_log(5, 1) == 0
