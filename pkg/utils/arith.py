"""
Exact p-adic helpers on rationals.

Coefficients throughout the kernel are Fractions whose canonical
representative modulo p^N is computed here.
"""
from fractions import Fraction
from typing import Optional, Union

import sympy

from utils.caching import memoized

Number = Union[int, Fraction]


def valuation(p: int, x: Number) -> Optional[int]:
    """Return val_p(x), or None for x = 0."""
    x = Fraction(x)
    if x == 0:
        return None
    return int(sympy.multiplicity(p, x.numerator)) - int(sympy.multiplicity(p, x.denominator))


def split_unit(p: int, x: Number):
    """Write a nonzero x as p^v * a / b with a, b prime to p; returns (v, a, b)."""
    x = Fraction(x)
    v = valuation(p, x)
    num, den = x.numerator, x.denominator
    if v >= 0:
        num //= p ** v
    else:
        den //= p ** (-v)
    return v, num, den


def reduce_mod(p: int, x: Number, prec: int) -> Fraction:
    """
    Canonical representative of x modulo p^prec.

    The representative is r * p^v with v = val(x) and 0 < r < p^(prec - v),
    so two rationals congruent modulo p^prec reduce to the same value.
    """
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    v, a, b = split_unit(p, x)
    if v >= prec:
        return Fraction(0)
    m = p ** (prec - v)
    r = a * pow(b, -1, m) % m
    return Fraction(r) * Fraction(p) ** v


def p_power(p: int, e: int) -> Fraction:
    """p^e as an exact rational."""
    return Fraction(p) ** e


@memoized("binomial")
def binomial_int(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) for any integer n (generalized to n < 0)."""
    if k < 0:
        return 0
    return int(sympy.binomial(n, k))


def binomial_frac(a: Fraction, k: int) -> Fraction:
    """C(a, k) for rational a."""
    out = Fraction(1)
    for i in range(k):
        out = out * (a - i) / (i + 1)
    return out


def integer_log(p: int, n: int) -> int:
    """floor(log_p n) for n >= 1."""
    return int(sympy.integer_log(n, p)[0])


def ceil_log(p: int, n: int) -> int:
    """ceil(log_p n) for n >= 1."""
    e, exact = sympy.integer_log(n, p)
    return int(e) if exact else int(e) + 1
