"""
p-adic Arithmetic Service for PhiGamma

This module exposes scalar arithmetic, binomial coefficients of p-adic
integers and arithmetic of norm values.
"""
import logging
from functools import reduce
from typing import Union

import sympy

from models.padic import NormValue, PadicScalar
from utils.errors import PrecisionExhausted

# Set up logging
logger = logging.getLogger(__name__)

_SCALAR_OPS = {
    "add": lambda x, y: x + y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}


def scalar_arith(op: str, x: PadicScalar, y: PadicScalar = None) -> PadicScalar:
    """
    Apply a ring operation to p-adic scalars.

    Args:
        op (str): One of "add", "mul", "neg", "div"
        x (PadicScalar): First operand
        y (PadicScalar, optional): Second operand (ignored for "neg")

    Returns:
        PadicScalar: The result at the propagated precision
    """
    if op == "neg":
        return -x
    if op not in _SCALAR_OPS:
        raise ValueError(f"Unknown scalar operation: {op}")
    if x.p != y.p:
        raise ValueError(f"Mismatched primes {x.p} and {y.p}")
    return _SCALAR_OPS[op](x, y)


def binom(a: PadicScalar, k: int) -> PadicScalar:
    """
    Binomial coefficient C(a, k) of a p-adic integer.

    Args:
        a (PadicScalar): A scalar with non-negative valuation
        k (int): A natural number

    Returns:
        PadicScalar: a(a-1)...(a-k+1)/k! at the propagated precision
    """
    if not a.zero and a.v < 0:
        raise ValueError(f"binom needs a p-adic integer, got valuation {a.v}")
    p = a.p
    if k == 0:
        return PadicScalar.from_value(p, 1, max(a.abs_prec, 1))

    target = a.abs_prec
    numerator = reduce(
        lambda acc, i: acc * (a + PadicScalar.from_absolute(p, -i, target)),
        range(1, k),
        a,
    )
    factorial = int(sympy.factorial(k))
    denominator = PadicScalar.from_value(p, factorial, max(target + k, 1))
    result = numerator / denominator
    if result.zero and result.abs_prec <= 0:
        raise PrecisionExhausted(f"C(a, {k}) has no significant digit left")
    return result


def norm_arith(op: str, *values: NormValue, k: int = 1) -> Union[NormValue, int]:
    """
    Arithmetic of exact norm values.

    Args:
        op (str): One of "mul", "max", "cmp", "pow"
        *values (NormValue): Operands
        k (int, optional): Exponent for "pow"

    Returns:
        NormValue for mul/max/pow; -1, 0 or 1 for cmp
    """
    if op == "mul":
        return reduce(lambda a, b: a * b, values, NormValue.of(0))
    if op == "max":
        return reduce(lambda a, b: a.max(b), values, NormValue.zero())
    if op == "pow":
        (value,) = values
        return value ** k
    if op == "cmp":
        left, right = values
        return (left > right) - (left < right)
    raise ValueError(f"Unknown norm operation: {op}")
