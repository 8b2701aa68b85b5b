"""
Phi-Module Service for PhiGamma

This module handles the equivalence between etale (phi, T+)-modules over the
series rings and modules over the finite levels of the skew group ring: the
functors D and M_k, the basis change id + X that removes the I_1 part of the
Frobenius matrix, its inverse id + Y, and the residual checks that certify
both.
"""
import logging
import operator
from functools import reduce
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

# Import configuration
from config.settings import MAX_NEUMANN_TERMS

from models.groups import QuotientSpec, TorusElt
from models.modules import SeriesModule, SkewModuleLevel, SolverReport
from models.series import LaurentSeries
from models.skew import SkewElt
from services.series_service import frobenius_series, ser_invert, tplus_act_series
from services.skew_service import (
    ideal_member,
    reduce_level,
    skew_mul,
    skew_phi,
    skew_phi_t,
    skew_scalar,
)
from utils.errors import NotAUnit, NotEtale, WindowUnderflow

# Set up logging
logger = logging.getLogger(__name__)

Matrix = List[List]


# Matrix helpers


def mat_map(fn: Callable, a: Sequence[Sequence]) -> Matrix:
    return [[fn(e) for e in row] for row in a]


def mat_add(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence],
            mul: Callable = operator.mul) -> Matrix:
    """Matrix product with entry multiplication ``mul``."""
    n, m = len(a), len(b[0])
    return [
        [reduce(operator.add, [mul(a[i][l], b[l][j]) for l in range(len(b))]) for j in range(m)]
        for i in range(n)
    ]


def mat_is_zero(a: Sequence[Sequence]) -> bool:
    return all(e.is_zero for row in a for e in row)


def series_identity(p: int, prec: int, rank: int) -> Matrix:
    return [[LaurentSeries.constant(p, 1 if i == j else 0, prec) for j in range(rank)]
            for i in range(rank)]


def skew_identity(group: str, p: int, level: int, prec: int, rank: int) -> Matrix:
    return iota_matrix(series_identity(p, prec, rank), group, level)


def skew_mat_mul(a: Sequence[Sequence[SkewElt]], b: Sequence[Sequence[SkewElt]]) -> Matrix:
    return mat_mul(a, b, skew_mul)


def skew_mat_phi(a: Sequence[Sequence[SkewElt]]) -> Matrix:
    return mat_map(skew_phi, a)


def series_matrix_inverse(a: Sequence[Sequence[LaurentSeries]]) -> Matrix:
    """
    Gauss-Jordan inversion over the coefficient ring.

    A pivot is any entry of the working column that ser_invert accepts.

    Args:
        a (Sequence): Square matrix of series

    Returns:
        Matrix: The inverse

    Raises:
        NotEtale: No invertible pivot exists in some column
    """
    rank = len(a)
    p = a[0][0].p
    prec = min(e.prec for row in a for e in row)
    work = [list(row) for row in a]
    inv = series_identity(p, prec, rank)
    for col in range(rank):
        pivot_row, pivot_inv = None, None
        for r in range(col, rank):
            if work[r][col].is_zero:
                continue
            try:
                pivot_inv = ser_invert(work[r][col])
            except (NotAUnit, WindowUnderflow):
                continue
            pivot_row = r
            break
        if pivot_row is None:
            raise NotEtale(f"no invertible pivot in column {col}")
        work[col], work[pivot_row] = work[pivot_row], work[col]
        inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        work[col] = [pivot_inv * e for e in work[col]]
        inv[col] = [pivot_inv * e for e in inv[col]]
        for r in range(rank):
            if r == col or work[r][col].is_zero:
                continue
            factor = work[r][col]
            work[r] = [e - factor * f for e, f in zip(work[r], work[col])]
            inv[r] = [e - factor * f for e, f in zip(inv[r], inv[col])]
    return inv


def unipotent_inverse(e: Sequence[Sequence[SkewElt]], group: str, p: int, level: int,
                      prec: int) -> Matrix:
    """
    (id + E)^-1 for E with entries in I_1.

    Uses sum_{n < 2^J} (-E)^n = prod_{j < J} (id + (-E)^(2^j)) and stops once
    (-E)^(2^J) vanishes at precision.

    Raises:
        NotEtale: More than MAX_NEUMANN_TERMS terms would be needed
    """
    rank = len(e)
    one = skew_identity(group, p, level, prec, rank)
    power = mat_map(operator.neg, e)
    result = one
    terms = 1
    while not mat_is_zero(power):
        if terms * 2 > MAX_NEUMANN_TERMS:
            raise NotEtale(f"Neumann series did not terminate within {MAX_NEUMANN_TERMS} terms")
        result = skew_mat_mul(result, mat_add(one, power))
        power = skew_mat_mul(power, power)
        terms *= 2
    logger.debug(f"Neumann series terminated after {terms} terms")
    return result


# Functors


def ell_matrix(P: Sequence[Sequence[SkewElt]]) -> Matrix:
    """Entrywise ell: the coefficient of the trivial class at level 1."""
    prec = min((x.prec for row in P for x in row if x.prec is not None), default=1)
    out = []
    for row in P:
        out_row = []
        for x in row:
            reduced = reduce_level(x, 1)
            term = reduced.term(QuotientSpec(x.group, x.p, 1).identity)
            out_row.append(term if term is not None else LaurentSeries.zero(x.p, prec))
        out.append(out_row)
    return out


def iota_matrix(a: Sequence[Sequence[LaurentSeries]], group: str, level: int) -> Matrix:
    """Entrywise embedding r -> r * 1."""
    return mat_map(lambda r: skew_scalar(r, group, level), a)


def functor_D(M: SkewModuleLevel) -> SeriesModule:
    """
    D(M) = R tensor M: the module with matrices ell(P) and ell(P_t).

    Raises:
        NotEtale: ell(P) is not invertible
    """
    A = ell_matrix(M.P)
    series_matrix_inverse(A)
    actions = tuple((t, ell_matrix(m)) for t, m in M.actions)
    return SeriesModule(M.rank, A, actions)


def functor_M(D: SeriesModule, group: str, level: int) -> SkewModuleLevel:
    """M_k(D) = R[H1/H_k] tensor D with matrices iota(A) and iota(A_t)."""
    p = D.phi[0][0].p
    actions = tuple((t, iota_matrix(m, group, level)) for t, m in D.actions)
    return SkewModuleLevel(group, p, level, D.rank, iota_matrix(D.phi, group, level), actions)


def split_matrix(M: SkewModuleLevel) -> Tuple[Matrix, Matrix, Matrix]:
    """P = A + B with A = iota(ell(P)) and B in I_1; also returns A^-1."""
    A_series = ell_matrix(M.P)
    A_inv = iota_matrix(series_matrix_inverse(A_series), M.group, M.level)
    A = iota_matrix(A_series, M.group, M.level)
    B = mat_sub(M.P, A)
    return A, B, A_inv


def _module_prec(M: SkewModuleLevel) -> int:
    return min(x.prec for row in M.P for x in row if x.prec is not None)


# Basis change


def solve_X(M: SkewModuleLevel, extra: int = 0) -> Tuple[Matrix, List[Matrix]]:
    """
    Solve phi(id + X)(A + B) = A(id + X) modulo I_k.

    X = sum_{j < k-1} A^-1 phi(A^-1) ... phi^j(A^-1 B) phi^(j-1)(A + B) ... (A + B),
    built from term_0 = A^-1 B and term_j = A^-1 phi(term_(j-1)) (A + B).

    Args:
        M (SkewModuleLevel): Module at level k
        extra (int, optional): Additional terms beyond k - 1 (all vanish mod I_k)

    Returns:
        Tuple: (X, terms)
    """
    A, B, A_inv = split_matrix(M)
    term = skew_mat_mul(A_inv, B)
    terms = [term]
    for _ in range(1, max(M.level - 1, 1) + extra):
        term = skew_mat_mul(skew_mat_mul(A_inv, skew_mat_phi(term)), M.P)
        terms.append(term)
    X = reduce(mat_add, terms)
    logger.info(f"solved X at level {M.level} with {len(terms)} terms")
    return X, terms


def sum_inverse(M: SkewModuleLevel) -> Matrix:
    """(A + B)^-1 = (id + A^-1 B)^-1 A^-1."""
    _, B, A_inv = split_matrix(M)
    E = skew_mat_mul(A_inv, B)
    return skew_mat_mul(unipotent_inverse(E, M.group, M.p, M.level, _module_prec(M)), A_inv)


def solve_Y(M: SkewModuleLevel, extra: int = 0) -> Tuple[Matrix, List[Matrix]]:
    """
    Solve (A + B)(id + Y) = phi(id + Y)A modulo I_k.

    term_0 = -(A + B)^-1 B and term_j = (A + B)^-1 phi(term_(j-1)) A.

    Returns:
        Tuple: (Y, terms)
    """
    A, B, _ = split_matrix(M)
    P_inv = sum_inverse(M)
    term = mat_map(operator.neg, skew_mat_mul(P_inv, B))
    terms = [term]
    for _ in range(1, max(M.level - 1, 1) + extra):
        term = skew_mat_mul(skew_mat_mul(P_inv, skew_mat_phi(term)), A)
        terms.append(term)
    Y = reduce(mat_add, terms)
    logger.info(f"solved Y at level {M.level} with {len(terms)} terms")
    return Y, terms


def _matrix_phi_t(t: TorusElt, a: Sequence[Sequence[SkewElt]]) -> Matrix:
    return mat_map(lambda x: skew_phi_t(t, x), a)


def _term_in_ideal(x: SkewElt, depth: int) -> bool:
    """x lies in I_depth; at depth >= level this means x vanishes."""
    return ideal_member(x, depth) if depth < x.level else x.is_zero


def theta_verify(M: SkewModuleLevel, X: Matrix, x_terms: Optional[Sequence[Matrix]] = None,
                 Y: Optional[Matrix] = None, y_terms: Optional[Sequence[Matrix]] = None) -> SolverReport:
    """
    Check the basis change eta = (id + X) e for a given X.

    Residuals: the X and Y equations, (id + X)(id + Y) = id, and for each
    tracked t that phi_t has matrix iota(ell(P_t)) in the basis eta.
    Term checks: term j of X and of Y lies in I_(j+1).

    Args:
        M (SkewModuleLevel): Module at level k
        X (Matrix): Basis change to verify
        x_terms (Sequence, optional): Terms of X for the ideal checks
        Y (Matrix, optional): Inverse part; solved with solve_Y when omitted
        y_terms (Sequence, optional): Terms of Y, used together with Y

    Returns:
        SolverReport: All residuals at level k
    """
    report = SolverReport(level=M.level)
    prec = _module_prec(M)
    one = skew_identity(M.group, M.p, M.level, prec, M.rank)
    A, _, _ = split_matrix(M)
    if Y is None:
        Y, y_terms = solve_Y(M)
    Z = mat_add(one, X)
    W = mat_add(one, Y)

    lhs = skew_mat_mul(skew_mat_phi(Z), M.P)
    report.residuals["x_equation"] = mat_is_zero(mat_sub(lhs, skew_mat_mul(A, Z)))
    lhs = skew_mat_mul(M.P, W)
    report.residuals["y_equation"] = mat_is_zero(mat_sub(lhs, skew_mat_mul(skew_mat_phi(W), A)))
    report.residuals["inverse"] = mat_is_zero(mat_sub(skew_mat_mul(Z, W), one))
    for t, P_t in M.actions:
        transported = skew_mat_mul(skew_mat_mul(_matrix_phi_t(t, Z), P_t), W)
        expected = iota_matrix(ell_matrix(P_t), M.group, M.level)
        report.residuals[f"phi_t{list(t.valuations)}"] = mat_is_zero(mat_sub(transported, expected))

    for terms in (x_terms or [], y_terms or []):
        for j, term in enumerate(terms):
            report.term_levels.append(all(_term_in_ideal(x, j + 1) for row in term for x in row))
    if not report.ok:
        logger.warning(f"basis change residuals failed: {report.as_dict()}")
    return report


def etale_check(module: Union[SeriesModule, SkewModuleLevel],
                t: Optional[TorusElt] = None) -> Dict[str, object]:
    """
    Whether the matrix of phi (or phi_t) is invertible over the series ring.

    Skew modules are tested through ell, since I_1 is topologically nilpotent.

    Returns:
        Dict: {"ok": bool, "reason": str}
    """
    if isinstance(module, SkewModuleLevel):
        matrix = ell_matrix(module.P if t is None else module.action(t))
    else:
        matrix = module.phi if t is None else module.action(t)
    try:
        inverse = series_matrix_inverse(matrix)
    except NotEtale as e:
        return {"ok": False, "reason": str(e)}
    p = matrix[0][0].p
    prec = min(e.prec for row in matrix for e in row)
    product = mat_mul(matrix, inverse)
    if not all(x.agrees_with(y) for rx, ry in zip(product, series_identity(p, prec, len(matrix)))
               for x, y in zip(rx, ry)):
        return {"ok": False, "reason": "inverse does not reproduce the identity at precision"}
    return {"ok": True, "reason": ""}


def compatibility_residual(module: Union[SeriesModule, SkewModuleLevel], t: TorusElt) -> bool:
    """
    phi_t(A) A_t = phi(A_t) A for t commuting with s.

    Returns:
        bool: True iff the residual vanishes at precision
    """
    if isinstance(module, SkewModuleLevel):
        A, A_t = module.P, module.action(t)
        lhs = skew_mat_mul(_matrix_phi_t(t, A), A_t)
        rhs = skew_mat_mul(skew_mat_phi(A_t), A)
    else:
        A, A_t = module.phi, module.action(t)
        lhs = mat_mul(mat_map(lambda f: tplus_act_series(t, f), A), A_t)
        rhs = mat_mul(mat_map(frobenius_series, A_t), A)
    residual = mat_sub(lhs, rhs)
    return mat_is_zero(residual)


def base_change(D: SeriesModule, W: Sequence[Sequence[SkewElt]], group: str,
                level: int) -> Tuple[SkewModuleLevel, Matrix]:
    """
    Twist M_k(D) by Z = id + W with W in I_1.

    The returned module has P = phi(Z) iota(A) Z^-1 and P_t = phi_t(Z) iota(A_t) Z^-1,
    so that (id + X) = Z^-1 is the basis change recovering M_k(D).

    Returns:
        Tuple: (module, Z^-1)
    """
    base = functor_M(D, group, level)
    prec = _module_prec(base)
    one = skew_identity(group, base.p, level, prec, D.rank)
    Z = mat_add(one, W)
    Z_inv = unipotent_inverse(W, group, base.p, level, prec)
    P = skew_mat_mul(skew_mat_mul(skew_mat_phi(Z), base.P), Z_inv)
    actions = tuple(
        (t, skew_mat_mul(skew_mat_mul(_matrix_phi_t(t, Z), m), Z_inv)) for t, m in base.actions
    )
    return SkewModuleLevel(group, base.p, level, D.rank, P, actions), Z_inv
