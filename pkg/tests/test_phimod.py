from models.modules import SeriesModule, SkewModuleLevel
from models.series import IWASAWA, Certificate, LaurentSeries
from models.skew import SkewElt
from services.group_service import datum_for, s_bar
from services.phimod_service import (
    base_change,
    compatibility_residual,
    etale_check,
    functor_D,
    functor_M,
    skew_identity,
    solve_X,
    solve_Y,
    theta_verify,
    unipotent_inverse,
)
from services.skew_service import group_minus_one, skew_scalar


def constant(p, c, prec=3):
    return LaurentSeries.constant(p, c, prec)


def monomial(p, level, key, c=1, prec=3):
    return SkewElt.monomial("GL3", p, level, key, constant(p, c, prec))


def test_frobenius_without_i1_part_needs_no_change():
    P = [[skew_scalar(LaurentSeries.build(3, {0: 1, 1: 1}, 3), "GL3", 2)]]
    M = SkewModuleLevel("GL3", 3, 2, 1, P)
    X, terms = solve_X(M)
    assert X[0][0].is_zero
    assert theta_verify(M, X, terms).ok


def test_rank_one_group_element():
    p, level, h = 3, 2, (0, 1)
    M = SkewModuleLevel("GL3", p, level, 1, [[monomial(p, level, h)]])
    X, terms = solve_X(M)
    Y, _ = solve_Y(M)
    assert len(terms) == 1
    assert X[0][0].agrees_with(group_minus_one("GL3", p, level, h, 3))
    assert Y[0][0].agrees_with(group_minus_one("GL3", p, level, (0, 2), 3))
    report = theta_verify(M, X, terms)
    assert report.ok
    assert set(report.residuals) == {"x_equation", "y_equation", "inverse"}


def test_wrong_basis_change_fails_the_x_equation():
    p, level = 3, 2
    M = SkewModuleLevel("GL3", p, level, 1, [[monomial(p, level, (0, 1))]])
    zero = [[SkewElt.zero("GL3", p, level, 3)]]
    report = theta_verify(M, zero)
    assert not report.residuals["x_equation"]
    assert not report.ok


def test_neumann_inverse_of_a_group_element():
    p, level = 3, 2
    W = [[group_minus_one("GL3", p, level, (0, 1), 4)]]
    inv = unipotent_inverse(W, "GL3", p, level, 4)[0][0]
    assert inv.agrees_with(monomial(p, level, (0, 2), prec=4))
    assert inv.term((0, 0)) is None
    assert inv.term((0, 1)) is None
    assert inv.prec == 4


def test_rank_two_with_twisted_coefficients():
    p, level, h = 2, 3, (1, 0)
    t = LaurentSeries.build(p, {1: 1}, 3)
    corner = group_minus_one("GL3", p, level, h, 3).left_scale(t)
    one = skew_scalar(constant(p, 1), "GL3", level)
    zero = SkewElt.zero("GL3", p, level)
    M = SkewModuleLevel("GL3", p, level, 2, [[one, corner], [zero, monomial(p, level, h)]])
    X, terms = solve_X(M)
    assert len(terms) == level - 1
    report = theta_verify(M, X, terms)
    assert report.ok
    assert report.term_levels == [True] * 4


def test_extra_terms_vanish_at_the_level():
    p, level = 3, 2
    M = SkewModuleLevel("GL3", p, level, 1, [[monomial(p, level, (1, 1))]])
    X, _ = solve_X(M)
    X_more, terms = solve_X(M, extra=2)
    assert len(terms) == 3
    assert X_more[0][0].agrees_with(X[0][0])


def test_functors_round_trip():
    D = SeriesModule(1, [[LaurentSeries.build(3, {0: 1, 1: 1}, 3)]])
    M = functor_M(D, "GL3", 2)
    assert functor_D(M).phi[0][0].agrees_with(D.phi[0][0])


def test_base_change_is_undone_by_x():
    p, level, h = 3, 2, (0, 1)
    sb = s_bar(datum_for("GL3"), p)
    D = SeriesModule(1, [[constant(p, 1)]], [(sb, [[constant(p, 1)]])])
    assert compatibility_residual(D, sb)
    W = [[group_minus_one("GL3", p, level, h, 3)]]
    M, Z_inv = base_change(D, W, "GL3", level)
    X, terms = solve_X(M)
    one = skew_identity("GL3", p, level, 3, 1)
    assert Z_inv[0][0].agrees_with(one[0][0] + X[0][0])
    report = theta_verify(M, X, terms)
    assert report.ok
    assert f"phi_t{list(sb.valuations)}" in report.residuals


def test_etale_check():
    identity = SeriesModule(1, [[constant(3, 1)]])
    assert etale_check(identity)["ok"]
    t = LaurentSeries.monomial(3, 1, 3, cert=Certificate(IWASAWA))
    verdict = etale_check(SeriesModule(1, [[t]]))
    assert not verdict["ok"]
    assert verdict["reason"]


def test_etale_check_through_ell():
    M = SkewModuleLevel("GL3", 3, 2, 1, [[monomial(3, 2, (1, 0), c=3)]])
    assert not etale_check(M)["ok"]
    assert etale_check(SkewModuleLevel("GL3", 3, 2, 1, [[monomial(3, 2, (1, 0))]]))["ok"]
