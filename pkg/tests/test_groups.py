from fractions import Fraction

import numpy as np
import pytest

from models.groups import Lattice, QuotientSpec, TorusElt, UnitriangularElt
from services.group_service import (
    coset_reps,
    datum_for,
    decompose_iota,
    ell,
    factor_phi,
    grp_arith,
    h_k_by_saturation,
    h_k_closed_form,
    in_tplus,
    iota,
    leq_alpha,
    n_root,
    phi_key,
    phi_lattice,
    phi_t_group,
    quotient_spec,
    root_datum,
    s_bar,
    s_element,
    tplus_equivalent,
    upper_bound,
)
from utils.errors import NotInTPlus

ALPHA, BETA, GAMMA = (0, 1), (1, 2), (0, 2)


@pytest.mark.parametrize("n, count, top", [(2, 1, 1), (3, 3, 2), (4, 6, 3)])
def test_root_datum(n, count, top):
    datum = root_datum(n)
    assert len(datum.positive) == count
    assert max(datum.degree(r) for r in datum.positive) == top


def test_root_values_of_s():
    s = s_element(datum_for("GL3"), 3)
    assert s.diag == (9, 3, 1)
    assert (s.m(ALPHA), s.m(BETA), s.m(GAMMA)) == (1, 1, 2)
    sb = s_bar(datum_for("GL3"), 3)
    assert sb.diag == (1, 1, Fraction(1, 3))
    assert (sb.m(ALPHA), sb.m(BETA), sb.m(GAMMA)) == (0, 1, 1)


def test_leq_alpha():
    datum = datum_for("GL3")
    one = TorusElt.identity(3, 3)
    assert leq_alpha(datum, one, s_element(datum, 3))
    assert not leq_alpha(datum, one, TorusElt.from_valuations(3, (1, 0, 0)))
    assert in_tplus(datum, s_bar(datum, 3))


def test_upper_bound_dominates_both():
    datum = datum_for("GL3")
    t1 = s_element(datum, 2)
    t2 = TorusElt.from_valuations(2, (1, 1, 0))
    bound = upper_bound(datum, t1, t2)
    assert leq_alpha(datum, t1, bound) and leq_alpha(datum, t2, bound)


def test_upper_bound_needs_tplus():
    datum = datum_for("GL3")
    with pytest.raises(NotInTPlus):
        upper_bound(datum, TorusElt.from_valuations(2, (0, 1, 0)), s_element(datum, 2))


def test_tplus_equivalence():
    datum = datum_for("GL3")
    s = s_element(datum, 3)
    unit = TorusElt(3, (2, 2, 2))
    assert tplus_equivalent(datum, s, s * unit) == {"equivalent": True, "in_T0": True}


def test_group_law_matches_matrices(rng):
    for _ in range(20):
        g = UnitriangularElt(3, None, 3, tuple(rng.randrange(-9, 9) for _ in range(3)))
        h = UnitriangularElt(3, None, 3, tuple(rng.randrange(-9, 9) for _ in range(3)))
        product = grp_arith("mul", g, h)
        assert np.array_equal(product.to_matrix(), g.to_matrix().dot(h.to_matrix()))
        assert grp_arith("mul", g, grp_arith("inv", g)).is_identity()


def test_root_products():
    datum = datum_for("GL3")
    a, b = n_root(datum, ALPHA, 1, 3), n_root(datum, BETA, 1, 3)
    assert (a * b).coords == (1, 1, 1)
    assert (b * a).coords == (1, 1, 0)


def test_phi_t_on_group():
    datum = datum_for("GL3")
    s = s_element(datum, 3)
    assert phi_t_group(s, n_root(datum, ALPHA, 1, 3)).coords == (3, 0, 0)
    assert phi_t_group(s, n_root(datum, GAMMA, 1, 3)).coords == (0, 0, 9)
    g = UnitriangularElt(3, 4, 3, (1, 2, 5))
    assert phi_t_group(TorusElt.identity(3, 3), g) == g


def test_ell_and_iota():
    datum = datum_for("GL3")
    assert ell(n_root(datum, ALPHA, 5, 3)) == 5
    assert ell(UnitriangularElt(3, None, 3, (0, 4, 7))) == 0
    s = s_element(datum, 3)
    assert iota(3 * 2, 3, 3) == phi_t_group(s, iota(2, 3, 3))
    i, h = decompose_iota(UnitriangularElt(3, None, 3, (2, 1, 1)))
    assert i == 2 and ell(h) == 0
    assert (iota(2, 3, 3) * h).coords == (2, 1, 1)


def test_quotients():
    assert quotient_spec("GL2", 3, 4).trivial
    q2 = quotient_spec("GL3", 3, 2)
    assert (q2.order, q2.c_k) == (9, 1)
    q3 = quotient_spec("GL3", 3, 3)
    assert (q3.order, q3.c_k) == (81, 2)
    with pytest.raises(ValueError):
        quotient_spec("GL3", 3, 0)


@pytest.mark.parametrize("k", [2, 3])
def test_hk_closed_form_matches_saturation(k, prime):
    assert h_k_by_saturation("GL3", prime, k, 3) == h_k_closed_form("GL3", prime, k, 3)


def test_coset_reps_gl2():
    datum = datum_for("GL2")
    s = s_element(datum, 2)
    reps = coset_reps(Lattice(0), phi_lattice(s, datum), 2, 2)
    assert [g.coords for g in reps] == [(0,), (1,)]


def test_coset_reps_of_phi_h1_in_h1():
    reps = coset_reps(Lattice(None, 0, 0), Lattice(None, 1, 2), 3, 3)
    assert len(reps) == 3 ** 3
    assert all(g.coords[0] == 0 for g in reps)


def test_factor_phi():
    spec = QuotientSpec("GL3", 2, 3)
    assert factor_phi(spec, (0, 0)) == ((0, 0), (0, 0))
    assert factor_phi(spec, (2, 0)) == ((1, 0), (0, 0))
    assert factor_phi(spec, (1, 1)) == ((0, 0), (1, 1))
    u, v = factor_phi(spec, (3, 2))
    assert spec.mul(phi_key(spec, u, spec), v) == spec.canon((3, 2))
