import numpy as np
import pytest

from models.dist import DistElt, group_law
from models.groups import TorusElt
from services.dist_service import (
    certified_degree,
    coords_of_matrix,
    dist_convert,
    dist_coset_decompose,
    dist_coset_recombine,
    dist_mul,
    dist_phi_t,
    group_element,
    group_matrix,
    rank_check,
    reorder_alpha_beta,
)
from services.group_service import datum_for, s_element
from utils.errors import CertificationFailed, LevelOverflow, MicrolocalReorderUnsupported

B_GAMMA, B_BETA, B_ALPHA = (1, 0, 0), (0, 1, 0), (0, 0, 1)


def random_dist(rng, p, level, prec=3, size=3):
    coeffs = {tuple(rng.randrange(p ** level) for _ in range(3)): rng.randrange(1, p ** prec)
              for _ in range(size)}
    return DistElt.at_level("GL3", p, prec, level, coeffs)


def test_certified_degree():
    assert certified_degree(3, 5, 4) == 8
    assert certified_degree(2, 3, 2) == 3
    assert certified_degree(3, 2, 3) == 0


def test_rank_check_at_the_certified_degree():
    assert rank_check(3, 5, 8, 4)["ok"]
    over = rank_check(3, 5, 9, 4)
    assert not over["ok"]
    assert not over["pollution_free"]
    assert over["rank"] == 10


def test_b_beta_in_the_group_algebra():
    b = DistElt.from_monomials("GL3", 3, 2, {B_BETA: 1})
    image = dist_convert(b, "to_group", moduli=(2, 2, 2))
    assert image.vector_map == {(0, 0, 0): 8, (0, 1, 0): 1}


def test_n_beta_squared_in_monomials():
    x = group_element("GL3", 3, 2, 2, (0, 2, 0))
    image = dist_convert(x, "to_monomial")
    assert image.degree == 2
    assert image.monomial_map == {(0, 0, 0): 1, (0, 1, 0): 2, (0, 2, 0): 1}


def test_uncertified_window_rejected():
    x = group_element("GL3", 3, 2, 2, (1, 0, 0))
    with pytest.raises(CertificationFailed):
        dist_convert(x, "to_monomial", degree=3)
    inverse = DistElt.from_monomials("GL3", 3, 2, {(0, 0, -1): 1})
    with pytest.raises(CertificationFailed):
        dist_convert(inverse, "to_group", moduli=(2, 2, 2))


def test_convolution_is_associative(rng, prime):
    for _ in range(3):
        x, y, z = (random_dist(rng, prime, 2) for _ in range(3))
        assert dist_mul(dist_mul(x, y), z).agrees_with(dist_mul(x, dist_mul(y, z)))


def test_ordered_product_matches_convolution():
    moduli = (3, 3, 3)
    a = DistElt.from_monomials("GL3", 2, 2, {B_ALPHA: 1})
    b = DistElt.from_monomials("GL3", 2, 2, {B_BETA: 1})
    ordered = dist_convert(dist_mul(a, b), "to_group", moduli=moduli)
    convolved = dist_mul(dist_convert(a, "to_group", moduli=moduli), dist_convert(b, "to_group", moduli=moduli))
    assert ordered.vector_map == convolved.vector_map


def test_reorder_of_commuting_factors():
    assert reorder_alpha_beta(3, 1, 0) == {B_ALPHA: 1}
    assert reorder_alpha_beta(3, 0, 2) == {(0, 2, 0): 1}


def test_negative_alpha_power_cannot_pass_b_beta():
    inverse = DistElt.from_monomials("GL3", 3, 2, {(0, 0, -1): 1})
    b = DistElt.from_monomials("GL3", 3, 2, {B_BETA: 1})
    with pytest.raises(MicrolocalReorderUnsupported):
        dist_mul(inverse, b)
    assert dist_mul(b, inverse).monomial_map == {(0, 1, -1): 1}


def test_levels_must_match():
    with pytest.raises(LevelOverflow):
        dist_mul(group_element("GL3", 3, 2, 2, (1, 0, 0)), group_element("GL3", 3, 2, 3, (1, 0, 0)))


def test_phi_s_on_gl2_monomial():
    s = s_element(datum_for("GL2"), 2)
    b = DistElt.from_monomials("GL2", 2, 4, {(1,): 1})
    assert dist_phi_t(s, b).monomial_map == {(1,): 2, (2,): 1}


def test_phi_s_on_gl2_vector():
    s = s_element(datum_for("GL2"), 2)
    x = DistElt.from_vector("GL2", 2, 4, (3,), {(1,): 1, (3,): 2})
    assert dist_phi_t(s, x).vector_map == {(2,): 1, (6,): 2}


def test_phi_t_needs_tplus():
    t = TorusElt.from_valuations(3, (0, 1, 0))
    with pytest.raises(LevelOverflow):
        dist_phi_t(t, group_element("GL3", 3, 2, 2, (1, 0, 0)))


def test_gl2_coset_decomposition():
    s = s_element(datum_for("GL2"), 2)
    b = DistElt.from_vector("GL2", 2, 3, (2,), {(1,): 1, (0,): -1})
    parts = dist_coset_decompose(b, s)
    assert set(parts) == {(0,), (1,)}
    assert parts[(0,)].agrees_with(DistElt.from_vector("GL2", 2, 3, (1,), {(0,): -1}))
    assert parts[(1,)].agrees_with(DistElt.from_vector("GL2", 2, 3, (1,), {(0,): 1}))
    assert dist_coset_recombine(parts, s, (2,)).agrees_with(b)


def test_gl3_coset_round_trip(rng):
    s = s_element(datum_for("GL3"), 3)
    for _ in range(3):
        x = random_dist(rng, 3, 2)
        parts = dist_coset_decompose(x, s)
        assert all(part.moduli == (1, 1, 0) for part in parts.values())
        assert dist_coset_recombine(parts, s, x.moduli).agrees_with(x)


def test_group_matrix_realizes_the_law(rng):
    for _ in range(10):
        g = tuple(rng.randrange(-9, 9) for _ in range(3))
        h = tuple(rng.randrange(-9, 9) for _ in range(3))
        product = group_matrix("GL3", 3, g).dot(group_matrix("GL3", 3, h))
        assert coords_of_matrix("GL3", 3, product) == group_law("GL3", 3, g, h)
    assert np.array_equal(group_matrix("GL2", 2, (5,)), np.array([[1, 5], [0, 1]], dtype=object))
