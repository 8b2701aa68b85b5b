import pytest

from models.groups import QuotientSpec, UnitriangularElt
from models.series import LaurentSeries
from models.skew import SkewElt
from services.group_service import iota
from services.series_service import chi_series, frobenius_series
from services.skew_service import (
    chi_k_embed,
    equivariant_h0,
    group_minus_one,
    ideal_member,
    iota_transport,
    reduce_level,
    skew_etale_decompose,
    skew_etale_recombine,
    skew_mul,
    skew_one,
    skew_phi,
    skew_scalar,
    transport_depth,
)
from utils.errors import DepthTooShallow, LevelTooSmall, NotAUnit


def series(p, coeffs, prec=3):
    return LaurentSeries.build(p, coeffs, prec)


def elt(p, level, terms, group="GL3", prec=3):
    return SkewElt.build(group, p, level, [(key, series(p, c, prec)) for key, c in terms])


def random_elt(rng, p, level, size=2, prec=3):
    keys = QuotientSpec("GL3", p, level).reps()
    return elt(p, level, [(rng.choice(keys), {n: rng.randrange(1, p ** prec) for n in range(2)})
                          for _ in range(size)], prec=prec)


def test_scalars_multiply_as_series():
    x = skew_scalar(series(3, {1: 1}), "GL3", 2)
    assert skew_mul(x, x).agrees_with(skew_scalar(series(3, {2: 1}), "GL3", 2))


def test_product_twists_keys_by_iota():
    x = elt(3, 2, [((1, 0), {0: 1})])
    y = skew_scalar(series(3, {0: 1, 1: 1}), "GL3", 2)
    assert skew_mul(x, y).agrees_with(elt(3, 2, [((1, 2), {0: 1, 1: 1})]))


def test_phi_power_coefficients_are_central():
    p, level = 3, 2
    c_k = QuotientSpec("GL3", p, level).c_k
    central = frobenius_series(series(p, {1: 1}), c_k)
    h = elt(p, level, [((2, 1), {0: 1})])
    r = skew_scalar(central, "GL3", level)
    assert skew_mul(h, r).agrees_with(skew_mul(r, h))


def test_unit_is_neutral(rng):
    one = skew_one("GL3", 3, 2, 3)
    x = random_elt(rng, 3, 2)
    assert skew_mul(one, x).agrees_with(x)
    assert skew_mul(x, one).agrees_with(x)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_associativity(rng, p):
    for _ in range(5):
        x, y, z = (random_elt(rng, p, 2) for _ in range(3))
        assert skew_mul(skew_mul(x, y), z).agrees_with(skew_mul(x, skew_mul(y, z)))


def test_depth_below_c_k_rejected():
    x = skew_one("GL3", 2, 3, 3)
    with pytest.raises(DepthTooShallow):
        skew_mul(x, x, depth=1)


def test_larger_depth_gives_the_same_product(rng):
    x, y = random_elt(rng, 2, 3), random_elt(rng, 2, 3)
    assert skew_mul(x, y, depth=3).agrees_with(skew_mul(x, y))


def test_phi_of_one_and_of_a_monomial():
    assert skew_phi(skew_one("GL3", 2, 3, 3)).agrees_with(skew_one("GL3", 2, 3, 3))
    x = elt(2, 3, [((1, 0), {1: 1})])
    assert skew_phi(x).agrees_with(elt(2, 3, [((2, 0), {2: 1, 1: 2})]))


def test_phi_is_multiplicative(rng):
    x, y = random_elt(rng, 3, 2), random_elt(rng, 3, 2)
    assert skew_phi(skew_mul(x, y)).agrees_with(skew_mul(skew_phi(x), skew_phi(y)))


def test_phi_target_level_bounded():
    with pytest.raises(LevelTooSmall):
        skew_phi(skew_one("GL3", 3, 2, 3), target_level=4)


def test_chi_k_embedding():
    assert chi_k_embed(iota(1, 3, 3), "GL3", 2, 3).agrees_with(
        elt(3, 2, [((0, 0), {0: 1, 1: 1})]))
    g = UnitriangularElt(3, None, 3, (2, 1, 1))
    assert chi_k_embed(g, "GL3", 2, 3).agrees_with(elt(3, 2, [((1, 2), {0: 1, 1: 2, 2: 1})]))


def test_reduce_to_level_one_sums_coefficients():
    x = elt(3, 3, [((1, 0), {0: 1}), ((2, 5), {1: 1}), ((0, 0), {0: 2})])
    assert reduce_level(x, 1).agrees_with(skew_scalar(series(3, {0: 3, 1: 1}), "GL3", 1))


def test_reduce_is_multiplicative(rng):
    x, y = random_elt(rng, 2, 3), random_elt(rng, 2, 3)
    lhs = reduce_level(skew_mul(x, y), 2)
    assert lhs.agrees_with(skew_mul(reduce_level(x, 2), reduce_level(y, 2)))


def test_augmentation_ideal_filtration():
    x = group_minus_one("GL3", 3, 3, (1, 0), 3)
    assert ideal_member(x, 1)
    assert not ideal_member(x, 2)


def test_phi_moves_ideal_up_one_level():
    x = group_minus_one("GL3", 3, 2, (0, 1), 3)
    assert ideal_member(x, 1)
    assert ideal_member(skew_phi(x, target_level=2), 2)


def test_decompose_monomial():
    x = elt(2, 3, [((1, 0), {0: 1})])
    parts = skew_etale_decompose(x)
    assert list(parts) == [((1, 0), 0)]
    assert parts[((1, 0), 0)].agrees_with(elt(2, 2, [((0, 0), {0: 1})]))


def test_decompose_recombine(rng):
    for _ in range(3):
        x = random_elt(rng, 2, 3)
        parts = skew_etale_decompose(x)
        assert skew_etale_recombine(parts, "GL3", 2, 3).agrees_with(x)


def test_decompose_needs_level_three():
    with pytest.raises(LevelTooSmall):
        skew_etale_decompose(skew_one("GL3", 3, 2, 3))


def test_transport_with_trivial_offset_is_identity(rng):
    x = random_elt(rng, 3, 2)
    depth = transport_depth(x.spec)
    assert iota_transport(x, (0, 0), depth).agrees_with(x)


def test_transport_fixes_scalars_of_depth_zero():
    x = skew_one("GL3", 3, 2, 3)
    h0 = equivariant_h0(3, 2, 1)
    assert h0 == (1, 1)
    assert iota_transport(x, h0, transport_depth(x.spec)).agrees_with(x)


def test_transport_moves_chi():
    p, level = 3, 2
    spec = QuotientSpec("GL3", p, level)
    h0 = equivariant_h0(p, level, 1)
    x = skew_scalar(chi_series(p, 1, 3), "GL3", level)
    moved = iota_transport(x, h0, transport_depth(spec))
    assert moved.keys == [spec.canon(h0)]


def test_transport_depth_checked():
    x = skew_one("GL3", 3, 3, 3)
    with pytest.raises(DepthTooShallow):
        iota_transport(x, (1, 1), transport_depth(x.spec) - 1)


def test_gl2_collapses_to_series():
    f, g = series(2, {0: 1, 1: 3}), series(2, {2: 1, 0: 5})
    x, y = skew_scalar(f, "GL2", 4), skew_scalar(g, "GL2", 4)
    assert skew_mul(x, y).agrees_with(skew_scalar(f * g, "GL2", 4))


def test_product_does_not_depend_on_representatives(rng):
    for p, level in ((3, 2), (2, 3)):
        for _ in range(5):
            x, y = random_elt(rng, p, level), random_elt(rng, p, level)
            assert skew_mul(x, y, rep_shift=1).agrees_with(skew_mul(x, y))
            assert skew_mul(x, y, rep_shift=2).agrees_with(skew_mul(x, y))


@pytest.mark.parametrize("p, level, key", [(3, 3, (0, 1)), (2, 4, (0, 2))])
def test_phi_kernel_lies_two_levels_down(p, level, key):
    x = group_minus_one("GL3", p, level, key, 3)
    assert not x.is_zero
    assert skew_phi(x).is_zero
    assert ideal_member(x, max(1, level - 2))
    assert not ideal_member(x, level - 1)


def test_decompose_t_splits_over_iota():
    x = skew_scalar(series(3, {1: 1}), "GL3", 3)
    parts = skew_etale_decompose(x)
    assert set(parts) == {((0, 0), 0), ((0, 0), 1)}
    assert parts[((0, 0), 0)].agrees_with(elt(3, 2, [((0, 0), {0: -1})]))
    assert parts[((0, 0), 1)].agrees_with(elt(3, 2, [((0, 0), {0: 1})]))
    assert skew_etale_recombine(parts, "GL3", 3, 3).agrees_with(x)


def test_transport_is_multiplicative(rng):
    p, level = 3, 2
    h0 = equivariant_h0(p, level, 1)
    depth = transport_depth(QuotientSpec("GL3", p, level))
    for _ in range(20):
        x, y = random_elt(rng, p, level), random_elt(rng, p, level)
        lhs = iota_transport(skew_mul(x, y), h0, depth)
        rhs = skew_mul(iota_transport(x, h0, depth), iota_transport(y, h0, depth))
        assert lhs.agrees_with(rhs)


def test_transport_commutes_with_phi(rng):
    p, level = 3, 2
    h0 = equivariant_h0(p, level, 1)
    depth = transport_depth(QuotientSpec("GL3", p, level))
    for _ in range(10):
        x = random_elt(rng, p, level)
        lhs = iota_transport(skew_phi(x), h0, depth)
        assert lhs.agrees_with(skew_phi(iota_transport(x, h0, depth)))


def test_equivariant_offset_needs_odd_p():
    assert equivariant_h0(2, 1, 1) == (0, 0)
    with pytest.raises(NotAUnit):
        equivariant_h0(2, 3, 1)


@pytest.mark.parametrize("k", [1, 2])
def test_phi_moves_random_ideal_elements_up(rng, k):
    p, level = 3, 3
    step = p ** (k - 1)
    for _ in range(10):
        x = SkewElt.zero("GL3", p, level, 3)
        for _ in range(2):
            h = (step * rng.randrange(p), step * rng.randrange(p))
            r = series(p, {n: rng.randrange(1, p ** 3) for n in range(2)})
            x = x + group_minus_one("GL3", p, level, h, 3).left_scale(r)
        assert ideal_member(x, k)
        assert ideal_member(skew_phi(x, target_level=k + 1), k + 1)
