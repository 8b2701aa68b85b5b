import json
from fractions import Fraction

import pytest

from models.dist import DistElt
from models.groups import TorusElt
from models.modules import SkewModuleLevel
from models.padic import PadicScalar, RhoExponent
from models.region import Region
from models.series import E_DAGGER, Certificate, LaurentSeries
from models.skew import SkewElt
from services.dist_service import dist_convert
from utils.errors import ParseError
from utils.fixture_io import dumps, encode, loads, read_fixture, write_fixture, write_json


def round_trip(value):
    return loads(dumps(encode(value)))


def test_scalar_round_trip():
    x = PadicScalar.from_value(3, Fraction(5, 9), 4)
    assert round_trip(x) == x


def test_series_round_trip_keeps_window_and_class():
    f = LaurentSeries.build(2, {-1: 3, 0: 1, 4: Fraction(1, 3)}, 5, hi=8,
                            cert=Certificate(E_DAGGER, Fraction(1, 2)))
    g = round_trip(f)
    assert g.agrees_with(f)
    assert (g.lo, g.hi, g.prec) == (f.lo, f.hi, f.prec)
    assert g.cert == f.cert


def test_skew_round_trip():
    x = SkewElt.build("GL3", 3, 2, [((1, 2), LaurentSeries.build(3, {0: 1, 1: 2}, 3)),
                                    ((0, 0), LaurentSeries.constant(3, 7, 3))])
    assert round_trip(x).agrees_with(x)


def test_skew_zero_keeps_its_precision():
    x = SkewElt.build("GL3", 3, 2, [((0, 1), LaurentSeries.constant(3, 81, 4))])
    assert x.is_zero and x.prec == 4
    assert round_trip(x).prec == 4


def test_dist_round_trip_with_both_representations():
    x = dist_convert(DistElt.at_level("GL3", 3, 2, 2, {(0, 2, 0): 1, (1, 0, 0): 4}), "to_monomial")
    y = round_trip(x)
    assert y.agrees_with(x)
    assert y.monomial_map == x.monomial_map
    assert y.degree == x.degree


def test_module_round_trip():
    t = TorusElt(3, (Fraction(1), Fraction(1), Fraction(1, 3)))
    one = SkewElt.monomial("GL3", 3, 2, (0, 0), LaurentSeries.constant(3, 1, 3))
    h = SkewElt.monomial("GL3", 3, 2, (0, 1), LaurentSeries.constant(3, 1, 3))
    M = SkewModuleLevel("GL3", 3, 2, 1, [[h]], [(t, [[one]])])
    back = round_trip(M)
    assert back.P[0][0].agrees_with(h)
    assert back.action(t)[0][0].agrees_with(one)


def test_region_and_torus_round_trip():
    reg = Region(RhoExponent(Fraction(1, 3)), 4)
    assert round_trip(reg) == reg
    t = TorusElt(2, (Fraction(4), Fraction(2), Fraction(1, 2)))
    assert round_trip(t) == t


def test_unknown_field_is_rejected():
    payload = encode(Region(RhoExponent(Fraction(1, 2)), 2))
    payload["value"]["colour"] = "blue"
    with pytest.raises(ParseError) as info:
        loads(json.dumps(payload))
    assert info.value.location == "value.colour"


def test_malformed_exponent_key_is_named():
    payload = encode(LaurentSeries.constant(3, 1, 3))
    payload["value"]["coeffs"] = {"x": {"v": 0, "u": "1", "N": 3}}
    with pytest.raises(ParseError, match="'x'") as info:
        loads(json.dumps(payload))
    assert info.value.location == "value.coeffs"


def test_version_mismatch():
    payload = encode(Region(RhoExponent(Fraction(1, 2)), 2))
    payload["version"] = 99
    with pytest.raises(ParseError) as info:
        loads(json.dumps(payload))
    assert info.value.location == "version"


def test_invalid_json_and_missing_file(tmp_path):
    with pytest.raises(ParseError):
        loads("{")
    with pytest.raises(ParseError):
        read_fixture(tmp_path / "absent.json")


def test_dumps_is_deterministic():
    assert dumps({"b": 1, "a": [1, 2]}) == dumps({"a": [1, 2], "b": 1})
    assert dumps({}).endswith("\n")


def test_write_is_atomic(tmp_path):
    target = tmp_path / "nested" / "report.json"
    write_json(target, {"ok": True})
    assert json.loads(target.read_text()) == {"ok": True}
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_fixture_file_round_trip(tmp_path):
    f = LaurentSeries.build(5, {0: 1, 2: 10}, 3)
    path = tmp_path / "f.json"
    write_fixture(path, f)
    assert read_fixture(path).agrees_with(f)
