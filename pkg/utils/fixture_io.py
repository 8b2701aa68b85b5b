"""
Fixture I/O Utilities for PhiGamma

This module contains the JSON codec for kernel values. Every fixture file is
an envelope {"version", "kind", "value"}; the value records are validated by
pydantic models that reject unknown fields, and decoding failures surface as
ParseError with the location of the offending entry.
"""
import json
import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

# Import configuration
from config.settings import FIXTURE_VERSION

from models.dist import DistElt, rank_of
from models.groups import TorusElt
from models.modules import SeriesModule, SkewModuleLevel
from models.padic import PadicScalar, RhoExponent
from models.region import Region
from models.series import Certificate, LaurentSeries
from models.skew import SkewElt
from utils.errors import ParseError, PhiRingError

# Set up logging
logger = logging.getLogger(__name__)

Kind = Literal["scalar", "series", "skew", "dist", "series_module", "skew_module", "region", "torus"]
Value = Union[PadicScalar, LaurentSeries, SkewElt, DistElt, SeriesModule, SkewModuleLevel, Region, TorusElt]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScalarRecord(StrictModel):
    v: int
    u: str
    N: int


class ScalarFixture(ScalarRecord):
    p: int


class SeriesRecord(StrictModel):
    p: int
    prec: int
    window: Tuple[int, Optional[int]]
    coeffs: Dict[str, ScalarRecord] = Field(default_factory=dict)
    cls: str = Field(alias="class")
    radius: Optional[str] = None


class SkewTermRecord(StrictModel):
    key: List[int]
    series: SeriesRecord


class SkewRecord(StrictModel):
    group: str
    p: int
    level: int
    terms: List[SkewTermRecord] = Field(default_factory=list)
    prec: Optional[int] = None


class VectorTermRecord(StrictModel):
    g: List[int]
    c: str


class MonomialTermRecord(StrictModel):
    k: List[int]
    c: str


class VectorRecord(StrictModel):
    rep: Literal["group"]
    moduli: List[int]
    terms: List[VectorTermRecord] = Field(default_factory=list)


class MonomialRecord(StrictModel):
    rep: Literal["monomial"]
    degree: Optional[int] = None
    terms: List[MonomialTermRecord] = Field(default_factory=list)


class DistRecord(StrictModel):
    group: str
    p: int
    prec: int
    group_vector: Optional[VectorRecord] = None
    monomial: Optional[MonomialRecord] = None


class TorusRecord(StrictModel):
    p: int
    diag: List[str]


class SeriesActionRecord(StrictModel):
    t: TorusRecord
    matrix: List[List[SeriesRecord]]


class SkewActionRecord(StrictModel):
    t: TorusRecord
    matrix: List[List[SkewRecord]]


class SeriesModuleRecord(StrictModel):
    rank: int
    phi_matrix: List[List[SeriesRecord]]
    actions: List[SeriesActionRecord] = Field(default_factory=list)


class SkewModuleRecord(StrictModel):
    group: str
    p: int
    rank: int
    level: int
    phi_matrix: List[List[SkewRecord]]
    actions: List[SkewActionRecord] = Field(default_factory=list)


class RegionRecord(StrictModel):
    rho2_num: int
    rho2_den: int
    r: int


class Envelope(StrictModel):
    version: int
    kind: Kind
    value: Dict[str, Any]


RECORDS = {
    "scalar": ScalarFixture,
    "series": SeriesRecord,
    "skew": SkewRecord,
    "dist": DistRecord,
    "series_module": SeriesModuleRecord,
    "skew_module": SkewModuleRecord,
    "region": RegionRecord,
    "torus": TorusRecord,
}


def _loc(parts) -> str:
    return ".".join(str(p) for p in parts)


def _fraction(text: str, where: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"malformed rational {text!r}", where)


def _scalar_value(p: int, rec: ScalarRecord, where: str) -> Fraction:
    return _fraction(rec.u, where) * Fraction(p) ** rec.v


# Record -> value

def _to_scalar(rec: ScalarFixture, where: str) -> PadicScalar:
    u = _fraction(rec.u, f"{where}.u")
    if u == 0:
        return PadicScalar.zero_at(rec.p, rec.v)
    return PadicScalar.from_value(rec.p, u * Fraction(rec.p) ** rec.v, rec.N)


def _to_series(rec: SeriesRecord, where: str) -> LaurentSeries:
    coeffs = {}
    for key, scalar in rec.coeffs.items():
        try:
            n = int(key)
        except ValueError:
            raise ParseError(f"malformed exponent key {key!r}", f"{where}.coeffs")
        coeffs[n] = _scalar_value(rec.p, scalar, f"{where}.coeffs.{key}")
    radius = None if rec.radius is None else _fraction(rec.radius, f"{where}.radius")
    lo, hi = rec.window
    return LaurentSeries.build(rec.p, coeffs, rec.prec, lo, hi, Certificate(rec.cls, radius))


def _to_skew(rec: SkewRecord, where: str) -> SkewElt:
    terms = [(tuple(t.key), _to_series(t.series, f"{where}.terms.{i}.series"))
             for i, t in enumerate(rec.terms)]
    return SkewElt.build(rec.group, rec.p, rec.level, terms, rec.prec)


def _to_dist(rec: DistRecord, where: str) -> DistElt:
    x = DistElt(rec.group, rec.p, rec.prec)
    if rec.group_vector is not None:
        vector = {tuple(t.g): _fraction(t.c, f"{where}.group_vector.terms.{i}.c")
                  for i, t in enumerate(rec.group_vector.terms)}
        x = x.with_vector(tuple(rec.group_vector.moduli), vector)
    if rec.monomial is not None:
        monomials = {}
        for i, t in enumerate(rec.monomial.terms):
            if len(t.k) != rank_of(rec.group) or any(a < 0 for a in t.k[:-1]):
                raise ParseError(f"malformed exponent key {t.k}", f"{where}.monomial.terms.{i}.k")
            monomials[tuple(t.k)] = _fraction(t.c, f"{where}.monomial.terms.{i}.c")
        x = x.with_monomials(monomials, rec.monomial.degree)
    return x


def _to_torus(rec: TorusRecord, where: str) -> TorusElt:
    return TorusElt(rec.p, tuple(_fraction(d, f"{where}.diag.{i}") for i, d in enumerate(rec.diag)))


def _to_series_module(rec: SeriesModuleRecord, where: str) -> SeriesModule:
    def matrix(rows, at):
        return [[_to_series(e, f"{at}.{i}.{j}") for j, e in enumerate(row)] for i, row in enumerate(rows)]

    actions = [(_to_torus(a.t, f"{where}.actions.{n}.t"), matrix(a.matrix, f"{where}.actions.{n}.matrix"))
               for n, a in enumerate(rec.actions)]
    return SeriesModule(rec.rank, matrix(rec.phi_matrix, f"{where}.phi_matrix"), tuple(actions))


def _to_skew_module(rec: SkewModuleRecord, where: str) -> SkewModuleLevel:
    def matrix(rows, at):
        return [[_to_skew(e, f"{at}.{i}.{j}") for j, e in enumerate(row)] for i, row in enumerate(rows)]

    actions = [(_to_torus(a.t, f"{where}.actions.{n}.t"), matrix(a.matrix, f"{where}.actions.{n}.matrix"))
               for n, a in enumerate(rec.actions)]
    return SkewModuleLevel(rec.group, rec.p, rec.level, rec.rank,
                           matrix(rec.phi_matrix, f"{where}.phi_matrix"), tuple(actions))


def _to_region(rec: RegionRecord, where: str) -> Region:
    if rec.rho2_den == 0:
        raise ParseError("zero denominator", f"{where}.rho2_den")
    return Region(RhoExponent(Fraction(rec.rho2_num, rec.rho2_den)), rec.r)


CONVERTERS = {
    "scalar": _to_scalar,
    "series": _to_series,
    "skew": _to_skew,
    "dist": _to_dist,
    "series_module": _to_series_module,
    "skew_module": _to_skew_module,
    "region": _to_region,
    "torus": _to_torus,
}


def decode(payload: Any) -> Value:
    """
    Decode a fixture envelope into a kernel value.

    Args:
        payload (Any): Parsed JSON document

    Returns:
        Value: The decoded scalar, series, skew element, distribution, module, region or torus element

    Raises:
        ParseError: Unknown fields, wrong types, a version mismatch or malformed entries
    """
    try:
        envelope = Envelope.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ParseError(first["msg"], _loc(first["loc"]) or "envelope")
    if envelope.version != FIXTURE_VERSION:
        raise ParseError(f"fixture version {envelope.version} is not {FIXTURE_VERSION}", "version")

    try:
        record = RECORDS[envelope.kind].model_validate(envelope.value)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ParseError(first["msg"], _loc(("value",) + tuple(first["loc"])))

    try:
        return CONVERTERS[envelope.kind](record, "value")
    except PhiRingError:
        raise
    except (ValueError, KeyError) as exc:
        raise ParseError(str(exc), "value")


def kind_of(value: Value) -> str:
    """Fixture kind tag of a kernel value."""
    for kind, cls in (("scalar", PadicScalar), ("series", LaurentSeries), ("skew", SkewElt),
                      ("dist", DistElt), ("series_module", SeriesModule),
                      ("skew_module", SkewModuleLevel), ("region", Region), ("torus", TorusElt)):
        if isinstance(value, cls):
            return kind
    raise TypeError(f"no fixture kind for {type(value).__name__}")


def value_record(value: Value) -> Dict[str, Any]:
    """JSON record of a value, without envelope."""
    record = value.as_dict()
    if isinstance(value, PadicScalar):
        record = {"p": value.p, **record}
    return record


def encode(value: Value) -> Dict[str, Any]:
    """Wrap a value in a versioned fixture envelope."""
    return {"version": FIXTURE_VERSION, "kind": kind_of(value), "value": value_record(value)}


def dumps(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed separators."""
    return json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"


def loads(text: str) -> Value:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}")
    return decode(payload)


def read_fixture(path: Union[str, Path]) -> Value:
    """
    Read and decode one fixture file.

    Args:
        path (Union[str, Path]): Fixture path

    Returns:
        Value: The decoded value
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read fixture: {exc.strerror}", str(path))
    logger.debug(f"decoding fixture {path}")
    return loads(text)


def write_json(path: Union[str, Path], payload: Any) -> None:
    """Write JSON atomically: a temporary file in the target directory, then os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(dumps(payload))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"wrote {path}")


def write_fixture(path: Union[str, Path], value: Value) -> None:
    write_json(path, encode(value))
