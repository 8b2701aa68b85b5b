"""
Command Component for PhiGamma

This module contains the sub-command handlers of the batch front end. Each
handler reads its fixtures, calls the kernel services and returns a Report;
no arithmetic happens here beyond dispatch.
"""
import logging
from fractions import Fraction
from typing import Callable, Dict, List

from components.report import Report
from models.dist import DistElt
from models.groups import TorusElt
from models.job import TORUS_NAMES, Job
from models.modules import SkewModuleLevel
from models.padic import RhoExponent
from models.region import Region
from models.series import LaurentSeries
from models.skew import SkewElt
from services.dist_service import dist_mul
from services.group_service import datum_for, s_bar, s_element, tplus_equivalent, tplus_order
from services.norm_service import (
    coeff_class_check,
    expanded_norm,
    log_division_check,
    phi_t_norm_closed,
    pi_H_map,
    region_of_t,
    sandwich,
    spectral_norm,
    t_of_region,
    witness_series_ex,
)
from services.phimod_service import solve_X, solve_Y, theta_verify
from services.selftest_service import run_selftest
from services.series_service import etale_decompose, etale_recombine
from services.skew_service import reduce_level, skew_etale_decompose, skew_etale_recombine, skew_mul
from utils.errors import ParseError, WindowInsufficient
from utils.fixture_io import kind_of, read_fixture, value_record
from utils.tables import build_table

# Set up logging
logger = logging.getLogger(__name__)

DEFAULT_RHO = Fraction(1, 2)


def resolve_torus(job: Job, text: str, flag: str = "--t") -> TorusElt:
    """
    Turn a torus descriptor into an element of the active torus.

    Args:
        job (Job): Active job (prime and group)
        text (str): "s", "sbar", "s*sbar", "1" or comma-separated valuations
        flag (str): Flag name used in diagnostics

    Returns:
        TorusElt: The element
    """
    datum = datum_for(job.group)
    if text == "s":
        return s_element(datum, job.p)
    if text == "sbar":
        return s_bar(datum, job.p)
    if text == "s*sbar":
        return s_element(datum, job.p) * s_bar(datum, job.p)
    if text == "1":
        return TorusElt.identity(job.p, datum.n)
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"t must be one of {', '.join(TORUS_NAMES)} or valuations", flag)
    if len(vals) != datum.n:
        raise ParseError(f"{job.group} needs {datum.n} valuations", flag)
    return TorusElt.from_valuations(job.p, vals)


def _torus(job: Job) -> TorusElt:
    return resolve_torus(job, job.t or "s")


def _rho(job: Job) -> RhoExponent:
    return RhoExponent(job.rho if job.rho is not None else DEFAULT_RHO)


def _fixture(job: Job, index: int, *kinds: type):
    value = read_fixture(job.inputs[index])
    if kinds and not isinstance(value, kinds):
        names = ", ".join(k.__name__ for k in kinds)
        raise ParseError(f"{job.subcommand} expects {names}, got {kind_of(value)}", f"inputs.{index}")
    return value


def _windowed(job: Job, f: LaurentSeries) -> LaurentSeries:
    """Restrict a series fixture to --window."""
    if job.window is not None:
        lo, hi = job.window
        if not f.is_zero and f.lo < lo:
            raise WindowInsufficient(f"series has terms below the window start {lo}")
        f = f.truncate(hi)
    return f


def _matrix_record(m) -> List[List[dict]]:
    return [[e.as_dict() for e in row] for row in m]


def run_decompose(job: Job) -> Report:
    """Etale decomposition of a series (depth --depth) or of a skew element."""
    report = Report("decompose")
    x = _fixture(job, 0, LaurentSeries, SkewElt)
    if isinstance(x, LaurentSeries):
        x = _windowed(job, x)
        depth = int(job.options.get("depth") or 1)
        parts = etale_decompose(x, depth)
        rows = [{"index": i, "lo": f.lo, "hi": f.hi, "terms": len(f.terms), "component": repr(f)}
                for i, f in enumerate(parts)]
        report.tables["components"] = build_table(rows, "series etale decomposition")
        report.values["components"] = [value_record(f) for f in parts]
        if not etale_recombine(parts, depth).agrees_with(x):
            report.violate("recombine(decompose(f)) = f")
        return report

    comps = skew_etale_decompose(x)
    rows = [{"v": list(v), "i": i, "terms": len(y.body), "component": repr(y)}
            for (v, i), y in comps.items()]
    report.tables["components"] = build_table(rows, "skew etale decomposition")
    report.values["components"] = [{"v": list(v), "i": i, "element": value_record(y)}
                                   for (v, i), y in comps.items()]
    if not skew_etale_recombine(comps, x.group, x.p, x.level).agrees_with(x):
        report.violate("recombine(decompose(x)) = x")
    return report


def run_mul(job: Job) -> Report:
    """Product of two series, skew elements or distributions."""
    report = Report("mul")
    x = _fixture(job, 0, LaurentSeries, SkewElt, DistElt)
    y = _fixture(job, 1, type(x))
    if isinstance(x, LaurentSeries):
        product = _windowed(job, x) * _windowed(job, y)
    elif isinstance(x, SkewElt):
        product = skew_mul(x, y)
    else:
        product = dist_mul(x, y)
    report.tables["product"] = build_table([{"kind": kind_of(x), "product": repr(product)}], "product")
    report.values["product"] = value_record(product)
    return report


def run_solvex(job: Job) -> Report:
    """Solve for X and Y and report every residual of the basis change."""
    report = Report("solvex")
    M = _fixture(job, 0, SkewModuleLevel)
    extra = int(job.options.get("extra") or 0)
    X, x_terms = solve_X(M, extra)
    Y, y_terms = solve_Y(M, extra)
    verdict = theta_verify(M, X, x_terms, Y, y_terms)
    rows = [{"residual": name, "zero": ok} for name, ok in verdict.residuals.items()]
    half = len(x_terms)
    for j, ok in enumerate(verdict.term_levels):
        name, index = ("X", j) if j < half else ("Y", j - half)
        rows.append({"residual": f"{name} term {index} in I_{index + 1}", "zero": ok})
    report.tables["residuals"] = build_table(rows, "basis change id+X, id+Y")
    report.values["X"] = _matrix_record(X)
    report.values["Y"] = _matrix_record(Y)
    report.values["report"] = verdict.as_dict()
    for row in rows:
        if not row["zero"]:
            report.violate(row["residual"])
    return report


def run_norm(job: Job) -> Report:
    """Closed-form table for phi_t(b_beta), or the norms of a distribution fixture."""
    report = Report("norm")
    t, rho = _torus(job), _rho(job)
    if job.options.get("closed_form") or not job.inputs:
        datum = datum_for(job.group)
        rows = []
        for root in datum.positive:
            closed = phi_t_norm_closed(root, t, rho)
            value = t.root_value(root)
            expanded = None
            if value.denominator == 1 and value > 0:
                expanded = expanded_norm(t.p, int(value), rho)
            rows.append({"root": datum.root_name(root), "m": t.m(root), "closed": closed,
                         "expanded": expanded, "agree": expanded is None or expanded == closed})
        report.tables["closed form"] = build_table(rows, "||phi_t(b_beta)||_rho closed form")
        report.values["rows"] = [{"root": r["root"], "m": r["m"], "closed": r["closed"].as_dict()} for r in rows]
        if not all(r["agree"] for r in rows):
            report.violate("closed form = expanded norm")
        return report

    x = _fixture(job, 0, DistElt)
    norm = spectral_norm(x, rho)
    rows = [{"quantity": "||x||_rho", "value": norm}]
    cls = coeff_class_check(x)
    rows.append({"quantity": "coefficient class", "value": cls["class"]})
    if job.t is not None:
        bounds = sandwich(x, t, rho)
        rows.append({"quantity": "q_t norm", "value": bounds["middle"]})
        rows.append({"quantity": "upper bound", "value": bounds["upper"]})
        if not bounds["holds"]:
            report.violate("||x|| <= q_t norm <= rho^-defect ||x||")
    report.tables["norms"] = build_table(rows, "rho-norm")
    report.values["norm"] = norm.as_dict()
    report.values["class"] = cls
    return report


def run_region(job: Job) -> Report:
    """region_of_t for --t, or t_of_region for a region fixture or --r."""
    report = Report("region")
    rho = _rho(job)
    if job.inputs or job.options.get("r"):
        reg = _fixture(job, 0, Region) if job.inputs else Region(rho, int(job.options["r"]))
        t = t_of_region(reg, job.group, job.p)
        back = region_of_t(t, reg.rho2)
        rows = [{"requested_r": reg.r, "t": [str(d) for d in t.diag], "certified_r": back.r,
                 "certified_rho2": str(back.rho2.e), "covers": back.covers(reg)}]
        report.tables["t of region"] = build_table(rows, "region round trip")
        report.values["t"] = t.as_dict()
        report.values["region"] = back.as_dict()
        if not back.covers(reg):
            report.violate("region_of_t(t_of_region(R)) covers R")
        return report

    t = _torus(job)
    reg = region_of_t(t, rho)
    report.tables["region"] = build_table([{"t": [str(d) for d in t.diag], "r": reg.r,
                                             "rho2": str(reg.rho2.e)}], "region of t")
    report.values["region"] = reg.as_dict()
    return report


def run_poset(job: Job) -> Report:
    """Queries on (T+, <=_alpha)."""
    report = Report("poset")
    datum = datum_for(job.group)
    query = job.options.get("query") or "leq_alpha"
    t1 = _torus(job)
    t2 = resolve_torus(job, job.options.get("t2") or "s", "--t2")
    if query == "in_Tplus":
        result = {"in_Tplus": tplus_order(query, datum, t1)}
    elif query == "s_bar":
        result = {"s_bar": [str(d) for d in tplus_order(query, datum, job.p).diag]}
    elif query == "upper_bound":
        result = {"upper_bound": [str(d) for d in tplus_order(query, datum, t1, t2).diag]}
    elif query == "equivalent":
        result = tplus_equivalent(datum, t1, t2)
    elif query == "leq_alpha":
        result = {"leq_alpha": tplus_order(query, datum, t1, t2)}
    else:
        raise ParseError(f"unknown poset query {query!r}", "--query")
    report.tables["query"] = build_table([{"query": query, **result}], "T+ pre-order")
    report.values.update(result)
    return report


def run_witness(job: Job) -> Report:
    """Divergence witness table (--kind ex) or the log-division report (--kind log)."""
    report = Report("witness")
    kind = job.options.get("kind") or "ex"
    if kind == "ex":
        n_max = int(job.options.get("n") or 20)
        out = witness_series_ex(n_max, _torus(job), _rho(job), job.group)
        report.tables["terms"] = build_table(out["rows"], "b_gamma^n b_alpha^-n witness")
        report.values["rows"] = [{"n": r["n"], "plain": r["plain"].as_dict(),
                                  "transported": r["transported"].as_dict(),
                                  "closed": r["closed"].as_dict()} for r in out["rows"]]
        report.values["plain_verdict"] = out["plain_verdict"]
        report.values["transported_verdict"] = out["transported_verdict"]
        return report
    if kind == "log":
        out = log_division_check(job.p, int(job.options.get("r") or 1), int(job.options.get("n") or 20),
                                 job.prec, int(job.options.get("m_beta") or 1))
        rows = [{"i": i, "valuation": v, "bound": b}
                for i, (v, b) in enumerate(zip(out["valuations"], out["bounds"]))]
        report.tables["quotient"] = build_table(rows, "log(1+b) / phi^r(b) valuation bound")
        report.values.update(out)
        for name in ("bound_ok", "long_division_ok", "identity_ok"):
            if not out[name]:
                report.violate(name)
        return report
    raise ParseError(f"unknown witness kind {kind!r}", "--kind")


def run_reduce(job: Job) -> Report:
    """Level reduction of a skew element or pi_H of a distribution."""
    report = Report("reduce")
    x = _fixture(job, 0, SkewElt, DistElt)
    if isinstance(x, SkewElt):
        image = reduce_level(x, job.level)
        anchor = "level reduction"
    else:
        image = pi_H_map(x, job.level)
        anchor = "pi_H reduction"
    report.tables["image"] = build_table([{"level": job.level, "certificate": image.cert.tag,
                                           "image": repr(image)}], anchor)
    report.values["image"] = value_record(image)
    return report


def run_selftest_command(job: Job) -> Report:
    """Full property suite at a fixed seed."""
    report = Report("selftest")
    rows = run_selftest(job.p, job.seed)
    report.tables["suite"] = build_table(rows, columns=["check", "cases", "passed"])
    report.values["suite"] = rows
    for row in rows:
        if row["passed"] != row["cases"]:
            report.violate(row["anchor"])
    return report


HANDLERS: Dict[str, Callable[[Job], Report]] = {
    "decompose": run_decompose,
    "mul": run_mul,
    "solvex": run_solvex,
    "norm": run_norm,
    "region": run_region,
    "poset": run_poset,
    "witness": run_witness,
    "reduce": run_reduce,
    "selftest": run_selftest_command,
}


def dispatch(job: Job) -> Report:
    """
    Validate a job and run its handler.

    Args:
        job (Job): The job

    Returns:
        Report: The handler's report
    """
    job.validate()
    logger.info(f"running {job.subcommand} (p={job.p}, group={job.group}, level={job.level})")
    return HANDLERS[job.subcommand](job)
