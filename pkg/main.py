"""
PhiGamma - Batch front end

Parses element fixtures, dispatches kernel operations and emits a text report
on stdout plus an optional machine-readable JSON record (--out).

Exit codes: 0 success, 2 precondition failure, 3 property violation.
"""
import argparse
import logging
import sys
from typing import List, Optional

# Import configuration
from config.settings import (
    DEFAULT_GROUP,
    DEFAULT_LEVEL,
    DEFAULT_PRECISION,
    DEFAULT_PRIME,
    DEFAULT_SEED,
    LOG_LEVEL,
    SUPPORTED_GROUPS,
)

# Import components
from components.commands import dispatch
from components.report import render_record, render_text
from models.job import Job, parse_rho, parse_window
from utils.errors import PROPERTY_VIOLATION, PhiRingError
from utils.fixture_io import write_json

# Set up logging
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with one sub-parser per sub-command.

    Returns:
        argparse.ArgumentParser: The parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("inputs", nargs="*", help="fixture files")
    common.add_argument("--p", type=int, default=DEFAULT_PRIME, help="the prime")
    common.add_argument("--group", choices=SUPPORTED_GROUPS, default=DEFAULT_GROUP)
    common.add_argument("--level", type=int, default=DEFAULT_LEVEL)
    common.add_argument("--prec", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--window", help="series window lo:hi")
    common.add_argument("--t", help="torus element: s, sbar, s*sbar, 1 or valuations like 2,1,0")
    common.add_argument("--rho", help="rho = p^(-a/b), given as a/b")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out", help="write the machine-readable report here")

    parser = argparse.ArgumentParser(prog="phigamma", description="Exact (phi, Gamma)-ring kernel")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    decompose = sub.add_parser("decompose", parents=[common], help="etale decomposition")
    decompose.add_argument("--depth", type=int, default=1)
    sub.add_parser(
        "mul", parents=[common], help="series, skew or distribution product",
        description="Products of two fixtures of the same kind. Distribution products in "
                    "monomial form cannot move b_alpha^-n (n > 0) past b_beta; such inputs "
                    "exit with status 2 and MicrolocalReorderUnsupported.",
    )
    solvex = sub.add_parser("solvex", parents=[common], help="X/Y solver and residual report")
    solvex.add_argument("--extra", type=int, default=0, help="terms beyond level - 1")
    norm = sub.add_parser("norm", parents=[common], help="rho-norms and closed forms")
    norm.add_argument("--closed-form", action="store_true")
    region = sub.add_parser("region", parents=[common], help="region_of_t / t_of_region")
    region.add_argument("--r", type=int, help="region exponent r for t_of_region")
    poset = sub.add_parser("poset", parents=[common], help="queries on (T+, <=_alpha)")
    poset.add_argument("--query", default="leq_alpha",
                       choices=("leq_alpha", "upper_bound", "equivalent", "in_Tplus", "s_bar"))
    poset.add_argument("--t2", help="second torus element")
    witness = sub.add_parser("witness", parents=[common], help="divergence and log-division witnesses")
    witness.add_argument("--kind", choices=("ex", "log"), default="ex")
    witness.add_argument("--n", type=int, help="number of terms (ex) or quotient degree (log)")
    witness.add_argument("--r", type=int, default=1)
    witness.add_argument("--m-beta", type=int, default=1)
    sub.add_parser(
        "reduce", parents=[common], help="level reduction or pi_H",
        description="Level reduction of a skew element, or pi_H of a distribution with "
                    "polynomial support. pi_H reads ordered monomials as given, so "
                    "b_alpha^-n is accepted; multiplying such inputs first with mul is "
                    "subject to the b_beta reorder limit.",
    )
    sub.add_parser("selftest", parents=[common], help="property suite with a fixed seed")
    return parser


COMMON = ("inputs", "p", "group", "level", "prec", "window", "t", "rho", "seed", "out", "subcommand")


def job_from_args(args: argparse.Namespace) -> Job:
    """Turn parsed arguments into a validated Job."""
    options = {k: v for k, v in vars(args).items() if k not in COMMON and v not in (None, False)}
    return Job(
        subcommand=args.subcommand,
        inputs=list(args.inputs),
        p=args.p,
        group=args.group,
        level=args.level,
        prec=args.prec,
        window=parse_window(args.window),
        t=args.t,
        rho=parse_rho(args.rho),
        seed=args.seed,
        out=args.out,
        options=options,
    ).validate()


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one job.

    Args:
        argv (List[str], optional): Arguments without the program name

    Returns:
        int: Exit status
    """
    logging.basicConfig(
        level=LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
        report = dispatch(job)
    except PhiRingError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        if args.out:
            write_json(args.out, {
                "ok": False,
                "error": type(exc).__name__,
                "message": str(exc),
                "location": getattr(exc, "location", None),
                "exit_code": exc.exit_code,
            })
        return exc.exit_code

    sys.stdout.write(render_text(report))
    if job.out:
        write_json(job.out, render_record(report, job.as_dict()))
    if not report.ok:
        logger.error(f"property violation: {'; '.join(report.violations)}")
        return PROPERTY_VIOLATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
