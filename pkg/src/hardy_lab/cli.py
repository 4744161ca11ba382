"""Command line front-end.

Exit status is 0 when every asserted ratio and identity passed, 1 when a
computation failed or an assertion did not hold, and 2 for an invalid
configuration. A report is written in every case except the last.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any

from . import runner
from .config import (
    build_config,
    parse_band,
    parse_domain,
    parse_float,
    parse_inequality,
    parse_list,
    parse_map,
    parse_profile,
    parse_transform,
    threads_from_env,
)
from .errors import ConfigInvalidError
from .quadrature import QuadratureSpec
from .reports import dumps_csv, dumps_json, write_text
from .server import is_debug_mode
from .telemetry import LOG_FORMAT, attach_trace_context_formatter

logger = logging.getLogger("HardyLab.CLI")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

DEFAULT_TRANSFORMS = ("scale=2", "rotation=0.6", "inversion")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigInvalidError(message)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="report path; stdout when omitted")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--debug", action="store_true", default=None)
    parser.add_argument(
        "--trace-context",
        action="store_true",
        help="append trace and span ids to log lines",
    )


def _quadrature(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scheme",
        choices=("radial-1d", "tensor-grid-midpoint", "monte-carlo"),
    )
    parser.add_argument("--resolution", type=int, default=256)
    parser.add_argument("--tolerance", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hardy-lab",
        description="Numerical checks of curvature-improved Hardy "
        "inequalities.",
    )
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )

    verify = sub.add_parser("verify", help="one inequality, one band")
    verify.add_argument("--domain")
    verify.add_argument("--ineq")
    verify.add_argument(
        "--map", help="verify the conformal pullback for this map instead"
    )
    verify.add_argument("--p", type=float, default=2.0)
    verify.add_argument("--band", required=True)
    verify.add_argument("--profile", default="smooth-bump")
    _quadrature(verify)
    _common(verify)

    constant = sub.add_parser("constant", help="empirical best constant")
    constant.add_argument("--domain", required=True)
    constant.add_argument("--p", type=float, default=2.0)
    constant.add_argument("--budget", type=int, default=200)
    _quadrature(constant)
    _common(constant)

    invariance = sub.add_parser(
        "invariance", help="invariance of the conformal weight"
    )
    invariance.add_argument("--map", required=True)
    invariance.add_argument(
        "--transform",
        action="append",
        help="scale=S, rotation=T or inversion; repeatable, default all",
    )
    invariance.add_argument("--samples", type=int, default=1000)
    invariance.add_argument(
        "--pairs", type=int, default=0, help="univalence probe pairs"
    )
    _common(invariance)

    sweep = sub.add_parser("sweep", help="Cartesian sweep to a table")
    sweep.add_argument("--domain", required=True)
    sweep.add_argument("--ineq", required=True)
    sweep.add_argument("--p", type=float, default=2.0)
    sweep.add_argument(
        "--bands", default="", help="semicolon list, e.g. '0.1,0.5;0.2,0.6'"
    )
    sweep.add_argument("--profiles", default="smooth-bump;power-bump")
    sweep.add_argument("--resolutions", default="256")
    sweep.add_argument(
        "--alphas", default="", help="fmt-comparison only, e.g. '-1.5;0;1'"
    )
    _quadrature(sweep)
    _common(sweep)

    geometry = sub.add_parser("geometry-check", help="kernel self-check")
    geometry.add_argument("--domain", required=True)
    geometry.add_argument("--samples", type=int, default=1000)
    _common(geometry)
    return parser


def _optional(text: str | None, parse):
    return None if text is None else parse(text)


def config_from_args(args: argparse.Namespace):
    """:class:`~hardy_lab.config.RunConfig` for parsed arguments."""
    values: dict[str, Any] = {
        "command": args.command,
        "seed": args.seed,
        "out": args.out,
        "format": args.format
        or ("csv" if args.command == "sweep" else "json"),
    }
    if hasattr(args, "resolution"):
        values["quadrature"] = QuadratureSpec(
            scheme=args.scheme,
            resolution=args.resolution,
            tolerance=args.tolerance,
            seed=args.seed,
        )
    command = args.command
    if command in ("verify", "constant", "sweep", "geometry-check"):
        values["domain"] = _optional(args.domain, parse_domain)
    if command in ("verify", "constant", "sweep"):
        values["p"] = args.p
    if command in ("verify", "sweep"):
        values["inequality"] = _optional(args.ineq, parse_inequality)
    if command == "verify":
        values["map"] = _optional(args.map, parse_map)
        values["bands"] = (parse_band(args.band),)
        values["profiles"] = (parse_profile(args.profile),)
    elif command == "constant":
        values["budget"] = args.budget
    elif command == "invariance":
        values["map"] = parse_map(args.map)
        transforms = args.transform or list(DEFAULT_TRANSFORMS)
        values["transforms"] = tuple(parse_transform(t) for t in transforms)
        values["samples"] = args.samples
        values["pairs"] = args.pairs
    elif command == "sweep":
        values["bands"] = tuple(parse_list(args.bands, parse_band))
        values["profiles"] = tuple(parse_list(args.profiles, parse_profile))
        values["resolutions"] = tuple(
            int(v) for v in parse_list(args.resolutions, parse_float)
        )
        values["alphas"] = tuple(parse_list(args.alphas, parse_float))
    elif command == "geometry-check":
        values["samples"] = args.samples
    return build_config(**values)


def _configure_logging(debug: bool, trace_context: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    if trace_context:
        attach_trace_context_formatter()


def render(outcome: runner.RunOutcome) -> str:
    if outcome.config.format == "csv":
        return dumps_csv(outcome.rows, outcome.columns)
    return dumps_json(outcome.report())


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        debug = args.debug if args.debug is not None else is_debug_mode()
        _configure_logging(debug, args.trace_context)
        config = config_from_args(args)
        threads = threads_from_env()
    except ConfigInvalidError as exc:
        print(f"hardy-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG

    outcome = runner.execute(config, threads)
    text = render(outcome)
    if config.out is None:
        sys.stdout.write(text)
    else:
        write_text(config.out, text)
        logger.info("Report written to %s", config.out)
    return outcome.exit_code


__all__ = ["build_parser", "config_from_args", "main", "render"]
