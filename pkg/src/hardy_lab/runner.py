"""Execute a :class:`~hardy_lab.config.RunConfig` and collect its results.

Shared by the command line and the tool server. A failing computation in
one item is recorded in the results and marks the run failed; the other
items still run.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from . import conformal, geometry, verifier
from .config import RunConfig
from .domains import NEWTON_RTOL, Disc
from .errors import DomainVariantMismatchError, HardyLabError
from .inequalities import FMTComparison
from .quadrature import QuadratureSpec
from .reports import SWEEP_COLUMNS, build_report, sort_rows
from .telemetry import lab_span, record_outcome

logger = logging.getLogger("HardyLab.CLI")

FMT_COLUMNS = ("alpha", "R", "n", "min_margin", "violations", "passed")
_SWEEP_KEY = SWEEP_COLUMNS[:7]


@dataclass
class RunOutcome:
    config: RunConfig
    results: list[dict[str, Any]] = field(default_factory=list)
    rows: list[dict[str, Any]] = field(default_factory=list)
    columns: tuple[str, ...] = ()
    passed: bool = True
    failed: bool = False

    def add(self, result: dict[str, Any], passed: bool) -> None:
        self.results.append(result)
        self.passed = self.passed and passed

    def add_error(self, item: dict[str, Any], exc: HardyLabError) -> None:
        logger.error("%s failed: %s", item, exc)
        self.results.append(
            {**item, "error": type(exc).__name__, "message": str(exc)}
        )
        self.passed = False
        self.failed = True

    @property
    def exit_code(self) -> int:
        return 0 if self.passed and not self.failed else 1

    def report(self) -> dict[str, Any]:
        config = self.config
        domain = config.domain
        return build_report(
            config.model_dump(mode="json", exclude={"out"}),
            self.results,
            tolerances={
                "quadrature": config.quadrature.tolerance,
                "invariance": conformal.INVARIANCE_TOLERANCE,
                "ridge_eps": geometry.RIDGE_EPS,
                "newton_rtol": NEWTON_RTOL,
            },
            truncations={} if domain is None else domain.truncation(),
            seed=config.seed,
        )


def _report_row(report: verifier.HardyReport) -> dict[str, Any]:
    return {
        "domain": report.domain,
        "ineq": report.inequality,
        "p": report.p,
        "band_a": report.band["a"],
        "band_b": report.band["b"],
        "profile": report.profile,
        "resolution": report.quadrature["resolution"],
        "lhs": report.lhs,
        "rhs": report.rhs,
        "ratio": report.ratio,
        "min_weight": report.min_pointwise_weight,
        "converged": report.converged,
    }


def _scalars(result: dict[str, Any]) -> dict[str, Any]:
    return {
        k: v
        for k, v in result.items()
        if isinstance(v, (str, int, float, bool)) or v is None
    }


def _verify_one(
    config: RunConfig, band, profile, quad: QuadratureSpec
) -> verifier.HardyReport:
    if config.map is not None:
        return conformal.pullback_verify(config.map, profile, band, quad)
    return verifier.verify(
        config.inequality, config.domain, config.p, profile, band, quad
    )


def _run_verify(config: RunConfig, outcome: RunOutcome) -> None:
    outcome.columns = SWEEP_COLUMNS
    for band in config.bands:
        for profile in config.profiles:
            item = {
                "band": [band.a, band.b],
                "profile": "zero" if profile is None else profile.kind,
            }
            try:
                report = _verify_one(config, band, profile, config.quadrature)
            except HardyLabError as exc:
                outcome.add_error(item, exc)
                continue
            outcome.add(report.to_dict(), report.passed)
            outcome.rows.append(_report_row(report))


def _run_constant(config: RunConfig, outcome: RunOutcome) -> None:
    family = verifier.ConstantFamily(budget=config.budget)
    try:
        estimate = verifier.estimate_constant(
            config.domain, config.p, family, config.quadrature
        )
    except HardyLabError as exc:
        outcome.add_error({"domain": config.domain.describe()}, exc)
        return
    result = estimate.to_dict()
    outcome.add(result, estimate.converged and math.isfinite(estimate.value))
    outcome.rows.append(_scalars(result))
    outcome.columns = tuple(_scalars(result))


def _run_invariance(config: RunConfig, outcome: RunOutcome) -> None:
    for transform in config.transforms:
        try:
            result = conformal.invariance_check(
                config.map, transform, config.samples, config.seed
            )
        except HardyLabError as exc:
            outcome.add_error({"transform": transform.kind}, exc)
            continue
        outcome.add(result.to_dict(), result.passed)
        outcome.rows.append(result.to_dict())
    if config.pairs:
        try:
            verdict = conformal.univalence_probe(
                config.map, config.pairs, config.seed
            )
        except HardyLabError as exc:
            outcome.add_error({"univalence": config.pairs}, exc)
            return
        outcome.add(
            {"univalence": verdict.to_dict()},
            verdict.kind == "no-collision-found",
        )
    outcome.columns = (
        "map", "transform", "samples", "max_deviation",
        "max_relative_deviation", "passed",
    )


def _run_geometry(config: RunConfig, outcome: RunOutcome) -> None:
    try:
        report = geometry.geometry_check(
            config.domain, config.samples, config.seed
        )
    except HardyLabError as exc:
        outcome.add_error({"domain": config.domain.describe()}, exc)
        return
    result = report.to_dict()
    outcome.add(result, report.passed)
    outcome.rows.append(_scalars(result))
    outcome.columns = tuple(_scalars(result))


def _run_fmt(config: RunConfig, outcome: RunOutcome) -> None:
    domain = config.domain
    if not isinstance(domain, Disc):
        outcome.add_error(
            {"domain": domain.describe()},
            DomainVariantMismatchError("fmt-comparison", domain.kind),
        )
        return
    outcome.columns = FMT_COLUMNS
    for alpha in sorted(config.alphas):
        try:
            table = verifier.compare_fmt(alpha, domain.R, domain.n)
        except HardyLabError as exc:
            outcome.add_error({"alpha": alpha}, exc)
            continue
        outcome.add(table.to_dict(), table.passed)
        outcome.rows.append(
            {
                "alpha": alpha,
                "R": domain.R,
                "n": domain.n,
                "min_margin": table.min_margin,
                "violations": table.violations,
                "passed": table.passed,
            }
        )


def _run_sweep(
    config: RunConfig, outcome: RunOutcome, threads: int
) -> None:
    if isinstance(config.inequality, FMTComparison):
        _run_fmt(config, outcome)
        return
    quads = [
        config.quadrature.model_copy(update={"resolution": r})
        for r in config.resolutions
    ]
    jobs = [
        (band, profile, quad)
        for band in config.bands
        for profile in config.profiles
        for quad in quads
    ]

    def job(args):
        band, profile, quad = args
        try:
            return args, _verify_one(config, band, profile, quad), None
        except HardyLabError as exc:
            return args, None, exc

    outcome.columns = SWEEP_COLUMNS
    with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        done = list(pool.map(job, jobs))
    rows, results = [], []
    for (band, profile, quad), report, exc in done:
        kind = "zero" if profile is None else profile.kind
        if exc is not None:
            outcome.add_error(
                {
                    "band": [band.a, band.b],
                    "profile": kind,
                    "resolution": quad.resolution,
                },
                exc,
            )
            rows.append(
                {
                    "domain": config.domain.describe(),
                    "ineq": config.inequality.kind,
                    "p": config.p,
                    "band_a": band.a,
                    "band_b": band.b,
                    "profile": kind,
                    "resolution": quad.resolution,
                    "lhs": math.nan,
                    "rhs": math.nan,
                    "ratio": math.nan,
                    "min_weight": math.nan,
                    "converged": False,
                }
            )
            continue
        outcome.passed = outcome.passed and report.passed
        rows.append(_report_row(report))
        results.append(report.to_dict())
    outcome.rows = sort_rows(rows, _SWEEP_KEY)
    outcome.results = sorted(
        outcome.results + results,
        key=lambda r: repr(
            (r.get("band"), r.get("profile"), r.get("quadrature"))
        ),
    )


_RUNNERS: dict[str, Callable[[RunConfig, RunOutcome], None]] = {
    "verify": _run_verify,
    "constant": _run_constant,
    "invariance": _run_invariance,
    "geometry-check": _run_geometry,
}


def execute(config: RunConfig, threads: int = 1) -> RunOutcome:
    """Run every item the configuration names."""
    outcome = RunOutcome(config)
    with lab_span("run", command=config.command, seed=config.seed) as span:
        if config.command == "sweep":
            _run_sweep(config, outcome, threads)
        else:
            _RUNNERS[config.command](config, outcome)
        record_outcome(
            span, passed=outcome.passed, results=len(outcome.results)
        )
    logger.info(
        "%s finished: %d results, passed=%s",
        config.command,
        len(outcome.results),
        outcome.passed,
    )
    return outcome


__all__ = ["FMT_COLUMNS", "RunOutcome", "execute"]
