import logging
import os
from typing import Any

from fastmcp import FastMCP
from starlette.requests import Request
from starlette.responses import PlainTextResponse

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
)
from .quadrature import QuadratureSpec
from .telemetry import (
    LOG_FORMAT,
    TELEMETRY_DISABLED,
    TelemetryConfig,
    attach_trace_context_formatter,
)

_INSTRUCTIONS = (
    "Numerical checks of curvature-improved Hardy inequalities. Every tool "
    "returns a hardy-lab/1 report; 'passed' fields carry the verdicts."
)


def is_debug_mode() -> bool:
    """Check if debug mode should be enabled based on environment variable."""
    return os.getenv("DEBUG", "").lower() in ("true", "1", "yes", "on")


def _report(**values: Any) -> dict[str, Any]:
    return runner.execute(build_config(**values)).report()


class HardyLabServer(FastMCP):
    """FastMCP server exposing the lab's commands as tools.

    Tools take the same textual specs as the command line, for example
    ``domain="torus:R=3,r=1"`` or ``band="0.1,0.6,inner"``.
    """

    _debug: bool
    _logger: logging.Logger
    telemetry: TelemetryConfig

    def __init__(
        self,
        name: str | None = None,
        instructions: str | None = None,
        debug: bool | None = None,
        telemetry: TelemetryConfig | None = None,
        health_check: bool = True,
        **settings: Any,
    ):
        is_debug = debug if debug is not None else is_debug_mode()
        telemetry_config = (
            telemetry if telemetry is not None else TELEMETRY_DISABLED
        )

        super().__init__(
            name=name,
            instructions=instructions or _INSTRUCTIONS,
            **settings,
        )

        self._debug = is_debug
        self.telemetry = telemetry_config
        self._logger = logging.getLogger(f"HardyLab.{name or 'Server'}")

        if self._debug:
            logging.basicConfig(
                level=logging.DEBUG,
                format=LOG_FORMAT,
            )
            self._logger.debug("Debug mode enabled for Hardy Lab server")
        else:
            self._logger.setLevel(logging.INFO)

        if self.telemetry.log_trace_context:
            attach_trace_context_formatter()

        self._register_lab_tools()
        if health_check:
            self._register_health_check()

    def _register_health_check(self) -> None:
        @self.custom_route("/health", methods=["GET"])
        async def health(_: Request) -> PlainTextResponse:
            return PlainTextResponse("OK")

    def _register_lab_tools(self) -> None:
        @self.tool()
        def verify_inequality(
            band: str,
            domain: str | None = None,
            ineq: str | None = None,
            map: str | None = None,
            p: float = 2.0,
            profile: str = "smooth-bump",
            resolution: int = 256,
            tolerance: float = 1e-3,
            seed: int = 0,
        ) -> dict[str, Any]:
            """Both sides of one Hardy inequality for a band test function.

            Give ``domain`` and ``ineq``, or ``map`` for the conformal
            pullback of the annulus inequality.
            """
            return _report(
                command="verify",
                domain=None if domain is None else parse_domain(domain),
                inequality=None if ineq is None else parse_inequality(ineq),
                map=None if map is None else parse_map(map),
                p=p,
                bands=(parse_band(band),),
                profiles=(parse_profile(profile),),
                quadrature=QuadratureSpec(
                    resolution=resolution, tolerance=tolerance, seed=seed
                ),
                seed=seed,
            )

        @self.tool()
        def check_geometry(
            domain: str, samples: int = 1000, seed: int = 0
        ) -> dict[str, Any]:
            """Sampled self-check of the distance-function kernel."""
            return _report(
                command="geometry-check",
                domain=parse_domain(domain),
                samples=samples,
                seed=seed,
            )

        @self.tool()
        def check_invariance(
            map: str,
            transforms: str = "scale=2;rotation=0.6;inversion",
            samples: int = 1000,
            seed: int = 0,
            pairs: int = 0,
        ) -> dict[str, Any]:
            """Invariance of the doubly connected weight under scaling,
            rotation and inversion; ``pairs > 0`` adds a univalence probe."""
            return _report(
                command="invariance",
                map=parse_map(map),
                transforms=tuple(parse_list(transforms, parse_transform)),
                samples=samples,
                seed=seed,
                pairs=pairs,
            )

        @self.tool()
        def estimate_best_constant(
            domain: str,
            p: float = 2.0,
            budget: int = 200,
            resolution: int = 256,
            seed: int = 0,
        ) -> dict[str, Any]:
            """Upper estimate of the best Hardy constant over power bumps."""
            return _report(
                command="constant",
                domain=parse_domain(domain),
                p=p,
                budget=budget,
                quadrature=QuadratureSpec(resolution=resolution, seed=seed),
                seed=seed,
            )

        @self.tool()
        def compare_fmt_bound(
            alphas: str = "-1.5;-1;0;1", domain: str = "disc:R=1"
        ) -> dict[str, Any]:
            """Curvature gain against the comparison term on a disc or
            ball, one row per ``alpha``."""
            return _report(
                command="sweep",
                domain=parse_domain(domain),
                inequality=parse_inequality("fmt-comparison"),
                alphas=tuple(parse_list(alphas, parse_float)),
            )


__all__ = [
    "HardyLabServer",
    "is_debug_mode",
]
