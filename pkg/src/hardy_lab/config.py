"""Run configuration and the textual forms accepted on the command line.

Domains, maps, inequalities, profiles and bands are written as
``kind:key=value,...``, for example ``torus:R=3,r=1``,
``sqrt-quadratic:rho=0.5,R=2|inversion`` or ``0.1,0.6,inner``.
"""

from __future__ import annotations

import os
from collections.abc import Callable
from typing import Any, Literal, TypeVar

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    TypeAdapter,
    ValidationError,
    model_validator,
)

from .domains import ConformalAnnulus, DomainSpec
from .errors import ConfigInvalidError, HardyLabError
from .inequalities import FMTComparison, InequalitySpec, as_exponent
from .maps import Composed, ConformalMapSpec, Transform
from .profiles import Band, TestProfile
from .quadrature import QuadratureSpec

THREADS_ENV = "HARDYLAB_THREADS"

Command = Literal[
    "verify", "constant", "invariance", "sweep", "geometry-check"
]

T = TypeVar("T")

_DOMAIN_KEYS = {
    "disc": {"R": "R"},
    "ball": {"R": "R"},
    "annulus": {"rho": "rho", "R": "R", "n": "n"},
    "exterior-disc": {"rho": "rho", "n": "n"},
    "ellipse": {"a": "a", "b": "b"},
    "cylinder": {"r": "r", "half_height": "half_height"},
    "torus": {"R": "R_major", "r": "r_minor"},
    "hyperboloid": {"s_max": "s_max"},
}
_INTEGER_KEYS = {"n"}


def _validated(adapter: TypeAdapter[T], data: Any, text: str) -> T:
    try:
        return adapter.validate_python(data)
    except ValidationError as exc:
        raise ConfigInvalidError(f"invalid value {text!r}: {exc}") from exc


def _split_kind(text: str) -> tuple[str, str]:
    kind, _, rest = text.strip().partition(":")
    if not kind:
        raise ConfigInvalidError(f"missing kind in {text!r}")
    return kind, rest


def _number(value: str, text: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigInvalidError(
            f"{value!r} is not a number in {text!r}"
        ) from None


def _params(
    rest: str, text: str, keys: dict[str, str] | None = None
) -> dict[str, Any]:
    """``"R=3,r=1"`` as a dict, renaming keys through ``keys``."""
    out: dict[str, Any] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigInvalidError(f"expected key=value, got {item!r}")
        if keys is not None:
            if key not in keys:
                raise ConfigInvalidError(
                    f"unknown parameter {key!r} in {text!r}"
                )
            key = keys[key]
        number = _number(value, text)
        if key in _INTEGER_KEYS:
            if not number.is_integer():
                raise ConfigInvalidError(f"{key} must be an integer")
            number = int(number)
        out[key] = number
    return out


_MAP_ADAPTER: TypeAdapter[ConformalMapSpec] = TypeAdapter(ConformalMapSpec)
_DOMAIN_ADAPTER: TypeAdapter[DomainSpec] = TypeAdapter(DomainSpec)
_INEQUALITY_ADAPTER: TypeAdapter[InequalitySpec] = TypeAdapter(
    InequalitySpec
)
_PROFILE_ADAPTER: TypeAdapter[TestProfile] = TypeAdapter(TestProfile)


def parse_transform(text: str) -> Transform:
    """``scale=2``, ``rotation=0.6`` or ``inversion``."""
    kind, eq, value = text.strip().partition("=")
    data: dict[str, Any] = {"kind": kind}
    if eq:
        data["value"] = _number(value, text)
    return _validated(TypeAdapter(Transform), data, text)


def parse_map(text: str) -> ConformalMapSpec:
    root, *transforms = text.split("|")
    kind, rest = _split_kind(root)
    spec = _validated(
        _MAP_ADAPTER,
        {"kind": kind, **_params(rest, text, {"rho": "rho", "R": "R"})},
        text,
    )
    for t in transforms:
        spec = Composed(base=spec, transform=parse_transform(t))
    return spec


def parse_domain(text: str) -> DomainSpec:
    kind, rest = _split_kind(text)
    if kind == "conformal":
        return ConformalAnnulus(map=parse_map(rest))
    if kind not in _DOMAIN_KEYS:
        raise ConfigInvalidError(f"unknown domain {kind!r}")
    data = _params(rest, text, _DOMAIN_KEYS[kind])
    if kind == "ball":
        kind = "disc"
        data["n"] = 3
    return _validated(_DOMAIN_ADAPTER, {"kind": kind, **data}, text)


def parse_inequality(text: str) -> InequalitySpec:
    kind, rest = _split_kind(text)
    return _validated(
        _INEQUALITY_ADAPTER, {"kind": kind, **_params(rest, text)}, text
    )


def parse_profile(text: str) -> TestProfile | None:
    """``zero``, ``smooth-bump``, ``power-bump:q=0.5,ramp=0.2`` or
    ``radial-custom:0/0,0.5/1,1/0`` (pairs ``tau/value``)."""
    kind, rest = _split_kind(text)
    if kind == "zero":
        return None
    if kind == "radial-custom":
        table = []
        for item in filter(None, (s.strip() for s in rest.split(","))):
            tau, slash, value = item.partition("/")
            if not slash:
                raise ConfigInvalidError(
                    f"expected tau/value, got {item!r}"
                )
            table.append((_number(tau, text), _number(value, text)))
        return _validated(
            _PROFILE_ADAPTER, {"kind": kind, "table": table}, text
        )
    return _validated(
        _PROFILE_ADAPTER, {"kind": kind, **_params(rest, text)}, text
    )


def parse_band(text: str) -> Band:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) not in (2, 3):
        raise ConfigInvalidError(
            f"band must be 'a,b[,side]', got {text!r}"
        )
    data: dict[str, Any] = {
        "a": _number(parts[0], text),
        "b": _number(parts[1], text),
    }
    if len(parts) == 3:
        data["component"] = parts[2]
    band = _validated(TypeAdapter(Band), data, text)
    if not 0.0 < band.a < band.b:
        raise ConfigInvalidError(f"band needs 0 < a < b, got {text!r}")
    return band


def parse_float(text: str) -> float:
    return _number(text.strip(), text)


def parse_list(
    text: str, item: Callable[[str], T], sep: str = ";"
) -> list[T]:
    return [item(s) for s in text.split(sep) if s.strip()]


def threads_from_env(environ: dict[str, str] | None = None) -> int:
    """Worker cap from ``HARDYLAB_THREADS``; the CPU count when unset."""
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigInvalidError(
            f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        )
    return value


Profiles = tuple[TestProfile | None, ...]


class RunConfig(BaseModel):
    """Everything one CLI invocation computes; echoed into the report."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    domain: DomainSpec | None = None
    map: ConformalMapSpec | None = None
    transforms: tuple[Transform, ...] = ()
    inequality: InequalitySpec | None = None
    p: float = Field(default=2.0, gt=1.0)
    bands: tuple[Band, ...] = ()
    profiles: Profiles = ()
    resolutions: tuple[int, ...] = ()
    alphas: tuple[float, ...] = ()
    quadrature: QuadratureSpec = QuadratureSpec()
    samples: int = Field(default=1000, ge=1)
    pairs: int = Field(default=0, ge=0)
    budget: int = Field(default=200, ge=1)
    format: Literal["json", "csv"] = "json"
    out: str | None = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_command(self):
        need = {
            "verify": ("bands", "profiles"),
            "constant": ("domain",),
            "invariance": ("map", "transforms"),
            "sweep": ("domain", "inequality"),
            "geometry-check": ("domain",),
        }[self.command]
        for name in need:
            if not getattr(self, name):
                raise ValueError(f"{self.command} needs {name}")
        if self.command == "verify":
            if self.map is None and (
                self.domain is None or self.inequality is None
            ):
                raise ValueError("verify needs --map or --domain and --ineq")
        if self.command == "sweep":
            if isinstance(self.inequality, FMTComparison):
                if not self.alphas:
                    raise ValueError("fmt-comparison sweep needs alphas")
            else:
                for name in ("bands", "profiles", "resolutions"):
                    if not getattr(self, name):
                        raise ValueError(f"sweep range {name} is empty")
                if any(r < 64 for r in self.resolutions):
                    raise ValueError("resolutions must be at least 64")
        if self.inequality is not None and self.domain is not None:
            if not isinstance(self.inequality, FMTComparison):
                try:
                    self.inequality.check(self.domain, as_exponent(self.p))
                except HardyLabError as exc:
                    raise ValueError(str(exc)) from exc
        return self


def build_config(**values: Any) -> RunConfig:
    """:class:`RunConfig` from keyword values; any validation failure
    becomes :class:`ConfigInvalidError`."""
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigInvalidError(str(exc)) from exc


__all__ = [
    "RunConfig",
    "THREADS_ENV",
    "build_config",
    "parse_band",
    "parse_domain",
    "parse_float",
    "parse_inequality",
    "parse_list",
    "parse_map",
    "parse_profile",
    "parse_transform",
    "threads_from_env",
]
