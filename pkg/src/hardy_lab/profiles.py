"""Test functions ``f = eta(delta)`` supported in a band of distances."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Annotated, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from . import geometry
from .domains import DomainSpec
from .errors import BandEmptyError, BandTouchesRidgeError
from .geometry import DistanceField

logger = logging.getLogger("HardyLab.Verifier")

# boundary samples per component when the ridge distance has no closed form
_RIDGE_SCAN = 64


class _ProfileBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def values(
        self, delta: NDArray, a: float, b: float
    ) -> tuple[NDArray, NDArray]:
        """``eta`` and ``d eta / d delta``, zero outside ``(a, b)``."""
        raise NotImplementedError


class SmoothBump(_ProfileBase):
    """``e^4 exp(-1/(tau (1 - tau)))`` on the normalized band; peak 1."""

    kind: Literal["smooth-bump"] = "smooth-bump"

    def values(self, delta, a, b):
        tau = (delta - a) / (b - a)
        core = tau * (1.0 - tau)
        live = core > 1e-3
        safe = np.where(live, core, 1.0)
        eta = np.where(live, math.exp(4.0) * np.exp(-1.0 / safe), 0.0)
        slope = eta * (1.0 - 2.0 * tau) / safe**2
        return eta, np.where(live, slope / (b - a), 0.0)


class PowerBump(_ProfileBase):
    """``delta^q`` cut off by sine-squared ramps in ``log(delta)``.

    With ``q`` close to ``(p - 1)/p`` and a wide band this approaches the
    extremal profile of the plain Hardy quotient.
    """

    kind: Literal["power-bump"] = "power-bump"
    q: float = Field(default=0.5, gt=0.0, lt=2.0)
    ramp: float = Field(default=0.2, gt=0.0, le=0.5)

    def values(self, delta, a, b):
        span = math.log(b) - math.log(a)
        inside = (delta > a) & (delta < b)
        safe = np.where(inside, delta, math.sqrt(a * b))
        u = (np.log(safe) - math.log(a)) / span
        k = math.pi / (2.0 * self.ramp)
        rising = u < self.ramp
        falling = u > 1.0 - self.ramp
        cut = np.where(
            rising,
            np.sin(k * u) ** 2,
            np.where(falling, np.sin(k * (1.0 - u)) ** 2, 1.0),
        )
        dcut = np.where(
            rising,
            k * np.sin(2.0 * k * u),
            np.where(falling, -k * np.sin(2.0 * k * (1.0 - u)), 0.0),
        )
        power = safe**self.q
        eta = power * cut
        deta = self.q * power / safe * cut + power * dcut / (safe * span)
        return np.where(inside, eta, 0.0), np.where(inside, deta, 0.0)


class RadialCustom(_ProfileBase):
    """Tabulated profile over the normalized band ``tau in [0, 1]``.

    Interpolated by monotone cubic Hermite slopes with the end slopes
    clamped to zero, so the profile and its derivative vanish at both ends.
    """

    kind: Literal["radial-custom"] = "radial-custom"
    table: tuple[tuple[float, float], ...]

    @model_validator(mode="after")
    def _check_table(self):
        tau = [row[0] for row in self.table]
        if len(tau) < 3:
            raise ValueError("table needs at least three nodes")
        if tau[0] != 0.0 or tau[-1] != 1.0:
            raise ValueError("table nodes must start at 0 and end at 1")
        if any(t1 <= t0 for t0, t1 in zip(tau, tau[1:])):
            raise ValueError("table nodes must be strictly increasing")
        if self.table[0][1] != 0.0 or self.table[-1][1] != 0.0:
            raise ValueError("table values must vanish at both ends")
        return self

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        tau = np.array([row[0] for row in self.table])
        val = np.array([row[1] for row in self.table])
        slopes = PchipInterpolator(tau, val).derivative()(tau)
        slopes[0] = slopes[-1] = 0.0
        return CubicHermiteSpline(tau, val, slopes)

    def values(self, delta, a, b):
        tau = (delta - a) / (b - a)
        inside = (tau > 0.0) & (tau < 1.0)
        clipped = np.clip(tau, 0.0, 1.0)
        eta = self._spline(clipped)
        deta = self._spline.derivative()(clipped) / (b - a)
        return np.where(inside, eta, 0.0), np.where(inside, deta, 0.0)


TestProfile = Annotated[
    SmoothBump | PowerBump | RadialCustom,
    Field(discriminator="kind"),
]


class Band(BaseModel):
    """Distance band ``a < delta < b``, optionally on one boundary side."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a: float
    b: float
    component: Literal["inner", "outer"] | None = None


@dataclass(frozen=True)
class TestFunction:
    """``f(x) = eta(delta(x))`` restricted to a band.

    On truncated domains the support is further cut by the window on the
    near-point parameter, which leaves ``grad(delta) . grad(f)`` intact.
    ``profile=None`` is the zero function.
    """

    __test__ = False

    domain: DomainSpec
    profile: TestProfile | None
    band: Band
    components: tuple[int, ...]

    @property
    def is_zero(self) -> bool:
        return self.profile is None

    def evaluate(self, f: DistanceField) -> tuple[NDArray, NDArray]:
        """``eta`` and ``eta'`` at the points of a distance field."""
        if self.profile is None:
            zero = np.zeros_like(f.delta)
            return zero, zero
        eta, deta = self.profile.values(f.delta, self.band.a, self.band.b)
        keep = np.isin(f.component, self.components)
        keep &= self.domain.window(f.params)
        return np.where(keep, eta, 0.0), np.where(keep, deta, 0.0)

    def __call__(self, x: ArrayLike) -> NDArray:
        return self.evaluate(geometry.field(self.domain, x))[0]

    def support_box(self) -> tuple[NDArray, NDArray]:
        return self.domain.support_box(self.band.b)


def _band_components(domain: DomainSpec, band: Band) -> tuple[int, ...]:
    if band.component is None:
        return tuple(domain.components)
    chosen = tuple(
        c for c in domain.components if domain.side(c) == band.component
    )
    if not chosen:
        raise BandEmptyError(
            f"{domain.describe()} has no {band.component} boundary"
        )
    return chosen


def band_ridge_distance(
    domain: DomainSpec, components: tuple[int, ...]
) -> float:
    """Smallest ridge distance over the boundary pieces a band lives on."""
    closed = domain.min_ridge_distance()
    if closed is not None:
        return closed
    best = math.inf
    for c in components:
        lo, hi = domain.sample_bounds(c)[0]
        for s in np.linspace(lo, hi, _RIDGE_SCAN, endpoint=False):
            best = min(best, geometry.ridge_distance(domain, [s], c))
    return best


def make_test_function(
    profile: TestProfile,
    domain: DomainSpec,
    band: Band,
    avoid_ridge: bool = False,
) -> TestFunction:
    if not 0.0 < band.a < band.b:
        raise BandEmptyError(f"band ({band.a}, {band.b}) is empty")
    sup = domain.sup_delta()
    if sup is not None and band.a >= sup:
        raise BandEmptyError(
            f"band starts at {band.a} beyond sup delta {sup} "
            f"of {domain.describe()}"
        )
    components = _band_components(domain, band)
    if avoid_ridge:
        ridge = band_ridge_distance(domain, components)
        if band.b >= ridge:
            raise BandTouchesRidgeError(
                f"band ends at {band.b}, ridge of {domain.describe()} "
                f"starts at {ridge}"
            )
    logger.debug(
        "Test function %s on %s, band (%g, %g)",
        profile.kind,
        domain.describe(),
        band.a,
        band.b,
    )
    return TestFunction(domain, profile, band, components)


def zero_test_function(domain: DomainSpec) -> TestFunction:
    sup = domain.sup_delta() or domain.scale
    band = Band(a=0.5 * min(sup, domain.scale), b=min(sup, domain.scale))
    return TestFunction(domain, None, band, tuple(domain.components))


__all__ = [
    "Band",
    "PowerBump",
    "RadialCustom",
    "SmoothBump",
    "TestFunction",
    "TestProfile",
    "band_ridge_distance",
    "make_test_function",
    "zero_test_function",
]
