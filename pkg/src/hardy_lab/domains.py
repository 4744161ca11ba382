"""Catalog of analytic domains.

Every domain exposes its boundary through a parametrization
``(params, component) -> (point, inward normal)`` together with the
principal curvatures in the inward-normal convention: a convex boundary
seen from inside has non-positive curvatures, seen from outside
non-negative ones.

``foot`` is the vectorized near-point search used by every numerical
routine; ``candidates`` lists all local minimizers for a single point and
backs multiplicity and ridge verdicts.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, ClassVar, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import maps
from .errors import FailedMinimizationError, InadmissibleCombinationError
from .maps import ConformalMapSpec

logger = logging.getLogger("HardyLab.Geometry")

NEAR_POINT_SAMPLES = 256
NEWTON_RTOL = 1e-12
NEWTON_MAX_ITER = 60
# points at or below this fraction of the scale from a symmetry axis have
# a continuum of near points
_AXIS_TOL = 1e-12
_CHUNK = 4096


@dataclass(frozen=True)
class BoundaryFoot:
    """Principal near point of each row of ``x``."""

    delta: NDArray
    point: NDArray
    normal: NDArray
    params: NDArray
    component: NDArray


@dataclass(frozen=True)
class Candidate:
    delta: float
    point: NDArray
    params: NDArray
    component: int


# -- one-dimensional refinement --------------------------------------------


def _newton(
    derivatives: Callable[[NDArray, NDArray], tuple[NDArray, NDArray]],
    t0: NDArray,
    spacing: NDArray | float,
) -> NDArray:
    """Minimize row-wise from ``t0`` given first and second derivatives.

    Steps are clipped to the coarse sampling spacing; where the second
    derivative is not positive a quarter-spacing descent step is taken.
    """
    t = np.array(t0, dtype=float)
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), t.shape)
    done = np.zeros(t.shape, dtype=bool)
    idx = np.arange(t.size)
    for _ in range(NEWTON_MAX_ITER):
        active = idx[~done]
        if active.size == 0:
            return t
        f1, f2 = derivatives(t[active], active)
        newton_step = f1 / np.where(f2 > 0, f2, 1.0)
        step = np.where(f2 > 0, newton_step, np.sign(f1) * spacing[active] / 4)
        step = np.clip(step, -spacing[active], spacing[active])
        t[active] -= step
        converged = np.abs(step) <= NEWTON_RTOL * np.maximum(
            1.0, np.abs(t[active])
        )
        converged |= f1 == 0.0
        done[active[converged]] = True
    if not done.all():
        raise FailedMinimizationError(
            f"near-point refinement did not converge for "
            f"{int(np.count_nonzero(~done))} point(s) within "
            f"{NEWTON_MAX_ITER} iterations"
        )
    return t


# -- closed parametric plane curves ----------------------------------------


@dataclass(frozen=True)
class PlaneCurve:
    """Closed curve ``t -> z(t)`` bounding a planar domain.

    ``sigma`` is +1 when the domain lies to the left of the direction of
    travel.
    """

    point: Callable[[NDArray], NDArray]
    d1: Callable[[NDArray], NDArray]
    d2: Callable[[NDArray], NDArray]
    period: float
    sigma: float
    side: Literal["inner", "outer"] | None = None

    def samples(self, count: int) -> NDArray:
        m = max(8, round(count * self.period / (2.0 * math.pi)))
        return np.arange(m) * (self.period / m)

    def curvature(self, t: NDArray) -> NDArray:
        d1, d2 = self.d1(t), self.d2(t)
        signed = np.imag(np.conj(d1) * d2) / np.abs(d1) ** 3
        return -self.sigma * signed

    def normal(self, t: NDArray) -> NDArray:
        d1 = self.d1(t)
        n = self.sigma * 1j * d1 / np.abs(d1)
        return np.stack([n.real, n.imag], axis=-1)

    def refine(self, z: NDArray, t0: NDArray, spacing: float) -> NDArray:
        def derivatives(t, rows):
            g = self.point(t) - z[rows]
            d1 = self.d1(t)
            f1 = 2.0 * np.real(np.conj(d1) * g)
            f2 = 2.0 * (np.real(np.conj(self.d2(t)) * g) + np.abs(d1) ** 2)
            return f1, f2

        return np.mod(_newton(derivatives, t0, spacing), self.period)


def _curves_foot(
    curves: list[PlaneCurve], z: NDArray
) -> tuple[NDArray, NDArray, NDArray]:
    """Distance, parameter and curve index of the nearest boundary point."""
    best_d = np.full(z.shape, np.inf)
    best_t = np.zeros(z.shape)
    best_c = np.zeros(z.shape, dtype=int)
    for c, curve in enumerate(curves):
        grid = curve.samples(NEAR_POINT_SAMPLES)
        pts = curve.point(grid)
        t0 = np.empty(z.shape)
        for lo in range(0, z.size, _CHUNK):
            block = z[lo : lo + _CHUNK]
            d2 = np.abs(pts[np.newaxis, :] - block[:, np.newaxis]) ** 2
            t0[lo : lo + _CHUNK] = grid[np.argmin(d2, axis=1)]
        t = curve.refine(z, t0, grid[1] - grid[0])
        d = np.abs(curve.point(t) - z)
        better = d < best_d
        best_d = np.where(better, d, best_d)
        best_t = np.where(better, t, best_t)
        best_c = np.where(better, c, best_c)
    return best_d, best_t, best_c


def _curves_candidates(
    curves: list[PlaneCurve], z: complex
) -> tuple[list[tuple[float, float, int]], bool]:
    found: list[tuple[float, float, int]] = []
    continuum = False
    for c, curve in enumerate(curves):
        grid = curve.samples(NEAR_POINT_SAMPLES)
        d = np.abs(curve.point(grid) - z)
        local = np.flatnonzero((d <= np.roll(d, 1)) & (d <= np.roll(d, -1)))
        if local.size >= grid.size // 4:
            continuum = True
        zz = np.full(local.size, z)
        t = curve.refine(zz, grid[local], grid[1] - grid[0])
        kept: list[float] = []
        for ti in t:
            gap = [
                min(abs(ti - k), curve.period - abs(ti - k)) for k in kept
            ]
            if all(g > 1e-7 * curve.period for g in gap):
                kept.append(float(ti))
        for ti in kept:
            found.append((float(abs(curve.point(ti) - z)), ti, c))
    return found, continuum


# -- sphere helpers (n = 2, 3) ---------------------------------------------


def _unit_params(u: NDArray) -> NDArray:
    if u.shape[1] == 2:
        return np.arctan2(u[:, 1], u[:, 0])[:, np.newaxis]
    theta = np.arccos(np.clip(u[:, 2], -1.0, 1.0))
    phi = np.arctan2(u[:, 1], u[:, 0])
    return np.stack([theta, phi], axis=1)


def _unit_from_params(params: NDArray, n: int) -> NDArray:
    if n == 2:
        th = params[:, 0]
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    theta, phi = params[:, 0], params[:, 1]
    return np.stack(
        [
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        ],
        axis=1,
    )


def _radial_units(x: NDArray) -> tuple[NDArray, NDArray]:
    r = np.linalg.norm(x, axis=1)
    fallback = np.zeros_like(x)
    fallback[:, 0] = 1.0
    safe = np.where(r > 0, r, 1.0)[:, np.newaxis]
    u = np.where((r > 0)[:, np.newaxis], x / safe, fallback)
    return r, u


def _sphere_area(radius: float, params: NDArray, n: int) -> NDArray:
    if n == 2:
        return np.full(params.shape[0], radius)
    return radius**2 * np.sin(params[:, 0])


def _sphere_bounds(n: int) -> list[tuple[float, float]]:
    if n == 2:
        return [(-math.pi, math.pi)]
    return [(0.0, math.pi), (-math.pi, math.pi)]


def _sphere_nodes(radius: float, n: int) -> tuple[NDArray, NDArray]:
    """One representative node carrying the whole sphere's measure."""
    if n == 2:
        return np.zeros((1, 1)), np.array([2.0 * math.pi * radius])
    return (
        np.array([[math.pi / 2, 0.0]]),
        np.array([4.0 * math.pi * radius**2]),
    )


def _midpoint_nodes(lo: float, hi: float, m: int) -> tuple[NDArray, NDArray]:
    h = (hi - lo) / m
    return lo + (np.arange(m) + 0.5) * h, np.full(m, h)


def _gauss_nodes(lo: float, hi: float, m: int) -> tuple[NDArray, NDArray]:
    panels = max(1, m // 16)
    x, w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, np.newaxis] + half[:, np.newaxis] * x).ravel()
    weights = (half[:, np.newaxis] * w).ravel()
    return nodes, weights


# -- domain variants -------------------------------------------------------


class _DomainBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    convex: ClassVar[bool] = False
    exterior: ClassVar[bool] = False
    components: ClassVar[tuple[int, ...]] = (0,)

    @property
    def dim(self) -> int:
        return 2

    def side(self, component: int) -> Literal["inner", "outer"] | None:
        return None

    def truncation(self) -> dict[str, float]:
        return {}

    def window(self, params: NDArray) -> NDArray:
        return np.ones(params.shape[0], dtype=bool)

    def sample_bounds(self, component: int) -> list[tuple[float, float]]:
        return self.param_bounds(component)

    def ridge_distance(self, params: NDArray, component: NDArray):
        return None

    def sup_delta(self) -> float | None:
        return None

    def min_ridge_distance(self) -> float | None:
        return None

    def boundary_nodes(
        self, resolution: int, component: int
    ) -> tuple[NDArray, NDArray]:
        raise InadmissibleCombinationError(
            f"no normal-coordinate quadrature for {self.describe()}"
        )


class Disc(_DomainBase):
    """Ball ``|x| < R``; ``n = 3`` is spelled ``ball:R=..`` in configs."""

    kind: Literal["disc"] = "disc"
    R: float = Field(gt=0)
    n: Literal[2, 3] = 2

    convex: ClassVar[bool] = True

    @property
    def dim(self) -> int:
        return self.n

    @property
    def scale(self) -> float:
        return self.R

    def describe(self) -> str:
        return f"{'disc' if self.n == 2 else 'ball'}:R={self.R:g}"

    def contains(self, x: NDArray) -> NDArray:
        return np.linalg.norm(x, axis=1) < self.R

    def foot(self, x: NDArray) -> BoundaryFoot:
        r, u = _radial_units(x)
        return BoundaryFoot(
            delta=self.R - r,
            point=self.R * u,
            normal=-u,
            params=_unit_params(u),
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x: NDArray) -> tuple[list[Candidate], bool]:
        f = self.foot(x[np.newaxis, :])
        cand = Candidate(float(f.delta[0]), f.point[0], f.params[0], 0)
        return [cand], bool(np.linalg.norm(x) <= _AXIS_TOL * self.R)

    def boundary(self, params, component):
        u = _unit_from_params(params, self.n)
        return self.R * u, -u

    def curvatures(self, params, component):
        return np.full((params.shape[0], self.n - 1), -1.0 / self.R)

    def area_element(self, params, component):
        return _sphere_area(self.R, params, self.n)

    def ridge_distance(self, params, component):
        return np.full(params.shape[0], self.R)

    def param_bounds(self, component):
        return _sphere_bounds(self.n)

    def sup_delta(self):
        return self.R

    def min_ridge_distance(self):
        return self.R

    def boundary_nodes(self, resolution, component):
        return _sphere_nodes(self.R, self.n)

    def support_box(self, b: float) -> tuple[NDArray, NDArray]:
        return np.full(self.n, -self.R), np.full(self.n, self.R)


class Annulus(_DomainBase):
    """Shell ``rho < |x| < R``; component 0 is the inner sphere."""

    kind: Literal["annulus"] = "annulus"
    rho: float = Field(gt=0)
    R: float = Field(gt=0)
    n: Literal[2, 3] = 2

    components: ClassVar[tuple[int, ...]] = (0, 1)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.rho < self.R:
            raise ValueError(f"need rho < R, got rho={self.rho} R={self.R}")
        return self

    @property
    def dim(self) -> int:
        return self.n

    @property
    def scale(self) -> float:
        return self.R

    def describe(self) -> str:
        extra = "" if self.n == 2 else f",n={self.n}"
        return f"annulus:rho={self.rho:g},R={self.R:g}{extra}"

    def side(self, component):
        return "inner" if component == 0 else "outer"

    def _radius(self, component) -> NDArray:
        return np.where(np.asarray(component) == 0, self.rho, self.R)

    def contains(self, x):
        r = np.linalg.norm(x, axis=1)
        return (r > self.rho) & (r < self.R)

    def foot(self, x):
        r, u = _radial_units(x)
        outer = (self.R - r) < (r - self.rho)
        radius = np.where(outer, self.R, self.rho)
        sign = np.where(outer, -1.0, 1.0)[:, np.newaxis]
        return BoundaryFoot(
            delta=np.where(outer, self.R - r, r - self.rho),
            point=radius[:, np.newaxis] * u,
            normal=sign * u,
            params=_unit_params(u),
            component=outer.astype(int),
        )

    def candidates(self, x):
        r, u = _radial_units(x[np.newaxis, :])
        params = _unit_params(u)[0]
        return [
            Candidate(float(r[0] - self.rho), self.rho * u[0], params, 0),
            Candidate(float(self.R - r[0]), self.R * u[0], params, 1),
        ], False

    def boundary(self, params, component):
        u = _unit_from_params(params, self.n)
        comp = np.broadcast_to(np.asarray(component), (params.shape[0],))
        sign = np.where(comp == 0, 1.0, -1.0)[:, np.newaxis]
        return self._radius(comp)[:, np.newaxis] * u, sign * u

    def curvatures(self, params, component):
        comp = np.broadcast_to(np.asarray(component), (params.shape[0],))
        kappa = np.where(comp == 0, 1.0 / self.rho, -1.0 / self.R)
        return np.repeat(kappa[:, np.newaxis], self.n - 1, axis=1)

    def area_element(self, params, component):
        comp = np.broadcast_to(np.asarray(component), (params.shape[0],))
        inner = _sphere_area(self.rho, params, self.n)
        outer = _sphere_area(self.R, params, self.n)
        return np.where(comp == 0, inner, outer)

    def ridge_distance(self, params, component):
        return np.full(params.shape[0], 0.5 * (self.R - self.rho))

    def param_bounds(self, component):
        return _sphere_bounds(self.n)

    def sup_delta(self):
        return 0.5 * (self.R - self.rho)

    def min_ridge_distance(self):
        return 0.5 * (self.R - self.rho)

    def boundary_nodes(self, resolution, component):
        return _sphere_nodes(self.rho if component == 0 else self.R, self.n)

    def support_box(self, b):
        return np.full(self.n, -self.R), np.full(self.n, self.R)


class ExteriorDisc(_DomainBase):
    """Complement of the closed ball ``|x| <= rho``; no ridge."""

    kind: Literal["exterior-disc"] = "exterior-disc"
    rho: float = Field(gt=0)
    n: Literal[2, 3] = 2

    exterior: ClassVar[bool] = True

    @property
    def dim(self) -> int:
        return self.n

    @property
    def scale(self) -> float:
        return self.rho

    def describe(self) -> str:
        extra = "" if self.n == 2 else f",n={self.n}"
        return f"exterior-disc:rho={self.rho:g}{extra}"

    def contains(self, x):
        return np.linalg.norm(x, axis=1) > self.rho

    def foot(self, x):
        r, u = _radial_units(x)
        return BoundaryFoot(
            delta=r - self.rho,
            point=self.rho * u,
            normal=u,
            params=_unit_params(u),
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x):
        f = self.foot(x[np.newaxis, :])
        cand = Candidate(float(f.delta[0]), f.point[0], f.params[0], 0)
        return [cand], False

    def boundary(self, params, component):
        u = _unit_from_params(params, self.n)
        return self.rho * u, u

    def curvatures(self, params, component):
        return np.full((params.shape[0], self.n - 1), 1.0 / self.rho)

    def area_element(self, params, component):
        return _sphere_area(self.rho, params, self.n)

    def ridge_distance(self, params, component):
        return np.full(params.shape[0], np.inf)

    def param_bounds(self, component):
        return _sphere_bounds(self.n)

    def sup_delta(self):
        return math.inf

    def min_ridge_distance(self):
        return math.inf

    def boundary_nodes(self, resolution, component):
        return _sphere_nodes(self.rho, self.n)

    def support_box(self, b):
        reach = self.rho + b
        return np.full(self.n, -reach), np.full(self.n, reach)


class Ellipse(_DomainBase):
    """Interior of ``(x/a)^2 + (y/b)^2 = 1``."""

    kind: Literal["ellipse"] = "ellipse"
    a: float = Field(gt=0)
    b: float = Field(gt=0)

    convex: ClassVar[bool] = True

    @property
    def scale(self) -> float:
        return max(self.a, self.b)

    def describe(self) -> str:
        return f"ellipse:a={self.a:g},b={self.b:g}"

    def curve(self) -> PlaneCurve:
        a, b = self.a, self.b
        return PlaneCurve(
            point=lambda t: a * np.cos(t) + 1j * b * np.sin(t),
            d1=lambda t: -a * np.sin(t) + 1j * b * np.cos(t),
            d2=lambda t: -a * np.cos(t) - 1j * b * np.sin(t),
            period=2.0 * math.pi,
            sigma=1.0,
        )

    def _speed(self, t: NDArray) -> NDArray:
        return np.hypot(self.a * np.sin(t), self.b * np.cos(t))

    def contains(self, x):
        return (x[:, 0] / self.a) ** 2 + (x[:, 1] / self.b) ** 2 < 1.0

    def foot(self, x):
        curve = self.curve()
        z = x[:, 0] + 1j * x[:, 1]
        d, t, _ = _curves_foot([curve], z)
        y = curve.point(t)
        return BoundaryFoot(
            delta=d,
            point=np.stack([y.real, y.imag], axis=1),
            normal=curve.normal(t),
            params=t[:, np.newaxis],
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x):
        curve = self.curve()
        found, continuum = _curves_candidates([curve], complex(x[0], x[1]))
        out = []
        for d, t, _ in found:
            y = curve.point(t)
            xy = np.array([y.real, y.imag])
            out.append(Candidate(d, xy, np.array([t]), 0))
        return out, continuum

    def boundary(self, params, component):
        curve = self.curve()
        t = params[:, 0]
        y = curve.point(t)
        return np.stack([y.real, y.imag], axis=1), curve.normal(t)

    def curvatures(self, params, component):
        return self.curve().curvature(params[:, 0])[:, np.newaxis]

    def area_element(self, params, component):
        return self._speed(params[:, 0])

    def ridge_distance(self, params, component):
        lo, hi = sorted((self.a, self.b))
        return lo * self._speed(params[:, 0]) / hi

    def param_bounds(self, component):
        return [(0.0, 2.0 * math.pi)]

    def sup_delta(self):
        return min(self.a, self.b)

    def min_ridge_distance(self):
        lo, hi = sorted((self.a, self.b))
        return lo * lo / hi

    def boundary_nodes(self, resolution, component):
        t, w = _midpoint_nodes(0.0, 2.0 * math.pi, resolution)
        params = t[:, np.newaxis]
        return params, w * self.area_element(params, component)

    def support_box(self, b):
        return np.array([-self.a, -self.b]), np.array([self.a, self.b])


class Cylinder(_DomainBase):
    """Infinite solid cylinder ``x1^2 + x2^2 < r^2``.

    ``half_height`` truncates test-function supports through the near-point
    axial parameter only.
    """

    kind: Literal["cylinder"] = "cylinder"
    r: float = Field(gt=0)
    half_height: float = Field(gt=0)

    convex: ClassVar[bool] = True

    @property
    def dim(self) -> int:
        return 3

    @property
    def scale(self) -> float:
        return self.r

    def describe(self) -> str:
        return f"cylinder:r={self.r:g},half_height={self.half_height:g}"

    def truncation(self):
        return {"half_height": self.half_height}

    def window(self, params):
        return np.abs(params[:, 1]) <= self.half_height

    def contains(self, x):
        return np.hypot(x[:, 0], x[:, 1]) < self.r

    def foot(self, x):
        rc = np.hypot(x[:, 0], x[:, 1])
        theta = np.arctan2(x[:, 1], x[:, 0])
        params = np.stack([theta, x[:, 2]], axis=1)
        point, normal = self.boundary(params, 0)
        return BoundaryFoot(
            delta=self.r - rc,
            point=point,
            normal=normal,
            params=params,
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x):
        f = self.foot(x[np.newaxis, :])
        continuum = bool(np.hypot(x[0], x[1]) <= _AXIS_TOL * self.r)
        return [
            Candidate(float(f.delta[0]), f.point[0], f.params[0], 0)
        ], continuum

    def boundary(self, params, component):
        theta, z = params[:, 0], params[:, 1]
        c, s = np.cos(theta), np.sin(theta)
        point = np.stack([self.r * c, self.r * s, z], axis=1)
        normal = np.stack([-c, -s, np.zeros_like(c)], axis=1)
        return point, normal

    def curvatures(self, params, component):
        k = np.zeros((params.shape[0], 2))
        k[:, 0] = -1.0 / self.r
        return k

    def area_element(self, params, component):
        return np.full(params.shape[0], self.r)

    def ridge_distance(self, params, component):
        return np.full(params.shape[0], self.r)

    def param_bounds(self, component):
        return [(-math.pi, math.pi), (-math.inf, math.inf)]

    def sample_bounds(self, component):
        return [(-math.pi, math.pi), (-self.half_height, self.half_height)]

    def sup_delta(self):
        return self.r

    def min_ridge_distance(self):
        return self.r

    def boundary_nodes(self, resolution, component):
        length = 2.0 * self.half_height
        return np.zeros((1, 2)), np.array([2.0 * math.pi * self.r * length])

    def support_box(self, b):
        lo = np.array([-self.r, -self.r, -self.half_height])
        return lo, -lo


class Torus(_DomainBase):
    """Solid ring torus; ``params = (azimuth, tube angle)``."""

    kind: Literal["torus"] = "torus"
    R_major: float = Field(gt=0)
    r_minor: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_ring(self):
        if not self.R_major > self.r_minor:
            raise ValueError(
                f"need R_major > r_minor, got {self.R_major} <= {self.r_minor}"
            )
        return self

    @property
    def dim(self) -> int:
        return 3

    @property
    def scale(self) -> float:
        return self.R_major

    def describe(self) -> str:
        return f"torus:R={self.R_major:g},r={self.r_minor:g}"

    def _tube(self, x: NDArray) -> tuple[NDArray, NDArray, NDArray]:
        rxy = np.hypot(x[:, 0], x[:, 1])
        phi = np.arctan2(x[:, 1], x[:, 0])
        psi = np.arctan2(x[:, 2], rxy - self.R_major)
        return np.hypot(rxy - self.R_major, x[:, 2]), phi, psi

    def contains(self, x):
        return self._tube(x)[0] < self.r_minor

    def foot(self, x):
        rho_tube, phi, psi = self._tube(x)
        params = np.stack([phi, psi], axis=1)
        point, normal = self.boundary(params, 0)
        return BoundaryFoot(
            delta=self.r_minor - rho_tube,
            point=point,
            normal=normal,
            params=params,
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x):
        f = self.foot(x[np.newaxis, :])
        continuum = bool(
            self._tube(x[np.newaxis, :])[0][0] <= _AXIS_TOL * self.r_minor
        )
        return [
            Candidate(float(f.delta[0]), f.point[0], f.params[0], 0)
        ], continuum

    def boundary(self, params, component):
        phi, psi = params[:, 0], params[:, 1]
        ring = self.R_major + self.r_minor * np.cos(psi)
        point = np.stack(
            [
                ring * np.cos(phi),
                ring * np.sin(phi),
                self.r_minor * np.sin(psi),
            ],
            axis=1,
        )
        normal = -np.stack(
            [
                np.cos(psi) * np.cos(phi),
                np.cos(psi) * np.sin(phi),
                np.sin(psi),
            ],
            axis=1,
        )
        return point, normal

    def curvatures(self, params, component):
        psi = params[:, 1]
        k2 = -np.cos(psi) / (self.R_major + self.r_minor * np.cos(psi))
        return np.stack([np.full_like(psi, -1.0 / self.r_minor), k2], axis=1)

    def area_element(self, params, component):
        psi = params[:, 1]
        return self.r_minor * (self.R_major + self.r_minor * np.cos(psi))

    def ridge_distance(self, params, component):
        return np.full(params.shape[0], self.r_minor)

    def param_bounds(self, component):
        return [(-math.pi, math.pi), (-math.pi, math.pi)]

    def sup_delta(self):
        return self.r_minor

    def min_ridge_distance(self):
        return self.r_minor

    def boundary_nodes(self, resolution, component):
        psi, w = _midpoint_nodes(-math.pi, math.pi, resolution)
        params = np.stack([np.zeros_like(psi), psi], axis=1)
        return params, 2.0 * math.pi * w * self.area_element(params, 0)

    def support_box(self, b):
        reach = self.R_major + self.r_minor
        lo = np.array([-reach, -reach, -self.r_minor])
        return lo, -lo


class Hyperboloid(_DomainBase):
    """Inside of the one-sheeted hyperboloid ``x1^2 + x2^2 < 1 + x3^2``.

    ``params = (s, t)`` with boundary point ``(sqrt(1+s^2) cos t,
    sqrt(1+s^2) sin t, s)``. The ridge is the ``x3`` axis and the ridge
    distance from the boundary point at ``s`` is ``w = sqrt(2 s^2 + 1)``.
    ``s_max`` truncates supports through the near-point parameter.
    """

    kind: Literal["hyperboloid"] = "hyperboloid"
    s_max: float = Field(gt=0)

    @property
    def dim(self) -> int:
        return 3

    @property
    def scale(self) -> float:
        return 1.0

    def describe(self) -> str:
        return f"hyperboloid:s_max={self.s_max:g}"

    def truncation(self):
        return {"s_max": self.s_max}

    def window(self, params):
        return np.abs(params[:, 0]) <= self.s_max

    def contains(self, x):
        return x[:, 0] ** 2 + x[:, 1] ** 2 < 1.0 + x[:, 2] ** 2

    def _meridian_foot(self, rc: NDArray, z: NDArray) -> NDArray:
        reach = np.sqrt(1.0 + z * z) + 1.0
        unit = np.linspace(-1.0, 1.0, NEAR_POINT_SAMPLES)
        s0 = np.empty_like(z)
        for lo in range(0, z.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            grid = z[sl, np.newaxis] + reach[sl, np.newaxis] * unit
            g = (np.sqrt(1.0 + grid**2) - rc[sl, np.newaxis]) ** 2 + (
                grid - z[sl, np.newaxis]
            ) ** 2
            s0[sl] = grid[np.arange(grid.shape[0]), np.argmin(g, axis=1)]

        def derivatives(s, rows):
            r = np.sqrt(1.0 + s * s)
            gap = r - rc[rows]
            f1 = 2.0 * gap * s / r + 2.0 * (s - z[rows])
            f2 = 2.0 * (s * s / r**2 + gap / r**3) + 2.0
            return f1, f2

        return _newton(derivatives, s0, reach * (unit[1] - unit[0]))

    def foot(self, x):
        rc = np.hypot(x[:, 0], x[:, 1])
        t = np.arctan2(x[:, 1], x[:, 0])
        s = self._meridian_foot(rc, x[:, 2])
        params = np.stack([s, t], axis=1)
        point, normal = self.boundary(params, 0)
        return BoundaryFoot(
            delta=np.linalg.norm(point - x, axis=1),
            point=point,
            normal=normal,
            params=params,
            component=np.zeros(len(x), dtype=int),
        )

    def candidates(self, x):
        f = self.foot(x[np.newaxis, :])
        continuum = bool(np.hypot(x[0], x[1]) <= _AXIS_TOL)
        return [
            Candidate(float(f.delta[0]), f.point[0], f.params[0], 0)
        ], continuum

    def boundary(self, params, component):
        s, t = params[:, 0], params[:, 1]
        r = np.sqrt(1.0 + s * s)
        w = np.sqrt(2.0 * s * s + 1.0)
        point = np.stack([r * np.cos(t), r * np.sin(t), s], axis=1)
        normal = np.stack([-r * np.cos(t), -r * np.sin(t), s], axis=1)
        return point, normal / w[:, np.newaxis]

    def curvatures(self, params, component):
        w = np.sqrt(2.0 * params[:, 0] ** 2 + 1.0)
        # (parallel, meridian)
        return np.stack([-1.0 / w, 1.0 / w**3], axis=1)

    def area_element(self, params, component):
        return np.sqrt(2.0 * params[:, 0] ** 2 + 1.0)

    def ridge_distance(self, params, component):
        return np.sqrt(2.0 * params[:, 0] ** 2 + 1.0)

    def param_bounds(self, component):
        return [(-math.inf, math.inf), (-math.pi, math.pi)]

    def sample_bounds(self, component):
        return [(-self.s_max, self.s_max), (-math.pi, math.pi)]

    def sup_delta(self):
        return math.inf

    def min_ridge_distance(self):
        return 1.0

    def boundary_nodes(self, resolution, component):
        s, w = _gauss_nodes(-self.s_max, self.s_max, resolution)
        params = np.stack([s, np.zeros_like(s)], axis=1)
        return params, 2.0 * math.pi * w * self.area_element(params, 0)

    def support_box(self, b):
        reach = math.sqrt(1.0 + self.s_max**2)
        lo = np.array([-reach, -reach, -(self.s_max + b)])
        return lo, -lo


class ConformalAnnulus(_DomainBase):
    """Doubly connected x-domain of a closed-form map onto an annulus."""

    kind: Literal["conformal"] = "conformal"
    map: ConformalMapSpec

    @property
    def scale(self) -> float:
        return maps.bounding_radius(self.map)

    @property
    def components(self) -> tuple[int, ...]:
        return tuple(range(len(_conformal_curves(self))))

    def describe(self) -> str:
        return f"conformal:{maps.describe(self.map)}"

    def side(self, component):
        return _conformal_curves(self)[component].side

    def contains(self, x):
        return maps.contains(self.map, x[:, 0] + 1j * x[:, 1])

    def foot(self, x):
        curves = _conformal_curves(self)
        z = x[:, 0] + 1j * x[:, 1]
        d, t, c = _curves_foot(curves, z)
        params = t[:, np.newaxis]
        point, normal = self.boundary(params, c)
        return BoundaryFoot(
            delta=d, point=point, normal=normal, params=params, component=c
        )

    def candidates(self, x):
        curves = _conformal_curves(self)
        found, continuum = _curves_candidates(curves, complex(x[0], x[1]))
        out = []
        for d, t, c in found:
            y = curves[c].point(t)
            xy = np.array([y.real, y.imag])
            out.append(Candidate(d, xy, np.array([t]), c))
        return out, continuum

    def _per_curve(self, params, component, fn):
        comp = np.broadcast_to(np.asarray(component), (params.shape[0],))
        curves = _conformal_curves(self)
        out = None
        for c in np.unique(comp):
            rows = comp == c
            value = fn(curves[int(c)], params[rows, 0])
            if out is None:
                shape = (params.shape[0],) + value.shape[1:]
                out = np.zeros(shape, value.dtype)
            out[rows] = value
        return out

    def boundary(self, params, component):
        def point(curve, t):
            y = curve.point(t)
            return np.stack([y.real, y.imag], axis=1)

        return (
            self._per_curve(params, component, point),
            self._per_curve(params, component, lambda c, t: c.normal(t)),
        )

    def curvatures(self, params, component):
        k = self._per_curve(params, component, lambda c, t: c.curvature(t))
        return k[:, np.newaxis]

    def area_element(self, params, component):
        return self._per_curve(
            params, component, lambda c, t: np.abs(c.d1(t))
        )

    def param_bounds(self, component):
        return [(0.0, _conformal_curves(self)[component].period)]

    def support_box(self, b):
        reach = maps.bounding_radius(self.map)
        return np.full(2, -reach), np.full(2, reach)


@lru_cache(maxsize=64)
def _conformal_curves(domain: ConformalAnnulus) -> list[PlaneCurve]:
    curves = []
    eps = 1e-6 * maps.bounding_radius(domain.map)
    for level in maps.level_curves(domain.map):
        t0 = np.array([0.0])
        d1 = level.d1(t0)
        probe = level.point(t0) + eps * 1j * d1 / np.abs(d1)
        sigma = 1.0 if maps.contains(domain.map, probe)[0] else -1.0
        curves.append(
            PlaneCurve(
                point=level.point,
                d1=level.d1,
                d2=level.d2,
                period=level.period,
                sigma=sigma,
                side="inner" if level.component == 0 else "outer",
            )
        )
    logger.debug(
        "Oriented %d boundary curves for %s", len(curves), domain.describe()
    )
    return curves


DomainSpec = Annotated[
    Disc
    | Annulus
    | Ellipse
    | ExteriorDisc
    | Cylinder
    | Torus
    | Hyperboloid
    | ConformalAnnulus,
    Field(discriminator="kind"),
]


__all__ = [
    "Annulus",
    "BoundaryFoot",
    "Candidate",
    "ConformalAnnulus",
    "Cylinder",
    "Disc",
    "DomainSpec",
    "Ellipse",
    "ExteriorDisc",
    "Hyperboloid",
    "NEAR_POINT_SAMPLES",
    "NEWTON_MAX_ITER",
    "NEWTON_RTOL",
    "PlaneCurve",
    "Torus",
]
