"""Distance, near points, ridge and curvature operations on catalog domains.

``grad_delta`` is the unit vector along which the distance grows, that is
``(x - y) / |x - y|`` for the near point ``y``; it coincides with the inward
normal at ``y``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .domains import DomainSpec, Hyperboloid, Torus
from .errors import (
    MarchExceedsTruncationError,
    OnRidgeError,
    ParameterOutOfRangeError,
    PointOutsideDomainError,
    StencilCrossesRidgeError,
    StencilLeavesDomainError,
)
from .telemetry import lab_span, record_outcome

logger = logging.getLogger("HardyLab.Geometry")

RIDGE_EPS = 1e-3
LAPLACIAN_EPS = 1e-9
FD_STEP = 1e-4
MARCH_STEP = 0.05
MARCH_LIMIT = 100.0
RIDGE_PREDICATE_TOL = 1e-9
# coarse step of the h-halving convergence check, as a fraction of scale
CONVERGENCE_STEP = 0.01


@dataclass(frozen=True)
class NearPoint:
    params: NDArray
    point: NDArray
    component: int


@dataclass(frozen=True)
class NearPointResult:
    """Distance and near points of a single interior point.

    ``multiplicity`` is ``math.inf`` when the near points form a continuum
    (disc center, cylinder axis, torus tube circle, hyperboloid axis).
    """

    delta: float
    near_points: tuple[NearPoint, ...]
    multiplicity: float
    grad_delta: NDArray | None


@dataclass(frozen=True)
class CurvatureData:
    kappas: tuple[float, ...]
    level_kappas: tuple[float, ...]
    kappa_tilde: float


@dataclass(frozen=True)
class RidgeVerdict:
    on_ridge: bool
    reason: Literal["multiplicity", "curvature-degenerate", "clear"]
    distance_to_ridge_estimate: float | None = None


@dataclass(frozen=True)
class DistanceField:
    """Distance data at many points, evaluated in one vectorized pass.

    ``ridge`` holds the closed-form distance from the near point to the
    ridge along the inward normal, or ``None`` where the domain has no
    closed form.
    """

    x: NDArray
    delta: NDArray
    grad: NDArray
    point: NDArray
    params: NDArray
    component: NDArray
    kappas: NDArray
    ridge: NDArray | None

    @cached_property
    def factors(self) -> NDArray:
        return 1.0 + self.delta[:, np.newaxis] * self.kappas

    @cached_property
    def level_kappas(self) -> NDArray:
        return self.kappas / self.factors

    @cached_property
    def kappa_tilde(self) -> NDArray:
        return self.level_kappas.sum(axis=1)

    @cached_property
    def min_factor(self) -> NDArray:
        return self.factors.min(axis=1)

    def take(self, mask: NDArray) -> DistanceField:
        return DistanceField(
            x=self.x[mask],
            delta=self.delta[mask],
            grad=self.grad[mask],
            point=self.point[mask],
            params=self.params[mask],
            component=self.component[mask],
            kappas=self.kappas[mask],
            ridge=None if self.ridge is None else self.ridge[mask],
        )


def require_inside(domain: DomainSpec, x: ArrayLike) -> NDArray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != domain.dim:
        raise PointOutsideDomainError(arr, domain.kind)
    if not domain.contains(arr[np.newaxis, :])[0]:
        raise PointOutsideDomainError(arr, domain.kind)
    return arr


def field(domain: DomainSpec, x: ArrayLike) -> DistanceField:
    """Vectorized distance field at the rows of ``x``; no membership check."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    foot = domain.foot(pts)
    return DistanceField(
        x=pts,
        delta=foot.delta,
        grad=foot.normal,
        point=foot.point,
        params=foot.params,
        component=foot.component,
        kappas=domain.curvatures(foot.params, foot.component),
        ridge=domain.ridge_distance(foot.params, foot.component),
    )


def distance(domain: DomainSpec, x: ArrayLike) -> float:
    arr = require_inside(domain, x)
    return float(domain.foot(arr[np.newaxis, :]).delta[0])


def near_points(
    domain: DomainSpec, x: ArrayLike, tol: float | None = None
) -> NearPointResult:
    """All boundary local minimizers within ``tol`` of the global minimum.

    The default tolerance is ``max(1e-9, 1e-7 * delta)``.
    """
    arr = require_inside(domain, x)
    found, continuum = domain.candidates(arr)
    delta = min(c.delta for c in found)
    if tol is None:
        tol = max(1e-9, 1e-7 * delta)
    kept = tuple(
        NearPoint(c.params, c.point, c.component)
        for c in sorted(found, key=lambda c: c.delta)
        if c.delta - delta <= tol
    )
    multiplicity = math.inf if continuum else float(len(kept))
    grad = None
    if multiplicity == 1:
        diff = arr - kept[0].point
        grad = diff / np.linalg.norm(diff)
    return NearPointResult(delta, kept, multiplicity, grad)


def principal_curvatures(
    domain: DomainSpec, s_prime: ArrayLike, component: int = 0
) -> tuple[float, ...]:
    params = np.asarray(s_prime, dtype=float).reshape(-1)
    bounds = domain.param_bounds(component)
    if params.size != len(bounds):
        raise ParameterOutOfRangeError(
            f"{domain.describe()} takes {len(bounds)} boundary parameter(s)"
        )
    for value, (lo, hi) in zip(params, bounds):
        if not lo - 1e-12 <= value <= hi + 1e-12:
            raise ParameterOutOfRangeError(
                f"boundary parameter {value} outside [{lo}, {hi}]"
            )
    row = domain.curvatures(params[np.newaxis, :], component)[0]
    return tuple(float(k) for k in row)


def curvature_data(domain: DomainSpec, x: ArrayLike) -> CurvatureData:
    f = field(domain, require_inside(domain, x))
    return CurvatureData(
        kappas=tuple(float(k) for k in f.kappas[0]),
        level_kappas=tuple(float(k) for k in f.level_kappas[0]),
        kappa_tilde=float(f.kappa_tilde[0]),
    )


def is_near_ridge(
    domain: DomainSpec, x: ArrayLike, eps: float = RIDGE_EPS
) -> RidgeVerdict:
    arr = require_inside(domain, x)
    loose = near_points(domain, arr, tol=eps * distance(domain, arr))
    if loose.multiplicity >= 2:
        return RidgeVerdict(True, "multiplicity", 0.0)
    f = field(domain, arr)
    if f.min_factor[0] <= eps:
        return RidgeVerdict(True, "curvature-degenerate")
    estimate = None
    if f.ridge is not None:
        estimate = float(f.ridge[0] - f.delta[0])
    return RidgeVerdict(False, "clear", estimate)


def _require_off_ridge(domain: DomainSpec, x: NDArray) -> None:
    verdict = is_near_ridge(domain, x, eps=LAPLACIAN_EPS)
    if verdict.on_ridge:
        raise OnRidgeError(
            f"{x.tolist()} is on the ridge of {domain.describe()} "
            f"({verdict.reason})"
        )


def laplacian_distance(domain: DomainSpec, x: ArrayLike) -> float:
    """Sum of level-surface curvatures at the near point of ``x``."""
    arr = require_inside(domain, x)
    _require_off_ridge(domain, arr)
    return float(field(domain, arr).kappa_tilde[0])


def level_surface_curvatures(
    domain: DomainSpec, x: ArrayLike
) -> tuple[float, ...]:
    arr = require_inside(domain, x)
    _require_off_ridge(domain, arr)
    return tuple(float(k) for k in field(domain, arr).level_kappas[0])


def _fd_laplacian(domain: DomainSpec, x: NDArray, h: float) -> NDArray:
    """Central-difference Laplacian of the distance at the rows of ``x``."""
    n = x.shape[1]
    offsets = np.concatenate([h * np.eye(n), -h * np.eye(n)])
    stencil = x[:, np.newaxis, :] + offsets[np.newaxis, :, :]
    d = domain.foot(stencil.reshape(-1, n)).delta.reshape(len(x), 2 * n)
    center = domain.foot(x).delta
    return (d.sum(axis=1) - 2.0 * n * center) / (h * h)


def _fd_gradient(domain: DomainSpec, x: NDArray, h: float) -> NDArray:
    n = x.shape[1]
    offsets = np.concatenate([h * np.eye(n), -h * np.eye(n)])
    stencil = x[:, np.newaxis, :] + offsets[np.newaxis, :, :]
    d = domain.foot(stencil.reshape(-1, n)).delta.reshape(len(x), 2 * n)
    return (d[:, :n] - d[:, n:]) / (2.0 * h)


def _ridge_gap(domain: DomainSpec, x: NDArray) -> float:
    f = field(domain, x)
    if f.ridge is not None:
        return float(f.ridge[0] - f.delta[0])
    if near_points(domain, x).multiplicity != 1:
        return 0.0
    return float(np.linalg.norm(ridge_point(domain, x) - x))


def laplacian_distance_fd(
    domain: DomainSpec, x: ArrayLike, h: float | None = None
) -> float:
    """Finite-difference oracle for :func:`laplacian_distance`."""
    arr = require_inside(domain, x)
    if h is None:
        h = FD_STEP * domain.scale
    delta = distance(domain, arr)
    if delta <= 3.0 * h:
        raise StencilLeavesDomainError(
            f"stencil of step {h} at distance {delta} leaves the domain"
        )
    if _ridge_gap(domain, arr) <= 3.0 * h:
        raise StencilCrossesRidgeError(
            f"stencil of step {h} at {arr.tolist()} crosses the ridge"
        )
    return float(_fd_laplacian(domain, arr[np.newaxis, :], h)[0])


def _on_ray(domain: DomainSpec, y: NDArray, d: NDArray, lam: float) -> bool:
    z = y + lam * d
    if not domain.contains(z[np.newaxis, :])[0]:
        return False
    delta = domain.foot(z[np.newaxis, :]).delta[0]
    return abs(delta - lam) <= RIDGE_PREDICATE_TOL * domain.scale


def ridge_point(domain: DomainSpec, x: ArrayLike) -> NDArray:
    """Last point of the ray from the near point through ``x`` on which the
    distance still grows at unit rate."""
    arr = require_inside(domain, x)
    result = near_points(domain, arr)
    if result.multiplicity != 1:
        raise OnRidgeError(
            f"{arr.tolist()} has {result.multiplicity} near points"
        )
    y = result.near_points[0].point
    d = result.grad_delta
    step = MARCH_STEP * domain.scale
    limit = MARCH_LIMIT * domain.scale
    lo = result.delta
    hi = lo + step
    while _on_ray(domain, y, d, hi):
        lo = hi
        hi += step
        if hi > limit:
            raise MarchExceedsTruncationError(
                f"ridge march on {domain.describe()} passed {limit}"
            )
    while hi - lo > 1e-13 * domain.scale:
        mid = 0.5 * (lo + hi)
        if _on_ray(domain, y, d, mid):
            lo = mid
        else:
            hi = mid
    return y + lo * d


def ridge_distance(
    domain: DomainSpec, s_prime: ArrayLike, component: int = 0
) -> float:
    """Distance from the boundary point at ``s_prime`` to the ridge along
    the inward normal."""
    params = np.asarray(s_prime, dtype=float).reshape(1, -1)
    comp = np.array([component])
    closed = domain.ridge_distance(params, comp)
    if closed is not None:
        return float(closed[0])
    y, normal = domain.boundary(params, comp)
    start = y[0] + 1e-3 * domain.scale * normal[0]
    return float(np.linalg.norm(ridge_point(domain, start) - y[0]))


def torus_extra_term(domain: Torus, x: ArrayLike) -> float:
    """``1/(r - delta) - 1/sqrt(x1^2 + x2^2)``, positive when ``R > 2r``."""
    arr = require_inside(domain, x)
    delta = distance(domain, arr)
    return 1.0 / (domain.r_minor - delta) - 1.0 / math.hypot(arr[0], arr[1])


def hyperboloid_laplacian_as_printed(
    w: ArrayLike, delta: ArrayLike
) -> NDArray:
    """The hyperboloid level curvature sum with the printed sign pattern.

    Differs from the geometric Laplacian ``1/(w^3 + delta) - 1/(w - delta)``
    and, unlike it, takes both signs.
    """
    w = np.asarray(w, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return -1.0 / (w**3 - delta) + 1.0 / (w + delta)


# -- sampled self-check ----------------------------------------------------


@dataclass(frozen=True)
class GeometryReport:
    domain: str
    samples: int
    seed: int
    eikonal_violations: int
    gradient_violations: int
    laplacian_violations: int
    max_laplacian_error: float
    convergence_ratio: float
    sign_violations: int
    positivity_violations: int
    sign_witnesses: dict[str, int] = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        counts = (
            self.eikonal_violations,
            self.gradient_violations,
            self.laplacian_violations,
            self.sign_violations,
            self.positivity_violations,
        )
        return not any(counts) and self.convergence_ratio >= 3.5

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "samples": self.samples,
            "seed": self.seed,
            "eikonal_violations": self.eikonal_violations,
            "gradient_violations": self.gradient_violations,
            "laplacian_violations": self.laplacian_violations,
            "max_laplacian_error": self.max_laplacian_error,
            "convergence_ratio": self.convergence_ratio,
            "sign_violations": self.sign_violations,
            "positivity_violations": self.positivity_violations,
            "sign_witnesses": dict(self.sign_witnesses),
            "passed": self.passed,
        }


def sample_off_ridge(
    domain: DomainSpec,
    count: int,
    rng: np.random.Generator,
    margin: float,
    extent: float | None = None,
) -> NDArray:
    """Interior points at least ``margin`` from the boundary and the ridge.

    Domains with a closed-form ridge are sampled in normal coordinates;
    the others by rejection, keeping points whose normal ray still realizes
    the distance ``margin`` further in.
    """
    if extent is None:
        extent = 2.0 * domain.scale
    probe_params = np.zeros((1, len(domain.param_bounds(0))))
    has_ridge = (
        domain.ridge_distance(probe_params, np.zeros(1, dtype=int))
        is not None
    )
    if has_ridge:
        comps = rng.choice(np.array(domain.components), size=count)
        params = np.empty((count, len(domain.param_bounds(0))))
        for j in range(params.shape[1]):
            for c in domain.components:
                lo, hi = domain.sample_bounds(c)[j]
                rows = comps == c
                params[rows, j] = rng.uniform(lo, hi, np.count_nonzero(rows))
        y, normal = domain.boundary(params, comps)
        ridge = np.minimum(domain.ridge_distance(params, comps), extent)
        t = rng.uniform(0.0, 1.0, count)
        delta = margin + t * np.maximum(ridge - 2.0 * margin, 0.0)
        return y + delta[:, np.newaxis] * normal

    lo, hi = domain.support_box(0.0)
    kept: list[NDArray] = []
    have = 0
    for _ in range(200):
        x = rng.uniform(lo, hi, size=(4 * count, domain.dim))
        x = x[domain.contains(x)]
        if len(x) == 0:
            continue
        f = field(domain, x)
        x = x[f.delta > margin]
        grad = f.grad[f.delta > margin]
        base = f.delta[f.delta > margin]
        ahead = x + margin * grad
        inside = domain.contains(ahead)
        ok = np.zeros(len(x), dtype=bool)
        if inside.any():
            reach = field(domain, ahead[inside]).delta
            ok[inside] = np.abs(reach - base[inside] - margin) <= (
                RIDGE_PREDICATE_TOL * domain.scale + 1e-9 * margin
            )
        kept.append(x[ok])
        have += int(ok.sum())
        if have >= count:
            break
    return np.concatenate(kept)[:count]


def geometry_check(
    domain: DomainSpec, samples: int = 1000, seed: int = 0
) -> GeometryReport:
    """Sampled consistency check of the distance kernel on one domain."""
    scale = domain.scale
    h_fine = FD_STEP * scale
    h_coarse = CONVERGENCE_STEP * scale
    with lab_span(
        "geometry_check", domain=domain.kind, samples=samples, seed=seed
    ) as span:
        rng = np.random.default_rng(seed)
        x = sample_off_ridge(domain, samples, rng, 8.0 * h_coarse)
        f = field(domain, x)

        grad_fd = _fd_gradient(domain, x, h_fine)
        limit = 10.0 * h_fine / scale
        eikonal = np.abs(np.linalg.norm(grad_fd, axis=1) - 1.0) > limit
        gradient = np.linalg.norm(grad_fd - f.grad, axis=1) > limit

        exact = f.kappa_tilde
        err_fine = np.abs(_fd_laplacian(domain, x, h_fine) - exact)
        off = err_fine > 1e-4 * np.maximum(1.0 / scale, np.abs(exact))
        err_a = np.abs(_fd_laplacian(domain, x, h_coarse) - exact)
        err_b = np.abs(_fd_laplacian(domain, x, 0.5 * h_coarse) - exact)
        measurable = err_a > 1e-7 / scale
        if measurable.any():
            ratio = float(np.median(err_a[measurable] / err_b[measurable]))
        else:
            ratio = math.inf

        sign_bad = np.zeros(len(x), dtype=bool)
        witnesses: dict[str, int] = {}
        if domain.exterior:
            sign_bad = exact < 0
        elif domain.convex:
            sign_bad = exact > 1e-12 / scale
        elif isinstance(domain, Torus):
            if domain.R_major > 2.0 * domain.r_minor:
                sign_bad = exact >= 0
        elif isinstance(domain, Hyperboloid):
            w = f.ridge
            printed = hyperboloid_laplacian_as_printed(w, f.delta)
            witnesses = {
                "printed_negative": int(np.count_nonzero(printed < 0)),
                "printed_positive": int(np.count_nonzero(printed > 0)),
                "geometric_negative": int(np.count_nonzero(exact < 0)),
                "geometric_positive": int(np.count_nonzero(exact > 0)),
            }
        sign_violations = int(np.count_nonzero(sign_bad))
        if isinstance(domain, Hyperboloid):
            sign_violations += int(witnesses["printed_negative"] == 0)
            sign_violations += int(witnesses["printed_positive"] == 0)

        positivity = np.zeros(len(x), dtype=bool)
        if domain.exterior:
            positivity = f.min_factor < 1.0 - 1e-12
        elif domain.convex:
            positivity = f.min_factor <= 0.0

        report = GeometryReport(
            domain=domain.describe(),
            samples=len(x),
            seed=seed,
            eikonal_violations=int(np.count_nonzero(eikonal)),
            gradient_violations=int(np.count_nonzero(gradient)),
            laplacian_violations=int(np.count_nonzero(off)),
            max_laplacian_error=float(err_fine.max(initial=0.0)),
            convergence_ratio=ratio,
            sign_violations=sign_violations,
            positivity_violations=int(np.count_nonzero(positivity)),
            sign_witnesses=witnesses,
        )
        record_outcome(
            span,
            passed=report.passed,
            convergence_ratio=report.convergence_ratio,
        )
    if report.passed:
        logger.debug("Geometry check passed on %s", report.domain)
    else:
        logger.warning("Geometry check failed on %s: %s", report.domain,
                       report.to_dict())
    return report


__all__ = [
    "CurvatureData",
    "DistanceField",
    "GeometryReport",
    "NearPoint",
    "NearPointResult",
    "RidgeVerdict",
    "curvature_data",
    "distance",
    "field",
    "geometry_check",
    "hyperboloid_laplacian_as_printed",
    "is_near_ridge",
    "laplacian_distance",
    "laplacian_distance_fd",
    "level_surface_curvatures",
    "near_points",
    "principal_curvatures",
    "ridge_distance",
    "require_inside",
    "ridge_point",
    "sample_off_ridge",
    "torus_extra_term",
]
