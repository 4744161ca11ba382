"""Conformal invariant of doubly connected planar domains.

For an analytic univalent ``F`` onto the annulus ``rho < |w| < R`` the
weight::

    -|F'|^2 / |F|^2 + |F'|^2 (1 / (|F| - rho) + 1 / (R - |F|))^2

depends only on the x-domain. Pulling the annulus Hardy inequality back
through ``F`` gives ``int |grad u|^2 >= 1/4 int weight |u|^2`` there.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import maps
from .errors import (
    AnnulusBoundaryError,
    BandEmptyError,
    InadmissibleCombinationError,
    PointOutsideDomainError,
    SampleOutsideDomainError,
)
from .maps import (
    Composed,
    ConformalMapSpec,
    IdentityAnnulus,
    SqrtQuadratic,
    Squaring,
    Transform,
)
from .profiles import Band, TestProfile
from .quadrature import QuadratureSpec, log_gauss_nodes
from .telemetry import lab_span
from .verifier import HardyReport

logger = logging.getLogger("HardyLab.Conformal")

BOUNDARY_GAP = 1e-12
INVARIANCE_TOLERANCE = 1e-10
# fraction of the annulus width kept clear of both circles when sampling
SAMPLE_MARGIN = 1e-2
_SAMPLE_ROUNDS = 100
_GRAD_STEP = 1e-6


@dataclass(frozen=True)
class FrakFValue:
    value: float | NDArray
    components: tuple[float | NDArray, float | NDArray]


def frak_F(spec: ConformalMapSpec, z: ArrayLike) -> FrakFValue:
    arr = np.asarray(z, dtype=complex)
    rho, R = maps.target_radii(spec)
    m = maps.map_modulus(spec, arr)
    if np.any((m <= rho) | (m >= R)) or not np.all(maps.contains(spec, arr)):
        first = np.atleast_1d(arr)[0]
        raise PointOutsideDomainError(
            (first.real, first.imag), f"domain of {maps.describe(spec)}"
        )
    if np.any((m - rho < BOUNDARY_GAP) | (R - m < BOUNDARY_GAP)):
        raise AnnulusBoundaryError(
            f"|F| within {BOUNDARY_GAP} of the annulus boundary"
        )
    d2 = maps.deriv_modulus(spec, arr) ** 2
    negative = -d2 / m**2
    positive = d2 * (1.0 / (m - rho) + 1.0 / (R - m)) ** 2
    if arr.ndim == 0:
        negative, positive = float(negative), float(positive)
    return FrakFValue(negative + positive, (negative, positive))


def example_display(spec: SqrtQuadratic, z: ArrayLike) -> NDArray:
    """Closed form printed for the square-root example.

    It uses ``sqrt(|z|^2 - 1)`` where the invariant has ``|z^2 - 1|^(1/2)``;
    the two agree on the real axis beyond the branch points only. NaN where
    ``|z| <= 1``.
    """
    z = np.asarray(z, dtype=complex)
    rho, R = spec.rho, spec.R
    q = np.abs(z * z - 1.0)
    r2 = np.abs(z) ** 2
    s = np.sqrt(np.where(r2 > 1.0, r2 - 1.0, np.nan))
    return -r2 / q**2 + r2 / q * (R - rho) ** 2 / (
        (s - rho) ** 2 * (R - s) ** 2
    )


def sample_domain(
    spec: ConformalMapSpec,
    count: int,
    rng: np.random.Generator,
    margin: float = SAMPLE_MARGIN,
) -> NDArray:
    """Points of the x-domain whose image keeps ``margin * (R - rho)``
    clear of both circles; rejection from the bounding square."""
    rho, R = maps.target_radii(spec)
    gap = margin * (R - rho)
    half = maps.bounding_radius(spec)
    kept: list[NDArray] = []
    have = 0
    for _ in range(_SAMPLE_ROUNDS):
        xy = rng.uniform(-half, half, (4 * count, 2))
        z = xy[:, 0] + 1j * xy[:, 1]
        z = z[maps.contains(spec, z)]
        m = maps.map_modulus(spec, z)
        z = z[(m > rho + gap) & (m < R - gap)]
        kept.append(z)
        have += len(z)
        if have >= count:
            return np.concatenate(kept)[:count]
    raise SampleOutsideDomainError(
        f"found {have} of {count} samples in {maps.describe(spec)} after "
        f"{_SAMPLE_ROUNDS} rounds"
    )


@dataclass(frozen=True)
class InvarianceResult:
    map: str
    transform: str
    samples: int
    max_deviation: float
    max_relative_deviation: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= INVARIANCE_TOLERANCE

    def to_dict(self) -> dict[str, Any]:
        return {
            "map": self.map,
            "transform": self.transform,
            "samples": self.samples,
            "max_deviation": self.max_deviation,
            "max_relative_deviation": self.max_relative_deviation,
            "passed": self.passed,
        }


def invariance_check(
    spec: ConformalMapSpec,
    transform: Transform,
    samples: int = 1000,
    seed: int = 0,
) -> InvarianceResult:
    """Largest absolute change of the invariant when ``F`` is followed by
    ``transform``, over random points of the x-domain.

    The relative change is reported alongside.
    """
    composed = Composed(base=spec, transform=transform)
    with lab_span(
        "invariance_check",
        map=maps.describe(spec),
        transform=transform.kind,
        samples=samples,
    ):
        rng = np.random.default_rng(seed)
        z = sample_domain(spec, samples, rng)
        direct = frak_F(spec, z).value
        moved = frak_F(composed, z).value
        deviation = np.abs(direct - moved)
        relative = deviation / np.maximum(np.abs(direct), 1e-300)
    result = InvarianceResult(
        map=maps.describe(spec),
        transform=maps.describe(composed).rsplit("|", 1)[1],
        samples=len(z),
        max_deviation=float(deviation.max()),
        max_relative_deviation=float(relative.max()),
    )
    logger.debug("Invariance %s: %g", result.transform, result.max_deviation)
    return result


# -- pullback of the annulus inequality -------------------------------------


def _annulus_delta(m: NDArray, rho: float, R: float, side) -> NDArray:
    inner, outer = m - rho, R - m
    if side == "inner":
        return np.where(inner <= outer, inner, np.inf)
    if side == "outer":
        return np.where(outer < inner, outer, np.inf)
    return np.minimum(inner, outer)


def _root_radius_range(
    spec: ConformalMapSpec, lo: float, hi: float
) -> tuple[float, float]:
    """Range of ``|z|`` over the preimage of ``lo <= |F| <= hi``."""
    while isinstance(spec, Composed):
        t = spec.transform
        if t.kind == "scale":
            lo, hi = lo / t.value, hi / t.value
        elif t.kind == "inversion":
            lo, hi = 1.0 / hi, 1.0 / lo
        spec = spec.base
    if isinstance(spec, IdentityAnnulus):
        return lo, hi
    if isinstance(spec, Squaring):
        return math.sqrt(lo), math.sqrt(hi)
    return math.sqrt(max(0.0, lo * lo - 1.0)), math.sqrt(hi * hi + 1.0)


def _image_band(
    rho: float, R: float, band: Band
) -> list[tuple[float, float]]:
    pieces = []
    if band.component in (None, "inner"):
        pieces.append((rho + band.a, rho + min(band.b, 0.5 * (R - rho))))
    if band.component in (None, "outer"):
        pieces.append((R - min(band.b, 0.5 * (R - rho)), R - band.a))
    return pieces


def _annulus_side(
    profile: TestProfile, rho: float, R: float, band: Band, resolution: int
) -> tuple[float, float]:
    """Exact radial integrals of both sides on the annulus."""
    b = min(band.b, 0.5 * (R - rho))
    t, w = log_gauss_nodes(band.a, b, resolution)
    eta, deta = profile.values(t, band.a, band.b)
    lhs = rhs = 0.0
    for side, r in (("inner", rho + t), ("outer", R - t)):
        if band.component not in (None, side):
            continue
        weight = -1.0 / r**2 + (1.0 / (r - rho) + 1.0 / (R - r)) ** 2
        lhs += 2.0 * math.pi * float(np.sum(w * r * deta**2))
        rhs += 0.25 * 2.0 * math.pi * float(np.sum(w * r * weight * eta**2))
    return lhs, rhs


def _x_side(
    spec: ConformalMapSpec,
    profile: TestProfile,
    band: Band,
    resolution: int,
) -> tuple[float, float]:
    rho, R = maps.target_radii(spec)
    scale = maps.bounding_radius(spec)
    h = _GRAD_STEP * scale

    def u(z: NDArray) -> NDArray:
        inside = maps.contains(spec, z)
        m = maps.map_modulus(spec, np.where(inside, z, scale))
        delta = _annulus_delta(m, rho, R, band.component)
        eta, _ = profile.values(delta, band.a, band.b)
        return np.where(inside, eta, 0.0)

    lhs = rhs = 0.0
    theta = 2.0 * math.pi * (np.arange(resolution) + 0.5) / resolution
    d_theta = 2.0 * math.pi / resolution
    for lo, hi in _image_band(rho, R, band):
        r_lo, r_hi = _root_radius_range(spec, lo, hi)
        r_lo = max(r_lo, 1e-9 * scale)
        r, wr = _gauss_panels(r_lo, r_hi, resolution)
        z = (r[:, np.newaxis] * np.exp(1j * theta)).ravel()
        w = (wr * r)[:, np.newaxis].repeat(resolution, axis=1).ravel()
        w = w * d_theta
        val = u(z)
        live = val != 0.0
        z, w, val = z[live], w[live], val[live]
        gx = (u(z + h) - u(z - h)) / (2.0 * h)
        gy = (u(z + 1j * h) - u(z - 1j * h)) / (2.0 * h)
        lhs += float(np.sum(w * (gx**2 + gy**2)))
        if len(z):
            weight = frak_F(spec, z).value
            rhs += 0.25 * float(np.sum(w * weight * val**2))
    return lhs, rhs


def _gauss_panels(lo: float, hi: float, count: int):
    panels = max(1, count // 16)
    x, w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, np.newaxis] + half[:, np.newaxis] * x).ravel()
    return nodes, (half[:, np.newaxis] * w).ravel()


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def pullback_verify(
    spec: ConformalMapSpec,
    profile: TestProfile | None,
    band: Band,
    quad: QuadratureSpec,
) -> HardyReport:
    """Check ``int |grad u|^2 >= 1/4 int weight |u|^2`` on the x-domain for
    ``u = eta(delta_annulus(|F|))``.

    Both sides are integrated on a polar grid of the x-domain; the exact
    radial integrals on the annulus serve as the change-of-variables
    oracle.
    """
    if isinstance(maps.root_of(spec), Squaring):
        raise InadmissibleCombinationError(
            "squaring is not univalent; use it with univalence_probe only"
        )
    rho, R = maps.target_radii(spec)
    if not 0.0 < band.a < band.b or band.a >= 0.5 * (R - rho):
        raise BandEmptyError(f"band ({band.a}, {band.b}) is empty")
    with lab_span(
        "pullback_verify",
        map=maps.describe(spec),
        resolution=quad.resolution,
    ):
        if profile is None:
            lhs = rhs = lhs_y = rhs_y = 0.0
            converged = True
        else:
            coarse = _x_side(spec, profile, band, quad.resolution)
            lhs, rhs = _x_side(spec, profile, band, 2 * quad.resolution)
            converged = max(
                _relative_gap(coarse[0], lhs), _relative_gap(coarse[1], rhs)
            ) <= quad.tolerance
            lhs_y, rhs_y = _annulus_side(
                profile, rho, R, band, 2 * quad.resolution
            )
        gap = max(_relative_gap(lhs, lhs_y), _relative_gap(rhs, rhs_y))
    ratio = lhs / rhs if rhs > 0.0 else math.inf
    return HardyReport(
        inequality="conformal-pullback",
        domain=f"conformal:{maps.describe(spec)}",
        p=2.0,
        profile="zero" if profile is None else profile.kind,
        band={"a": band.a, "b": band.b, "component": band.component},
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        min_pointwise_weight=math.nan,
        constant_used=0.25,
        quadrature={
            "scheme": "polar-gauss",
            "resolution": 2 * quad.resolution,
            "tolerance": quad.tolerance,
            "seed": quad.seed,
        },
        converged=converged,
        checks={
            "change_of_variables": {
                "annulus_lhs": lhs_y,
                "annulus_rhs": rhs_y,
                "relative_gap": gap,
                "passed": gap <= quad.tolerance,
            }
        },
    )


# -- univalence ------------------------------------------------------------


@dataclass(frozen=True)
class UnivalenceVerdict:
    kind: Literal["no-collision-found", "collision"]
    pair: tuple[complex, complex] | None
    pairs_checked: int

    def to_dict(self) -> dict[str, Any]:
        pair = None
        if self.pair is not None:
            pair = [[z.real, z.imag] for z in self.pair]
        return {
            "verdict": self.kind,
            "pair": pair,
            "pairs_checked": self.pairs_checked,
        }


def univalence_probe(
    spec: ConformalMapSpec,
    pairs: int = 10_000,
    seed: int = 0,
    starts: int = 4,
) -> UnivalenceVerdict:
    """Search for ``z1 != z2`` with ``F(z1) = F(z2)``.

    For each sampled ``z1`` Newton's method solves ``F(z) = F(z1)`` from
    ``-z1`` and from random points of the domain. Finding nothing is
    evidence, not proof.
    """
    rng = np.random.default_rng(seed)
    scale = maps.bounding_radius(spec)
    count = max(1, pairs // starts)
    z1 = sample_domain(spec, count, rng)
    target, _ = maps.probe_eval(spec, z1)
    seeds = [-z1] + [
        sample_domain(spec, count, rng) for _ in range(starts - 1)
    ]
    checked = 0
    for z in seeds:
        z = z.copy()
        for _ in range(50):
            value, deriv = maps.probe_eval(spec, z)
            step = (value - target) / deriv
            z = z - np.where(np.isfinite(step), step, 0.0)
        value, _ = maps.probe_eval(spec, z)
        solved = np.abs(value - target) <= 1e-9 * np.maximum(
            1.0, np.abs(target)
        )
        distinct = np.abs(z - z1) > 1e-6 * scale
        hits = np.flatnonzero(solved & distinct)
        checked += len(z)
        if hits.size:
            i = int(hits[0])
            logger.info(
                "Collision for %s: %s and %s", maps.describe(spec), z1[i], z[i]
            )
            return UnivalenceVerdict(
                "collision", (complex(z1[i]), complex(z[i])), checked
            )
    return UnivalenceVerdict("no-collision-found", None, checked)


__all__ = [
    "FrakFValue",
    "InvarianceResult",
    "UnivalenceVerdict",
    "example_display",
    "frak_F",
    "invariance_check",
    "pullback_verify",
    "sample_domain",
    "univalence_probe",
]
