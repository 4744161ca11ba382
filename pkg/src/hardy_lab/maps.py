"""Closed-form analytic maps onto annuli.

A map spec describes ``F: Omega -> {rho < |w| < R}``. The x-side domain
``Omega`` is always the preimage of the target annulus under the *root* map
(the innermost non-composed spec); composing with a scaling, rotation or
inversion only changes the target annulus.

The square-root map needs a branch. It is fixed once per map instance by
continuation over a reference grid that is symmetric under ``z -> -z``, so
the resulting branch is odd and positive on the real axis beyond the
outer branch point. Continuation never steps across the real segment
``[-1, 1]``. When ``rho < 1`` that segment runs through the domain between
the two holes and no continuous branch exists across it. Evaluating on it
raises ``BranchDiscontinuityError``.
"""

from __future__ import annotations

import cmath
import logging
import math
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import BranchDiscontinuityError, PointOutsideDomainError

logger = logging.getLogger("HardyLab.Conformal")

BRANCH_GRID_SIZE = 256
# reference-grid neighbourhood searched when the nearest node is unassigned
_FALLBACK_RADIUS = 3
# points this close to the real axis, relative to the grid, are on the cut
_CUT_TOL = 1e-12


class _MapBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class _AnnulusRadii(_MapBase):
    rho: float = Field(gt=0)
    R: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.rho < self.R:
            raise ValueError(f"need rho < R, got rho={self.rho} R={self.R}")
        return self


class IdentityAnnulus(_AnnulusRadii):
    kind: Literal["identity"] = "identity"


class SqrtQuadratic(_AnnulusRadii):
    """``F(z) = sqrt((z - 1)(z + 1))`` on ``{rho^2 < |z^2 - 1| < R^2}``."""

    kind: Literal["sqrt-quadratic"] = "sqrt-quadratic"

    @model_validator(mode="after")
    def _check_lemniscate(self):
        # |z^2 - 1| = 1 is the lemniscate, whose double point has no tangent
        if math.isclose(self.rho, 1.0) or math.isclose(self.R, 1.0):
            raise ValueError("rho and R must differ from 1")
        return self


class Squaring(_AnnulusRadii):
    """``z -> z^2``; two-to-one, kept as the non-univalent control."""

    kind: Literal["squaring"] = "squaring"


class Transform(_MapBase):
    kind: Literal["scale", "rotation", "inversion"]
    value: float | None = None

    @model_validator(mode="after")
    def _check_value(self):
        if self.kind == "scale" and (self.value is None or self.value <= 0):
            raise ValueError("scale needs a positive value")
        if self.kind == "rotation" and self.value is None:
            raise ValueError("rotation needs an angle")
        if self.kind == "inversion" and self.value is not None:
            raise ValueError("inversion takes no value")
        return self


class Composed(_MapBase):
    kind: Literal["composed"] = "composed"
    base: ConformalMapSpec
    transform: Transform


ConformalMapSpec = Annotated[
    IdentityAnnulus | SqrtQuadratic | Squaring | Composed,
    Field(discriminator="kind"),
]
Composed.model_rebuild()

RootMap = IdentityAnnulus | SqrtQuadratic | Squaring


def root_of(spec: ConformalMapSpec) -> RootMap:
    while isinstance(spec, Composed):
        spec = spec.base
    return spec


def target_radii(spec: ConformalMapSpec) -> tuple[float, float]:
    """Radii ``(rho, R)`` of the annulus the map lands on."""
    if not isinstance(spec, Composed):
        return spec.rho, spec.R
    rho, R = target_radii(spec.base)
    t = spec.transform
    if t.kind == "scale":
        return t.value * rho, t.value * R
    if t.kind == "rotation":
        return rho, R
    return 1.0 / R, 1.0 / rho


def describe(spec: ConformalMapSpec) -> str:
    if isinstance(spec, Composed):
        t = spec.transform
        suffix = t.kind if t.value is None else f"{t.kind}={t.value:g}"
        return f"{describe(spec.base)}|{suffix}"
    return f"{spec.kind}:rho={spec.rho:g},R={spec.R:g}"


# -- branch-free moduli ----------------------------------------------------


def _root_abs(root: RootMap, z: NDArray) -> NDArray:
    if isinstance(root, IdentityAnnulus):
        return np.abs(z)
    if isinstance(root, Squaring):
        return np.abs(z) ** 2
    return np.sqrt(np.abs(z * z - 1.0))


def _root_abs_deriv(root: RootMap, z: NDArray) -> NDArray:
    if isinstance(root, IdentityAnnulus):
        return np.ones_like(np.abs(z))
    if isinstance(root, Squaring):
        return 2.0 * np.abs(z)
    return np.abs(z) / np.sqrt(np.abs(z * z - 1.0))


def map_modulus(spec: ConformalMapSpec, z: ArrayLike) -> NDArray:
    """``|F(z)|`` without choosing a branch."""
    z = np.asarray(z, dtype=complex)
    if not isinstance(spec, Composed):
        return _root_abs(spec, z)
    inner = map_modulus(spec.base, z)
    t = spec.transform
    if t.kind == "scale":
        return t.value * inner
    if t.kind == "rotation":
        return inner
    return 1.0 / inner


def deriv_modulus(spec: ConformalMapSpec, z: ArrayLike) -> NDArray:
    """``|F'(z)|`` without choosing a branch."""
    z = np.asarray(z, dtype=complex)
    if not isinstance(spec, Composed):
        return _root_abs_deriv(spec, z)
    inner = deriv_modulus(spec.base, z)
    t = spec.transform
    if t.kind == "scale":
        return t.value * inner
    if t.kind == "rotation":
        return inner
    return inner / map_modulus(spec.base, z) ** 2


def contains(spec: ConformalMapSpec, z: ArrayLike) -> NDArray:
    root = root_of(spec)
    modulus = _root_abs(root, np.asarray(z, dtype=complex))
    return (modulus > root.rho) & (modulus < root.R)


def bounding_radius(spec: ConformalMapSpec) -> float:
    """Half-width of a square centred at 0 that contains the x-domain."""
    root = root_of(spec)
    if isinstance(root, IdentityAnnulus):
        return root.R
    if isinstance(root, Squaring):
        return math.sqrt(root.R)
    return math.sqrt(root.R**2 + 1.0)


# -- square-root branch ----------------------------------------------------


def _jumps(a: complex, b: complex) -> bool:
    return abs(a - b) > 0.5 * max(abs(a), abs(b))


def _on_cut(z: NDArray, half_width: float) -> NDArray:
    # the real segment [-1, 1]; in the domain only when rho < 1
    return (np.abs(z.imag) <= _CUT_TOL * half_width) & (np.abs(z.real) < 1.0)


@dataclass(frozen=True)
class _SqrtBranch:
    half_width: float
    step: float
    values: NDArray  # complex, NaN where the grid node was not reached

    def reference(self, z: NDArray) -> NDArray:
        n = self.values.shape[0]
        col = np.floor((z.real + self.half_width) / self.step).astype(int)
        row = np.floor((z.imag + self.half_width) / self.step).astype(int)
        col = np.clip(col, 0, n - 1)
        row = np.clip(row, 0, n - 1)
        # rows below n // 2 lie under the cut, the rest on or above it
        upper = row >= n // 2
        near_cut = np.abs(z.real) < 1.0
        ref = self.values[row, col]
        missing = np.isnan(ref)
        for radius in range(1, _FALLBACK_RADIUS + 1):
            if not missing.any():
                break
            for dr in range(-radius, radius + 1):
                for dc in range(-radius, radius + 1):
                    r = np.clip(row + dr, 0, n - 1)
                    c = np.clip(col + dc, 0, n - 1)
                    candidate = self.values[r, c]
                    same_side = ~near_cut | ((r >= n // 2) == upper)
                    take = missing & same_side & ~np.isnan(candidate)
                    ref = np.where(take, candidate, ref)
                    missing &= ~take
        return ref


def _continue_sqrt(root: SqrtQuadratic, cut: bool = True) -> _SqrtBranch:
    """Continue ``sqrt(z^2 - 1)`` over the reference grid.

    Grid steps across the real segment ``[-1, 1]`` are refused when ``cut``
    is set. Every node is compared with all of its assigned neighbours, so
    two fronts that meet with opposite signs raise
    ``BranchDiscontinuityError``.
    """
    n = BRANCH_GRID_SIZE
    half_width = math.sqrt(root.R**2 + 1.0)
    step = 2.0 * half_width / n
    axis = -half_width + (np.arange(n) + 0.5) * step
    zz = axis[np.newaxis, :] + 1j * axis[:, np.newaxis]
    principal = np.sqrt(zz * zz - 1.0)
    inside = contains(root, zz)
    values = np.full((n, n), np.nan + 0j)

    def blocked(r: int, c: int, rr: int) -> bool:
        return cut and {r, rr} == {n // 2 - 1, n // 2} and abs(axis[c]) < 1.0

    def assign(r: int, c: int, value: complex) -> None:
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if not (0 <= rr < n and 0 <= cc < n) or blocked(r, c, rr):
                continue
            other = values[rr, cc]
            if not np.isnan(other) and _jumps(value, other):
                raise BranchDiscontinuityError(
                    f"jump of {abs(value - other):.3g} between adjacent "
                    f"continuation nodes near z={zz[r, c]:.4g}"
                )
        values[r, c] = value

    mid = 0.5 * (root.rho + root.R)
    x0 = math.sqrt(1.0 + mid * mid)
    start = (n // 2, int(np.argmin(np.abs(axis - x0))))
    if not inside[start]:
        raise BranchDiscontinuityError(
            "continuation base point is not inside the domain"
        )
    s0 = principal[start]
    mirror = (n - 1 - start[0], n - 1 - start[1])
    assign(*start, s0 if s0.real > 0 else -s0)
    assign(*mirror, -values[start])

    queue = deque([start, mirror])
    while queue:
        r, c = queue.popleft()
        parent = values[r, c]
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if not (0 <= rr < n and 0 <= cc < n) or not inside[rr, cc]:
                continue
            if not np.isnan(values[rr, cc]) or blocked(r, c, rr):
                continue
            s = principal[rr, cc]
            chosen = s if abs(s - parent) <= abs(s + parent) else -s
            assign(rr, cc, chosen)
            assign(n - 1 - rr, n - 1 - cc, -chosen)
            queue.append((rr, cc))
            queue.append((n - 1 - rr, n - 1 - cc))

    logger.debug(
        "Continued sqrt branch for %s over %d of %d in-domain nodes",
        describe(root),
        int(np.count_nonzero(~np.isnan(values))),
        int(np.count_nonzero(inside)),
    )
    return _SqrtBranch(half_width=half_width, step=step, values=values)


@lru_cache(maxsize=32)
def _sqrt_branch(root: SqrtQuadratic) -> _SqrtBranch:
    return _continue_sqrt(root)


def _sqrt_eval(root: SqrtQuadratic, z: NDArray, strict: bool = True):
    branch = _sqrt_branch(root)
    ref = branch.reference(z)
    unreached = np.isnan(ref)
    if strict and unreached.any():
        bad = z[unreached].ravel()[0]
        raise BranchDiscontinuityError(
            f"z={bad:.4g} is not reached by the branch continuation"
        )
    cut = _on_cut(z, branch.half_width)
    if strict and cut.any():
        bad = z[cut].ravel()[0]
        raise BranchDiscontinuityError(
            f"z={bad:.4g} lies on the branch cut between -1 and 1"
        )
    ref = np.where(unreached, 1.0, ref)
    s = np.sqrt(z * z - 1.0)
    chosen = np.where(np.abs(s - ref) <= np.abs(s + ref), s, -s)
    jump = np.abs(chosen - ref)
    far = jump > 0.5 * np.maximum(np.abs(ref), np.abs(s))
    if strict and np.any(far):
        raise BranchDiscontinuityError(
            "evaluation point is too far from its continuation node"
        )
    return np.where(unreached | far | cut, np.nan, chosen)


def _require_inside(spec: ConformalMapSpec, z: NDArray) -> None:
    inside = contains(spec, z)
    if not np.all(inside):
        bad = z[~inside].ravel()[0]
        raise PointOutsideDomainError(
            (bad.real, bad.imag), f"domain of {describe(spec)}"
        )


def _eval(spec: ConformalMapSpec, z: NDArray, strict: bool = True):
    if isinstance(spec, IdentityAnnulus):
        return z.copy()
    if isinstance(spec, Squaring):
        return z * z
    if isinstance(spec, SqrtQuadratic):
        return _sqrt_eval(spec, z, strict)
    inner = _eval(spec.base, z, strict)
    t = spec.transform
    if t.kind == "scale":
        return t.value * inner
    if t.kind == "rotation":
        return cmath.exp(1j * t.value) * inner
    return 1.0 / inner


def _deriv(spec: ConformalMapSpec, z: NDArray, strict: bool = True):
    if isinstance(spec, IdentityAnnulus):
        return np.ones_like(z)
    if isinstance(spec, Squaring):
        return 2.0 * z
    if isinstance(spec, SqrtQuadratic):
        return z / _sqrt_eval(spec, z, strict)
    inner = _deriv(spec.base, z, strict)
    t = spec.transform
    if t.kind == "scale":
        return t.value * inner
    if t.kind == "rotation":
        return cmath.exp(1j * t.value) * inner
    return -inner / _eval(spec.base, z, strict) ** 2


def map_eval(spec: ConformalMapSpec, z: ArrayLike) -> NDArray | complex:
    arr = np.asarray(z, dtype=complex)
    _require_inside(spec, arr)
    out = _eval(spec, arr)
    return complex(out) if out.ndim == 0 else out


def deriv_eval(spec: ConformalMapSpec, z: ArrayLike) -> NDArray | complex:
    arr = np.asarray(z, dtype=complex)
    _require_inside(spec, arr)
    out = _deriv(spec, arr)
    return complex(out) if out.ndim == 0 else out


def probe_eval(
    spec: ConformalMapSpec, z: ArrayLike
) -> tuple[NDArray, NDArray]:
    """``(F(z), F'(z))`` with NaN wherever strict evaluation would raise."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    inside = contains(spec, arr)
    safe = np.where(inside, arr, _interior_point(spec))
    value = np.where(inside, _eval(spec, safe, strict=False), np.nan)
    deriv = np.where(inside, _deriv(spec, safe, strict=False), np.nan)
    return value, deriv


def _interior_point(spec: ConformalMapSpec) -> complex:
    root = root_of(spec)
    mid = 0.5 * (root.rho + root.R)
    if isinstance(root, IdentityAnnulus):
        return complex(mid)
    if isinstance(root, Squaring):
        return complex(math.sqrt(mid))
    return complex(math.sqrt(1.0 + mid * mid))


# -- boundary curves of the x-domain ---------------------------------------


@dataclass(frozen=True)
class LevelCurve:
    """One closed boundary curve ``theta -> z(theta)`` of the x-domain.

    ``component`` is 0 for curves on ``|F| = rho`` and 1 for ``|F| = R``.
    """

    component: int
    period: float
    point: Callable[[NDArray], NDArray]
    d1: Callable[[NDArray], NDArray]
    d2: Callable[[NDArray], NDArray]


def _circle(radius: float, component: int) -> LevelCurve:
    return LevelCurve(
        component=component,
        period=2.0 * math.pi,
        point=lambda t: radius * np.exp(1j * t),
        d1=lambda t: 1j * radius * np.exp(1j * t),
        d2=lambda t: -radius * np.exp(1j * t),
    )


def _cassini_curves(c2: float, component: int) -> list[LevelCurve]:
    # every branch satisfies z^2 = 1 + c2 e^{it}
    def d1_from(point):
        return lambda t: 1j * c2 * np.exp(1j * t) / (2.0 * point(t))

    def d2_from(point):
        def d2(t):
            z = point(t)
            dz = 1j * c2 * np.exp(1j * t) / (2.0 * z)
            return (-c2 * np.exp(1j * t) - 2.0 * dz * dz) / (2.0 * z)

        return d2

    if c2 > 1.0:

        def point(t):
            return np.exp(0.5j * t) * np.sqrt(c2 + np.exp(-1j * t))

        return [
            LevelCurve(component, 4.0 * math.pi, point, d1_from(point),
                       d2_from(point))
        ]

    curves = []
    for sign in (1.0, -1.0):

        def point(t, sign=sign):
            return sign * np.sqrt(1.0 + c2 * np.exp(1j * t))

        curves.append(
            LevelCurve(component, 2.0 * math.pi, point, d1_from(point),
                       d2_from(point))
        )
    return curves


def level_curves(spec: ConformalMapSpec) -> list[LevelCurve]:
    root = root_of(spec)
    if isinstance(root, IdentityAnnulus):
        return [_circle(root.rho, 0), _circle(root.R, 1)]
    if isinstance(root, Squaring):
        return [_circle(math.sqrt(root.rho), 0), _circle(math.sqrt(root.R), 1)]
    return _cassini_curves(root.rho**2, 0) + _cassini_curves(root.R**2, 1)


__all__ = [
    "Composed",
    "ConformalMapSpec",
    "IdentityAnnulus",
    "LevelCurve",
    "SqrtQuadratic",
    "Squaring",
    "Transform",
    "bounding_radius",
    "contains",
    "deriv_eval",
    "deriv_modulus",
    "describe",
    "level_curves",
    "map_eval",
    "map_modulus",
    "probe_eval",
    "root_of",
    "target_radii",
]
