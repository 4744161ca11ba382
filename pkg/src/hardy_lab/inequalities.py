"""Catalog of Hardy-type inequalities and their weights.

Every variant states one inequality of the form::

    LHS(f) >= constant * integral(W * |f|^p / delta^p)   (relative weight)
    LHS(f) >= constant * integral(W * |f|^p)             (absolute weight)

where LHS is either the directional integral ``|grad(delta) . grad(f)|^p``
(times ``delta^p`` for the weighted exterior form) or the full gradient
integral ``|grad(f)|^p``. The class variables record which of these
applies, the admissible domains and exponent, and whether test functions
must stay off the ridge.
"""

from __future__ import annotations

import math
from typing import Annotated, ClassVar, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator

from . import geometry
from .domains import Disc, DomainSpec, ExteriorDisc, Torus
from .errors import (
    AlphaOutOfRangeError,
    DomainVariantMismatchError,
    InadmissibleCombinationError,
    InadmissiblePointError,
    PointOutsideDomainError,
)
from .geometry import DistanceField


class Exponent(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=1.0)

    @field_validator("p")
    @classmethod
    def _finite(cls, p: float) -> float:
        if not math.isfinite(p):
            raise ValueError("p must be finite")
        return p

    @property
    def hardy_constant(self) -> float:
        return ((self.p - 1.0) / self.p) ** self.p


def as_exponent(p: float | Exponent) -> Exponent:
    return p if isinstance(p, Exponent) else Exponent(p=p)


def exterior_sign_change_radius(n: int, rho: float) -> float:
    """Radius up to which the exterior-convex weight is non-negative."""
    return 2.0 * (n - 1) * rho / (2.0 * n - 3.0)


def fmt_c_alpha(alpha: float) -> float:
    if alpha <= -2.0:
        raise AlphaOutOfRangeError(f"alpha must exceed -2, got {alpha}")
    if alpha >= -1.0:
        return 2.0**alpha * (2.0 * alpha + 3.0)
    return 2.0**alpha * (alpha + 2.0) ** 2


def _radius(f: DistanceField) -> NDArray:
    return np.linalg.norm(f.x, axis=1)


class _InequalityBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    domains: ClassVar[tuple[str, ...] | None] = None
    lhs: ClassVar[Literal["directional", "full", "weighted"]] = "directional"
    relative: ClassVar[bool] = True
    avoid_ridge: ClassVar[bool] = False
    fixed_p: ClassVar[float | None] = None
    dims: ClassVar[tuple[int, ...]] = (2, 3)

    def constant(self, p: Exponent) -> float:
        return p.hardy_constant

    def check(self, domain: DomainSpec, p: Exponent) -> None:
        """Raise unless this inequality applies to ``domain`` and ``p``."""
        if self.domains is not None and domain.kind not in self.domains:
            raise DomainVariantMismatchError(self.kind, domain.kind)
        if domain.dim not in self.dims:
            raise InadmissibleCombinationError(
                f"{self.kind} needs dimension in {self.dims}, "
                f"got {domain.dim}"
            )
        if self.fixed_p is not None and p.p != self.fixed_p:
            raise InadmissibleCombinationError(
                f"{self.kind} holds for p={self.fixed_p:g} only, got p={p.p:g}"
            )
        if self.lhs == "full" and domain.truncation():
            raise InadmissibleCombinationError(
                f"{self.kind} integrates the full gradient, which the axial "
                f"truncation of {domain.describe()} does not allow"
            )

    def evaluate(
        self, domain: DomainSpec, f: DistanceField, p: Exponent
    ) -> NDArray:
        raise NotImplementedError


class GeneralRidge(_InequalityBase):
    """``W = 1 - p delta Laplacian(delta) / (p - 1)`` off the ridge."""

    kind: Literal["general-ridge"] = "general-ridge"
    avoid_ridge: ClassVar[bool] = True

    def evaluate(self, domain, f, p):
        return 1.0 - p.p * f.delta * f.kappa_tilde / (p.p - 1.0)


class CurvatureRidge(_InequalityBase):
    """Same bracket written with the mean curvature of the level surface."""

    kind: Literal["curvature-ridge"] = "curvature-ridge"
    avoid_ridge: ClassVar[bool] = True

    def evaluate(self, domain, f, p):
        level = f.level_kappas.sum(axis=1)
        return 1.0 - p.p * f.delta * level / (p.p - 1.0)


class ConvexImproved(_InequalityBase):
    kind: Literal["convex-improved"] = "convex-improved"
    domains: ClassVar[tuple[str, ...]] = ("disc", "ellipse", "cylinder")

    def evaluate(self, domain, f, p):
        return 1.0 + p.p * f.delta * np.abs(f.kappa_tilde) / (p.p - 1.0)


class BallImproved(_InequalityBase):
    kind: Literal["ball-improved"] = "ball-improved"
    domains: ClassVar[tuple[str, ...]] = ("disc",)
    lhs: ClassVar[str] = "full"

    def evaluate(self, domain, f, p):
        n = domain.dim
        return 1.0 + p.p * (n - 1) * f.delta / ((p.p - 1.0) * _radius(f))


class QuadraticForm(_InequalityBase):
    """p = 2 form built from the vector field ``V``; absolute weight."""

    kind: Literal["quadratic-form"] = "quadratic-form"
    domains: ClassVar[tuple[str, ...]] = ("disc", "ellipse", "torus")
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    avoid_ridge: ClassVar[bool] = True
    fixed_p: ClassVar[float] = 2.0

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        n = domain.dim
        r2 = np.einsum("ij,ij->i", f.x, f.x)
        x_dot = np.einsum("ij,ij->i", f.x, f.grad)
        lap = f.kappa_tilde
        return (
            (n - 2) ** 2 / r2
            + (1.0 + 2.0 * np.abs(f.delta * lap)) / f.delta**2
            + 2.0 * (n - 2) * x_dot / (r2 * f.delta)
        )


class BallQuadratic(_InequalityBase):
    kind: Literal["ball-quadratic"] = "ball-quadratic"
    domains: ClassVar[tuple[str, ...]] = ("disc",)
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    fixed_p: ClassVar[float] = 2.0

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        n = domain.dim
        r = _radius(f)
        return (n - 2) ** 2 / r**2 + 1.0 / f.delta**2 + 2.0 / (r * f.delta)


class ExteriorConvex(_InequalityBase):
    """Exterior of a convex body; the weight changes sign at
    :func:`exterior_sign_change_radius`."""

    kind: Literal["exterior-convex"] = "exterior-convex"
    domains: ClassVar[tuple[str, ...]] = ("exterior-disc",)
    lhs: ClassVar[str] = "full"

    def evaluate(self, domain, f, p):
        return 1.0 - p.p * f.kappa_tilde * f.delta / (p.p - 1.0)


class ExteriorInversion(_InequalityBase):
    """Image of the improved disc inequality under inversion."""

    kind: Literal["exterior-inversion"] = "exterior-inversion"
    domains: ClassVar[tuple[str, ...]] = ("exterior-disc",)
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    fixed_p: ClassVar[float] = 2.0
    dims: ClassVar[tuple[int, ...]] = (2,)

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        r = _radius(f)
        return -1.0 / r**2 + 1.0 / f.delta**2


class WeightedExterior(_InequalityBase):
    """``int delta^p |grad(delta).grad(f)|^p >= p^-p int (1 + p kt delta)
    |f|^p``."""

    kind: Literal["weighted-exterior"] = "weighted-exterior"
    domains: ClassVar[tuple[str, ...]] = ("exterior-disc",)
    lhs: ClassVar[str] = "weighted"
    relative: ClassVar[bool] = False

    def constant(self, p):
        return p.p ** (-p.p)

    def evaluate(self, domain, f, p):
        return 1.0 + p.p * f.kappa_tilde * f.delta


def _shell_fields(
    domain: DomainSpec, f: DistanceField
) -> tuple[DistanceField, DistanceField]:
    inner = ExteriorDisc(rho=domain.rho, n=domain.n)
    outer = Disc(R=domain.R, n=domain.n)
    return geometry.field(inner, f.x), geometry.field(outer, f.x)


class TwoBoundary(_InequalityBase):
    """p = 2 inequality between two nested convex boundaries.

    ``delta_1`` is the distance to the inner body and ``delta_2`` to the
    outer boundary; both are taken from the bounding balls of an annulus.
    """

    kind: Literal["two-boundary"] = "two-boundary"
    domains: ClassVar[tuple[str, ...]] = ("annulus",)
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    avoid_ridge: ClassVar[bool] = True
    fixed_p: ClassVar[float] = 2.0

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        n = domain.dim
        f1, f2 = _shell_fields(domain, f)
        d1, d2 = f1.delta, f2.delta
        r2 = np.einsum("ij,ij->i", f.x, f.x)
        cross = np.einsum("ij,ij->i", f1.grad, f2.grad)
        x1 = np.einsum("ij,ij->i", f.x, f1.grad)
        x2 = np.einsum("ij,ij->i", f.x, f2.grad)
        return (
            (n - 1) * (n - 3) / r2
            + 1.0 / d1**2
            + 1.0 / d2**2
            - 2.0 * f1.kappa_tilde / d1
            - 2.0 * f2.kappa_tilde / d2
            - 2.0 * cross / (d1 * d2)
            + 2.0 * (n - 1) * x1 / (r2 * d1)
            + 2.0 * (n - 1) * x2 / (r2 * d2)
        )


class AnnulusAL(_InequalityBase):
    kind: Literal["annulus-al"] = "annulus-al"
    domains: ClassVar[tuple[str, ...]] = ("annulus",)
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    fixed_p: ClassVar[float] = 2.0

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        n = domain.dim
        r = _radius(f)
        d1, d2 = r - domain.rho, domain.R - r
        return (
            (n - 1) * (n - 3) / r**2
            + 1.0 / d1**2
            + 1.0 / d2**2
            + 2.0 / (d1 * d2)
        )


def _torus_extra(domain: Torus, f: DistanceField) -> NDArray:
    rxy = np.hypot(f.x[:, 0], f.x[:, 1])
    return 1.0 / (domain.r_minor - f.delta) - 1.0 / rxy


class TorusImproved(_InequalityBase):
    """Ring torus with ``R > 2r``; no ridge avoidance needed."""

    kind: Literal["torus-improved"] = "torus-improved"
    domains: ClassVar[tuple[str, ...]] = ("torus",)

    def check(self, domain, p):
        super().check(domain, p)
        if not domain.R_major > 2.0 * domain.r_minor:
            raise InadmissibleCombinationError(
                f"torus-improved needs R > 2r, got {domain.describe()}"
            )

    def evaluate(self, domain, f, p):
        extra = _torus_extra(domain, f)
        return 1.0 + p.p * f.delta * extra / (p.p - 1.0)


class HyperboloidSigned(_InequalityBase):
    """Weight built from the printed hyperboloid curvature sum, which takes
    both signs."""

    kind: Literal["hyperboloid-signed"] = "hyperboloid-signed"
    domains: ClassVar[tuple[str, ...]] = ("hyperboloid",)
    avoid_ridge: ClassVar[bool] = True

    def evaluate(self, domain, f, p):
        printed = geometry.hyperboloid_laplacian_as_printed(f.ridge, f.delta)
        return 1.0 - p.p * f.delta * printed / (p.p - 1.0)


class FMTComparison(_InequalityBase):
    """``int |grad f|^2 >= 1/4 int |f|^2/delta^2
    + c_alpha D^-(alpha+2) int delta^alpha |f|^2`` with ``D`` the interior
    diameter."""

    kind: Literal["fmt-comparison"] = "fmt-comparison"
    alpha: float = -1.0
    domains: ClassVar[tuple[str, ...]] = ("disc", "ellipse")
    lhs: ClassVar[str] = "full"
    relative: ClassVar[bool] = False
    fixed_p: ClassVar[float] = 2.0

    @field_validator("alpha")
    @classmethod
    def _alpha_range(cls, alpha: float) -> float:
        try:
            fmt_c_alpha(alpha)
        except AlphaOutOfRangeError as exc:
            raise ValueError(str(exc)) from exc
        return alpha

    def constant(self, p):
        return 0.25

    def evaluate(self, domain, f, p):
        diameter = 2.0 * domain.sup_delta()
        c = fmt_c_alpha(self.alpha)
        extra = 4.0 * c * diameter ** (-(self.alpha + 2.0))
        return 1.0 / f.delta**2 + extra * f.delta**self.alpha


InequalitySpec = Annotated[
    GeneralRidge
    | CurvatureRidge
    | ConvexImproved
    | BallImproved
    | QuadraticForm
    | BallQuadratic
    | ExteriorConvex
    | ExteriorInversion
    | WeightedExterior
    | TwoBoundary
    | AnnulusAL
    | TorusImproved
    | HyperboloidSigned
    | FMTComparison,
    Field(discriminator="kind"),
]


def weight(
    spec: InequalitySpec,
    domain: DomainSpec,
    x: ArrayLike,
    p: float | Exponent,
) -> float:
    """Bracketed weight of ``spec`` at one admissible point."""
    p = as_exponent(p)
    spec.check(domain, p)
    try:
        arr = geometry.require_inside(domain, x)
    except PointOutsideDomainError as exc:
        raise InadmissiblePointError(str(exc)) from exc
    if spec.avoid_ridge and geometry.is_near_ridge(domain, arr).on_ridge:
        raise InadmissiblePointError(
            f"{arr.tolist()} is within the ridge band of {domain.describe()}"
        )
    return float(spec.evaluate(domain, geometry.field(domain, arr), p)[0])


__all__ = [
    "AnnulusAL",
    "BallImproved",
    "BallQuadratic",
    "ConvexImproved",
    "CurvatureRidge",
    "Exponent",
    "ExteriorConvex",
    "ExteriorInversion",
    "FMTComparison",
    "GeneralRidge",
    "HyperboloidSigned",
    "InequalitySpec",
    "QuadraticForm",
    "TorusImproved",
    "TwoBoundary",
    "WeightedExterior",
    "as_exponent",
    "exterior_sign_change_radius",
    "fmt_c_alpha",
    "weight",
]
