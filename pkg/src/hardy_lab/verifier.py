"""Both sides of the inequality catalog for explicit test functions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar

from .domains import Disc, DomainSpec
from .errors import AlphaOutOfRangeError
from .geometry import DistanceField
from .inequalities import Exponent, InequalitySpec, as_exponent, fmt_c_alpha
from .profiles import (
    Band,
    PowerBump,
    TestFunction,
    TestProfile,
    make_test_function,
)
from .quadrature import (
    NodeSet,
    QuadratureSpec,
    integrate,
    integrate_once,
    integrate_strict,
    node_sets,
)
from .telemetry import lab_span, record_outcome

logger = logging.getLogger("HardyLab.Verifier")

# relative FD step for the full gradient, per point
_GRAD_STEP = 1e-5
_SAMPLE_QUANTILES = (0.1, 0.3, 0.5, 0.7, 0.9)
# tags inequalities that rely on the flux condition being established for
# the domain rather than on ridge avoidance
_FLUX_NOTE = "flux condition on shrinking ridge neighbourhoods taken as given"


def _full_gradient(tf: TestFunction, f: DistanceField) -> NDArray:
    n = f.x.shape[1]
    h = _GRAD_STEP * np.minimum(f.delta, tf.domain.scale)
    grad = np.empty_like(f.x)
    for i in range(n):
        step = np.zeros_like(f.x)
        step[:, i] = h
        plus = tf(f.x + step)
        minus = tf(f.x - step)
        grad[:, i] = (plus - minus) / (2.0 * h)
    return np.linalg.norm(grad, axis=1)


def _lhs_values(
    tf: TestFunction, nodes: NodeSet, p: float, form: str
) -> NDArray:
    f = nodes.field
    if form == "full":
        return _full_gradient(tf, f) ** p
    _, deta = tf.evaluate(f)
    values = np.abs(deta) ** p
    if form == "weighted":
        values = values * f.delta**p
    return values


def _rhs_values(
    spec: InequalitySpec,
    tf: TestFunction,
    nodes: NodeSet,
    p: Exponent,
) -> tuple[NDArray, NDArray]:
    """Weighted ``|f|^p`` integrand and the weight itself."""
    f = nodes.field
    eta, _ = tf.evaluate(f)
    live = eta != 0.0
    w = np.zeros_like(eta)
    if live.any():
        w[live] = spec.evaluate(tf.domain, f.take(live), p)
    values = w * np.abs(eta) ** p.p
    if spec.relative:
        values = values / f.delta**p.p
    return values, w


def lhs_directional(
    domain: DomainSpec,
    f: TestFunction,
    p: float | Exponent,
    quad: QuadratureSpec,
) -> float:
    """``int |grad(delta) . grad(f)|^p`` over the support of ``f``."""
    p = as_exponent(p)
    if f.is_zero:
        return 0.0
    return integrate_strict(
        f,
        quad,
        lambda n: {"lhs": _lhs_values(f, n, p.p, "directional")},
        "lhs",
    )


def lhs_full_gradient(
    domain: DomainSpec,
    f: TestFunction,
    p: float | Exponent,
    quad: QuadratureSpec,
) -> float:
    p = as_exponent(p)
    if f.is_zero:
        return 0.0
    return integrate_strict(
        f, quad, lambda n: {"lhs": _lhs_values(f, n, p.p, "full")}, "lhs"
    )


def rhs(
    spec: InequalitySpec,
    domain: DomainSpec,
    f: TestFunction,
    p: float | Exponent,
    quad: QuadratureSpec,
) -> float:
    """Constant times the weighted integral of ``|f|^p``."""
    p = as_exponent(p)
    spec.check(domain, p)
    if f.is_zero:
        return 0.0
    value = integrate_strict(
        f, quad, lambda n: {"rhs": _rhs_values(spec, f, n, p)[0]}, "rhs"
    )
    return spec.constant(p) * value


@dataclass(frozen=True)
class HardyReport:
    inequality: str
    domain: str
    p: float
    profile: str
    band: dict[str, Any]
    lhs: float
    rhs: float
    ratio: float
    min_pointwise_weight: float
    constant_used: float
    quadrature: dict[str, Any]
    converged: bool
    samples: list[dict[str, Any]] = dc_field(default_factory=list)
    notes: list[str] = dc_field(default_factory=list)
    checks: dict[str, Any] = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        tolerance = self.quadrature.get("tolerance", 0.0)
        side_checks = all(
            c.get("passed", True) for c in self.checks.values()
        )
        return (
            self.converged
            and self.ratio >= 1.0 - 3.0 * tolerance
            and side_checks
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "inequality": self.inequality,
            "domain": self.domain,
            "p": self.p,
            "profile": self.profile,
            "band": dict(self.band),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "min_pointwise_weight": self.min_pointwise_weight,
            "constant_used": self.constant_used,
            "quadrature": dict(self.quadrature),
            "converged": self.converged,
            "passed": self.passed,
            "samples": [dict(s) for s in self.samples],
            "notes": list(self.notes),
            "checks": {k: dict(v) for k, v in self.checks.items()},
        }


def _diagnostics(
    spec: InequalitySpec,
    tf: TestFunction,
    p: Exponent,
    quad: QuadratureSpec,
    scheme: str,
) -> tuple[float, list[dict[str, Any]]]:
    """Minimum weight over the support and a few samples across it."""
    xs, deltas, weights, etas = [], [], [], []
    for nodes in node_sets(tf, scheme, quad.resolution, quad.seed):
        _, w = _rhs_values(spec, tf, nodes, p)
        eta, _ = tf.evaluate(nodes.field)
        live = eta != 0.0
        xs.append(nodes.field.x[live])
        deltas.append(nodes.field.delta[live])
        weights.append(w[live])
        etas.append(eta[live])
    if not deltas or sum(len(d) for d in deltas) == 0:
        return math.nan, []
    x = np.concatenate(xs)
    delta = np.concatenate(deltas)
    w = np.concatenate(weights)
    eta = np.concatenate(etas)
    order = np.argsort(delta, kind="stable")
    samples = []
    for q in _SAMPLE_QUANTILES:
        i = order[min(len(order) - 1, int(q * len(order)))]
        samples.append(
            {
                "x": [float(v) for v in x[i]],
                "delta": float(delta[i]),
                "weight": float(w[i]),
                "f": float(eta[i]),
            }
        )
    return float(w.min()), samples


def verify(
    spec: InequalitySpec,
    domain: DomainSpec,
    p: float | Exponent,
    profile: TestProfile | None,
    band: Band,
    quad: QuadratureSpec,
) -> HardyReport:
    """Evaluate both sides of ``spec`` for one test function.

    ``profile=None`` runs the zero function. An unconverged quadrature
    flags the report instead of raising.
    """
    p = as_exponent(p)
    with lab_span(
        "verify",
        domain=domain.kind,
        inequality=spec.kind,
        p=p.p,
        scheme=quad.scheme or "auto",
        resolution=quad.resolution,
    ) as span:
        spec.check(domain, p)
        tf = make_test_function(
            profile or PowerBump(), domain, band, avoid_ridge=spec.avoid_ridge
        )
        if profile is None:
            tf = replace(tf, profile=None)
        scheme = quad.resolve(tf)
        constant = spec.constant(p)

        if tf.is_zero:
            lhs_value = rhs_value = 0.0
            converged = True
            resolution = quad.resolution
        else:
            def integrand(nodes: NodeSet) -> dict[str, NDArray]:
                return {
                    "lhs": _lhs_values(tf, nodes, p.p, spec.lhs),
                    "rhs": _rhs_values(spec, tf, nodes, p)[0],
                }

            result = integrate(tf, quad, integrand)
            lhs_value = result.values.get("lhs", 0.0)
            rhs_value = constant * result.values.get("rhs", 0.0)
            converged = result.converged
            resolution = result.resolution

        ratio = lhs_value / rhs_value if rhs_value > 0.0 else math.inf
        if tf.is_zero:
            min_weight, samples = math.nan, []
        else:
            min_weight, samples = _diagnostics(spec, tf, p, quad, scheme)

        notes = []
        if not spec.avoid_ridge and spec.lhs == "directional":
            notes.append(_FLUX_NOTE)
        if domain.truncation():
            notes.append(f"truncation {domain.truncation()}")
        lo, hi = tf.support_box()
        report = HardyReport(
            inequality=spec.kind,
            domain=domain.describe(),
            p=p.p,
            profile="zero" if tf.is_zero else tf.profile.kind,
            band={
                "a": band.a,
                "b": band.b,
                "component": band.component,
            },
            lhs=lhs_value,
            rhs=rhs_value,
            ratio=ratio,
            min_pointwise_weight=min_weight,
            constant_used=constant,
            quadrature={
                "scheme": scheme,
                "resolution": resolution,
                "tolerance": quad.tolerance,
                "seed": quad.seed,
                "support_box": [lo.tolist(), hi.tolist()],
            },
            converged=converged,
            samples=samples,
            notes=notes,
        )
        record_outcome(
            span, ratio=ratio, converged=converged, passed=report.passed
        )
    logger.debug(
        "%s on %s: lhs=%g rhs=%g ratio=%g",
        spec.kind,
        domain.describe(),
        lhs_value,
        rhs_value,
        ratio,
    )
    return report


# -- empirical best constant ----------------------------------------------


class ConstantFamily(BaseModel):
    """Search box over ``(log a, b, q)`` for power-bump test functions."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    a_min: float = Field(default=1e-14, gt=0.0)
    a_max: float = Field(default=1e-2, gt=0.0)
    b_min: float = Field(default=0.05, gt=0.0)
    b_max: float | None = None
    q_min: float = Field(default=0.3, gt=0.0)
    q_max: float = Field(default=0.7, gt=0.0)
    budget: int = Field(default=200, ge=1)
    sweeps: int = Field(default=2, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self):
        if not self.a_min <= self.a_max < self.b_min:
            raise ValueError("need a_min <= a_max < b_min")
        if self.b_max is not None and self.b_max < self.b_min:
            raise ValueError("need b_min <= b_max")
        if self.q_max < self.q_min:
            raise ValueError("need q_min <= q_max")
        return self


@dataclass(frozen=True)
class ConstantEstimate:
    """Smallest plain Hardy quotient found; an upper bound on the best
    constant."""

    domain: str
    p: float
    value: float
    a: float
    b: float
    q: float
    evaluations: int
    budget_exhausted: bool
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "domain": self.domain,
            "p": self.p,
            "value": self.value,
            "band": {"a": self.a, "b": self.b},
            "q": self.q,
            "evaluations": self.evaluations,
            "budget_exhausted": self.budget_exhausted,
            "converged": self.converged,
        }


class _BudgetSpent(Exception):
    pass


def _quotient_integrand(tf: TestFunction, p: float):
    def integrand(nodes: NodeSet) -> dict[str, NDArray]:
        eta, deta = tf.evaluate(nodes.field)
        return {
            "num": np.abs(deta) ** p,
            "den": np.abs(eta) ** p / nodes.field.delta**p,
        }

    return integrand


def estimate_constant(
    domain: DomainSpec,
    p: float | Exponent,
    family: ConstantFamily,
    quad: QuadratureSpec,
) -> ConstantEstimate:
    """Coordinate search for the smallest ``int |grad f|^p / int |f|^p /
    delta^p`` over the family.

    Each coordinate is minimized by bounded Brent steps; the best point is
    re-evaluated with resolution doubling.
    """
    p = as_exponent(p)
    sup = domain.sup_delta() or domain.scale
    if not math.isfinite(sup):
        sup = domain.scale
    b_max = family.b_max if family.b_max is not None else 0.9 * sup
    b_max = max(b_max, family.b_min)
    evaluations = 0
    best: dict[str, float] = {"value": math.inf}

    def quotient(log_a: float, b: float, q: float) -> float:
        nonlocal evaluations
        if evaluations >= family.budget:
            raise _BudgetSpent
        evaluations += 1
        band = Band(a=math.exp(log_a), b=b)
        tf = make_test_function(PowerBump(q=q), domain, band)
        sums = integrate_once(tf, quad, _quotient_integrand(tf, p.p))
        value = sums["num"] / sums["den"]
        if value < best["value"]:
            best.update(value=value, log_a=log_a, b=b, q=q)
        return value

    bounds = {
        "log_a": (math.log(family.a_min), math.log(family.a_max)),
        "b": (family.b_min, b_max),
        "q": (family.q_min, family.q_max),
    }
    point = {
        "log_a": bounds["log_a"][0],
        "b": b_max,
        "q": 0.5 * (family.q_min + family.q_max),
    }
    exhausted = False
    with lab_span("estimate_constant", domain=domain.kind, p=p.p):
        try:
            quotient(**point)
            for _ in range(family.sweeps):
                for name, (lo, hi) in bounds.items():
                    if hi <= lo:
                        continue

                    def along(v, name=name):
                        return quotient(**{**point, name: v})

                    res = minimize_scalar(
                        along,
                        bounds=(lo, hi),
                        method="bounded",
                        options={"xatol": 1e-3 * (hi - lo)},
                    )
                    if res.fun <= best["value"]:
                        point[name] = float(res.x)
        except _BudgetSpent:
            exhausted = True
            logger.warning(
                "Constant search on %s stopped after %d evaluations",
                domain.describe(),
                evaluations,
            )
        point = {k: best[k] for k in ("log_a", "b", "q")}
        tf = make_test_function(
            PowerBump(q=point["q"]),
            domain,
            Band(a=math.exp(point["log_a"]), b=point["b"]),
        )
        final = integrate(tf, quad, _quotient_integrand(tf, p.p))
        value = final.values["num"] / final.values["den"]
    return ConstantEstimate(
        domain=domain.describe(),
        p=p.p,
        value=value,
        a=math.exp(point["log_a"]),
        b=point["b"],
        q=point["q"],
        evaluations=evaluations,
        budget_exhausted=exhausted,
        converged=final.converged,
    )


# -- FMT comparison --------------------------------------------------------


@dataclass(frozen=True)
class FMTRow:
    radius: float
    delta: float
    difference: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.difference >= self.bound - 1e-12 * abs(self.bound)


@dataclass(frozen=True)
class FMTTable:
    alpha: float
    R: float
    n: int
    rows: tuple[FMTRow, ...]

    @property
    def violations(self) -> int:
        return sum(not row.holds for row in self.rows)

    @property
    def min_margin(self) -> float:
        return min(row.difference - row.bound for row in self.rows)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "R": self.R,
            "n": self.n,
            "rows": len(self.rows),
            "violations": self.violations,
            "min_margin": self.min_margin,
            "passed": self.passed,
        }


def compare_fmt(
    alpha: float, R: float = 1.0, n: int = 2, samples: int = 10_000
) -> FMTTable:
    """Tabulate ``I1 - I2`` against its displayed lower bound on the ball.

    ``I1 = (n - 1) / (2 delta |x|)`` is the curvature gain of the ball
    inequality and ``I2 = c_alpha D^-(alpha+2) delta^alpha`` the extra term
    of the comparison inequality, with ``D = 2R``.
    """
    if alpha <= -2.0:
        raise AlphaOutOfRangeError(f"alpha must exceed -2, got {alpha}")
    # validates R > 0 and n in {2, 3}
    Disc(R=R, n=n)
    eps = alpha + 2.0
    c = fmt_c_alpha(alpha)
    r = R * (np.arange(samples) + 0.5) / samples
    delta = R - r
    i1 = (n - 1) / (2.0 * delta * r)
    i2 = c * (2.0 * R) ** (-eps) * delta**alpha
    if eps >= 1.0:
        bound = (2 * n - 1 - 2.0 * eps) / (4.0 * delta * r)
    else:
        bound = ((2 * n - 2) * R - (2 * n - 1) * r) / (4.0 * delta**2 * r)
    rows = tuple(
        FMTRow(float(ri), float(di), float(d), float(b))
        for ri, di, d, b in zip(r, delta, i1 - i2, bound)
    )
    return FMTTable(alpha, R, n, rows)


__all__ = [
    "ConstantEstimate",
    "ConstantFamily",
    "FMTRow",
    "FMTTable",
    "HardyReport",
    "compare_fmt",
    "estimate_constant",
    "lhs_directional",
    "lhs_full_gradient",
    "rhs",
    "verify",
]
