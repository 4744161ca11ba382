"""Quadrature over the support of a band test function.

Three schemes share one interface: ``node_sets`` yields batches of nodes
with their distance field and weights, and ``integrate`` sums integrands
over them, doubling the resolution until two successive values agree.

``radial-1d`` works in normal coordinates ``x = y(s) + t n(s)``, where the
volume element is ``prod(1 + t kappa_i) dA dt``; symmetric boundary
parameters are collapsed into a single node by the domain.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from . import geometry
from .domains import ConformalAnnulus
from .errors import InadmissibleCombinationError, QuadratureUnconvergedError
from .geometry import DistanceField
from .profiles import TestFunction, band_ridge_distance

logger = logging.getLogger("HardyLab.Quadrature")

Scheme = Literal["radial-1d", "tensor-grid-midpoint", "monte-carlo"]

_CHUNK = 1 << 16
_PANEL = 16


class QuadratureSpec(BaseModel):
    """``scheme=None`` picks radial-1d where the band allows it."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Scheme | None = None
    resolution: int = Field(default=256, ge=64)
    tolerance: float = Field(default=1e-3, gt=0.0, lt=1.0)
    seed: int = 0

    def resolve(self, tf: TestFunction) -> Scheme:
        if self.scheme is not None:
            return self.scheme
        if isinstance(tf.domain, ConformalAnnulus):
            return "tensor-grid-midpoint"
        if tf.band.b < band_ridge_distance(tf.domain, tf.components):
            return "radial-1d"
        return "tensor-grid-midpoint"


@dataclass(frozen=True)
class NodeSet:
    field: DistanceField
    weights: NDArray


@dataclass(frozen=True)
class Integration:
    values: dict[str, float]
    coarse: dict[str, float]
    converged: bool
    scheme: Scheme
    resolution: int


def log_gauss_nodes(
    a: float, b: float, resolution: int
) -> tuple[NDArray, NDArray]:
    """Gauss-Legendre nodes in ``log t`` on ``[a, b]``; weights for ``dt``."""
    panels = max(1, resolution // _PANEL)
    x, w = np.polynomial.legendre.leggauss(_PANEL)
    edges = np.linspace(math.log(a), math.log(b), panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    u = (mid[:, np.newaxis] + half[:, np.newaxis] * x).ravel()
    wu = (half[:, np.newaxis] * w).ravel()
    t = np.exp(u)
    return t, wu * t


def _radial_nodes(tf: TestFunction, resolution: int) -> Iterator[NodeSet]:
    domain = tf.domain
    if tf.band.b >= band_ridge_distance(domain, tf.components):
        raise InadmissibleCombinationError(
            f"radial-1d needs the band below the ridge of "
            f"{domain.describe()}"
        )
    t, wt = log_gauss_nodes(tf.band.a, tf.band.b, resolution)
    for c in tf.components:
        params, wb = domain.boundary_nodes(resolution, c)
        comp = np.full(len(params), c)
        y, normal = domain.boundary(params, comp)
        kappas = domain.curvatures(params, comp)
        ridge = domain.ridge_distance(params, comp)
        m, k = len(params), len(t)
        delta = np.tile(t, m)
        rows = np.repeat(np.arange(m), k)
        jac = np.prod(1.0 + delta[:, np.newaxis] * kappas[rows], axis=1)
        x = y[rows] + delta[:, np.newaxis] * normal[rows]
        f = DistanceField(
            x=x,
            delta=delta,
            grad=normal[rows],
            point=y[rows],
            params=params[rows],
            component=comp[rows],
            kappas=kappas[rows],
            ridge=None if ridge is None else ridge[rows],
        )
        yield NodeSet(f, wb[rows] * np.tile(wt, m) * jac)


def _box_nodes(
    tf: TestFunction, points: NDArray, cell: float
) -> NodeSet | None:
    domain = tf.domain
    points = points[domain.contains(points)]
    if len(points) == 0:
        return None
    f = geometry.field(domain, points)
    near = f.delta < tf.band.b
    if not near.any():
        return None
    return NodeSet(f.take(near), np.full(int(near.sum()), cell))


def _grid_nodes(tf: TestFunction, resolution: int) -> Iterator[NodeSet]:
    lo, hi = tf.support_box()
    n = len(lo)
    h = (hi - lo) / resolution
    cell = float(np.prod(h))
    total = resolution**n
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total))
        idx = np.stack(np.unravel_index(flat, (resolution,) * n), axis=1)
        nodes = _box_nodes(tf, lo + (idx + 0.5) * h, cell)
        if nodes is not None:
            yield nodes


def _monte_carlo_nodes(
    tf: TestFunction, resolution: int, seed: int
) -> Iterator[NodeSet]:
    lo, hi = tf.support_box()
    rng = np.random.default_rng(seed)
    count = resolution * resolution
    cell = float(np.prod(hi - lo)) / count
    for start in range(0, count, _CHUNK):
        size = min(_CHUNK, count - start)
        nodes = _box_nodes(tf, rng.uniform(lo, hi, (size, len(lo))), cell)
        if nodes is not None:
            yield nodes


def node_sets(
    tf: TestFunction, scheme: Scheme, resolution: int, seed: int = 0
) -> Iterator[NodeSet]:
    if scheme == "radial-1d":
        return _radial_nodes(tf, resolution)
    if scheme == "tensor-grid-midpoint":
        return _grid_nodes(tf, resolution)
    return _monte_carlo_nodes(tf, resolution, seed)


Integrand = Callable[[NodeSet], Mapping[str, NDArray]]


def _sum(
    tf: TestFunction,
    scheme: Scheme,
    resolution: int,
    seed: int,
    integrand: Integrand,
) -> dict[str, float]:
    parts: dict[str, list[float]] = {}
    for nodes in node_sets(tf, scheme, resolution, seed):
        for key, value in integrand(nodes).items():
            total = float(np.sum(nodes.weights * value))
            parts.setdefault(key, []).append(total)
    return {key: float(np.sum(vals)) for key, vals in parts.items()}


def _close(coarse: float, fine: float, tolerance: float) -> bool:
    scale = max(abs(fine), abs(coarse))
    return scale == 0.0 or abs(fine - coarse) <= tolerance * scale


def integrate(
    tf: TestFunction, quad: QuadratureSpec, integrand: Integrand
) -> Integration:
    """Integrate at ``resolution`` and ``2 * resolution``.

    The refined values are returned; ``converged`` records whether every
    integral moved by at most the relative tolerance. Monte Carlo draws
    are not refined.
    """
    scheme = quad.resolve(tf)
    coarse = _sum(tf, scheme, quad.resolution, quad.seed, integrand)
    if scheme == "monte-carlo":
        return Integration(coarse, coarse, True, scheme, quad.resolution)
    fine = _sum(tf, scheme, 2 * quad.resolution, quad.seed, integrand)
    converged = all(
        _close(coarse.get(k, 0.0), fine.get(k, 0.0), quad.tolerance)
        for k in set(coarse) | set(fine)
    )
    if not converged:
        logger.warning(
            "Quadrature %s on %s did not converge at resolution %d: %s -> %s",
            scheme,
            tf.domain.describe(),
            quad.resolution,
            coarse,
            fine,
        )
    return Integration(fine, coarse, converged, scheme, 2 * quad.resolution)


def integrate_once(
    tf: TestFunction, quad: QuadratureSpec, integrand: Integrand
) -> dict[str, float]:
    """Single pass at ``quad.resolution`` without refinement."""
    return _sum(tf, quad.resolve(tf), quad.resolution, quad.seed, integrand)


def integrate_strict(
    tf: TestFunction, quad: QuadratureSpec, integrand: Integrand, key: str
) -> float:
    """Converged value of one integral, else raise
    :class:`QuadratureUnconvergedError`."""
    result = integrate(tf, quad, integrand)
    if not result.converged:
        raise QuadratureUnconvergedError(
            result.coarse.get(key, 0.0),
            result.values.get(key, 0.0),
            quad.tolerance,
        )
    return result.values.get(key, 0.0)


__all__ = [
    "Integration",
    "NodeSet",
    "QuadratureSpec",
    "Scheme",
    "integrate",
    "integrate_once",
    "integrate_strict",
    "log_gauss_nodes",
    "node_sets",
]
