import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_lab import geometry
from hardy_lab.domains import (
    Annulus,
    Cylinder,
    Disc,
    Ellipse,
    ExteriorDisc,
    Hyperboloid,
    Torus,
)
from hardy_lab.errors import (
    MarchExceedsTruncationError,
    OnRidgeError,
    ParameterOutOfRangeError,
    PointOutsideDomainError,
    StencilCrossesRidgeError,
    StencilLeavesDomainError,
)

DISC = Disc(R=1)
ANNULUS = Annulus(rho=1, R=3)
TORUS = Torus(R_major=3, r_minor=1)
HYPERBOLOID = Hyperboloid(s_max=2)


@pytest.mark.parametrize(
    ("domain", "x", "expected"),
    [
        (DISC, (0.0, 0.0), 1.0),
        (DISC, (0.5, 0.0), 0.5),
        (TORUS, (3.5, 0.0, 0.0), 0.5),
        (Ellipse(a=2, b=1), (0.0, 0.0), 1.0),
        (ExteriorDisc(rho=1), (0.0, 2.5), 1.5),
        (Cylinder(r=1, half_height=2), (0.5, 0.0, 7.0), 0.5),
    ],
)
def test_distance(domain, x, expected):
    assert geometry.distance(domain, x) == pytest.approx(expected, abs=1e-9)


def test_distance_outside_the_domain_raises():
    with pytest.raises(PointOutsideDomainError):
        geometry.distance(DISC, (2.0, 0.0))
    with pytest.raises(PointOutsideDomainError):
        geometry.distance(DISC, (0.1, 0.1, 0.1))


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(min_value=1.01, max_value=2.99),
    theta=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_annulus_distance_is_the_nearer_circle(r, theta):
    x = (r * math.cos(theta), r * math.sin(theta))
    assert geometry.distance(ANNULUS, x) == pytest.approx(
        min(r - 1.0, 3.0 - r), abs=1e-12
    )


def test_single_near_point_and_gradient():
    result = geometry.near_points(DISC, (0.5, 0.0))
    assert result.multiplicity == 1
    np.testing.assert_allclose(result.near_points[0].point, [1.0, 0.0])
    np.testing.assert_allclose(result.grad_delta, [-1.0, 0.0])


def test_annulus_mid_circle_has_two_near_points():
    result = geometry.near_points(ANNULUS, (2.0, 0.0))
    assert result.multiplicity == 2
    assert result.grad_delta is None
    assert {p.component for p in result.near_points} == {0, 1}


def test_disc_centre_has_a_continuum_of_near_points():
    assert geometry.near_points(DISC, (0.0, 0.0)).multiplicity == math.inf


def test_principal_curvatures():
    assert geometry.principal_curvatures(TORUS, (0.0, 0.0)) == pytest.approx(
        (-1.0, -0.25)
    )
    assert geometry.principal_curvatures(
        HYPERBOLOID, (0.0, 0.0)
    ) == pytest.approx((-1.0, 1.0))
    assert geometry.principal_curvatures(Disc(R=2), (0.3,)) == pytest.approx(
        (-0.5,)
    )


def test_principal_curvatures_reject_bad_parameters():
    with pytest.raises(ParameterOutOfRangeError):
        geometry.principal_curvatures(TORUS, (0.0,))
    with pytest.raises(ParameterOutOfRangeError):
        geometry.principal_curvatures(TORUS, (0.0, 4.0))


@pytest.mark.parametrize(
    ("domain", "x", "expected"),
    [
        (DISC, (0.5, 0.0), -2.0),
        (TORUS, (3.5, 0.0, 0.0), -16.0 / 7.0),
        (HYPERBOLOID, (0.75, 0.0, 0.0), -8.0 / 15.0),
        (ExteriorDisc(rho=1), (2.0, 0.0), 0.5),
        (Disc(R=1, n=3), (0.0, 0.5, 0.0), -4.0),
    ],
)
def test_laplacian_distance(domain, x, expected):
    assert geometry.laplacian_distance(domain, x) == pytest.approx(expected)


@pytest.mark.parametrize(
    ("domain", "x", "h", "expected"),
    [
        (DISC, (0.5, 0.0), 1e-3, -2.0),
        (Cylinder(r=1, half_height=2), (0.5, 0.0, 0.0), 1e-3, -2.0),
        (ANNULUS, (2.5, 0.0), 1e-3, -0.4),
        (TORUS, (3.5, 0.0, 0.0), 1e-3, -16.0 / 7.0),
    ],
)
def test_laplacian_distance_fd_matches_closed_form(domain, x, h, expected):
    assert geometry.laplacian_distance_fd(domain, x, h) == pytest.approx(
        expected, rel=1e-4
    )


def test_laplacian_distance_fd_stencil_errors():
    with pytest.raises(StencilLeavesDomainError):
        geometry.laplacian_distance_fd(DISC, (0.999, 0.0), 1e-3)
    with pytest.raises(StencilCrossesRidgeError):
        geometry.laplacian_distance_fd(DISC, (0.001, 0.0), 1e-3)


def test_laplacian_on_the_ridge_raises():
    with pytest.raises(OnRidgeError):
        geometry.laplacian_distance(DISC, (0.0, 0.0))
    with pytest.raises(OnRidgeError):
        geometry.laplacian_distance(ANNULUS, (2.0, 0.0))


def test_is_near_ridge():
    assert geometry.is_near_ridge(DISC, (0.0, 0.0)).on_ridge
    assert geometry.is_near_ridge(TORUS, (3.0, 0.0, 0.0)).on_ridge
    assert geometry.is_near_ridge(ANNULUS, (2.0, 0.0)).on_ridge
    verdict = geometry.is_near_ridge(DISC, (0.5, 0.0), eps=1e-6)
    assert not verdict.on_ridge
    assert verdict.reason == "clear"
    assert verdict.distance_to_ridge_estimate == pytest.approx(0.5)


def test_level_surface_curvatures():
    assert geometry.level_surface_curvatures(
        DISC, (0.5, 0.0)
    ) == pytest.approx((-2.0,))
    assert geometry.level_surface_curvatures(
        ExteriorDisc(rho=1), (2.0, 0.0)
    ) == pytest.approx((0.5,))
    assert geometry.level_surface_curvatures(
        TORUS, (3.5, 0.0, 0.0)
    ) == pytest.approx((-2.0, -2.0 / 7.0))


def test_curvature_data_sums_level_curvatures():
    data = geometry.curvature_data(TORUS, (3.5, 0.0, 0.0))
    assert data.kappa_tilde == pytest.approx(sum(data.level_kappas))
    assert data.kappas == pytest.approx((-1.0, -0.25))


def test_ridge_point():
    np.testing.assert_allclose(
        geometry.ridge_point(DISC, (0.5, 0.0)), [0.0, 0.0], atol=1e-8
    )
    np.testing.assert_allclose(
        geometry.ridge_point(ANNULUS, (2.5, 0.0)), [2.0, 0.0], atol=1e-8
    )
    point = geometry.ridge_point(HYPERBOLOID, (0.5, 0.0, 0.0))
    assert math.hypot(point[0], point[1]) == pytest.approx(0.0, abs=1e-6)


def test_ridge_point_needs_a_single_near_point():
    with pytest.raises(OnRidgeError):
        geometry.ridge_point(DISC, (0.0, 0.0))


def test_ridge_march_stops_on_unbounded_domains():
    with pytest.raises(MarchExceedsTruncationError):
        geometry.ridge_point(ExteriorDisc(rho=1), (2.0, 0.0))


def test_ridge_distance_uses_the_closed_form_where_known():
    assert geometry.ridge_distance(DISC, (0.3,)) == pytest.approx(1.0)
    assert geometry.ridge_distance(HYPERBOLOID, (1.0, 0.0)) == pytest.approx(
        math.sqrt(3.0)
    )


def test_torus_extra_term():
    assert geometry.torus_extra_term(TORUS, (3.5, 0.0, 0.0)) == pytest.approx(
        12.0 / 7.0
    )


def test_printed_hyperboloid_sum_takes_both_signs():
    assert geometry.hyperboloid_laplacian_as_printed(1.0, 0.25) < 0
    assert geometry.hyperboloid_laplacian_as_printed(math.sqrt(3), 0.5) > 0


@settings(max_examples=25, deadline=None)
@given(
    r=st.floats(min_value=0.05, max_value=0.95),
    theta=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_disc_gradient_is_a_unit_vector(r, theta):
    field = geometry.field(DISC, [[r * math.cos(theta), r * math.sin(theta)]])
    assert np.linalg.norm(field.grad[0]) == pytest.approx(1.0)
    assert field.delta[0] == pytest.approx(1.0 - r)


def test_geometry_check_on_a_disc():
    report = geometry.geometry_check(DISC, samples=200, seed=1)
    assert report.passed, report.to_dict()
    assert report.to_dict()["passed"] is True


@pytest.mark.slow
@pytest.mark.parametrize(
    "domain",
    [
        DISC,
        ANNULUS,
        ExteriorDisc(rho=1),
        Ellipse(a=2, b=1),
        Cylinder(r=1, half_height=2),
        TORUS,
        HYPERBOLOID,
    ],
    ids=lambda d: d.kind,
)
def test_geometry_check_on_every_domain(domain):
    report = geometry.geometry_check(domain, samples=1000, seed=0)
    assert report.samples == 1000
    assert report.passed, report.to_dict()
    assert report.eikonal_violations == 0
    assert report.gradient_violations == 0
    assert report.laplacian_violations == 0
    assert report.max_laplacian_error <= 1e-4
    assert report.convergence_ratio >= 3.5


@pytest.mark.slow
def test_geometry_check_on_the_torus_sees_only_negative_laplacians():
    report = geometry.geometry_check(TORUS, samples=1000, seed=0)
    assert report.passed, report.to_dict()
    assert report.sign_violations == 0


@pytest.mark.slow
def test_geometry_check_on_the_hyperboloid_records_sign_witnesses():
    report = geometry.geometry_check(HYPERBOLOID, samples=500, seed=0)
    witnesses = report.sign_witnesses
    assert witnesses["printed_negative"] > 0
    assert witnesses["printed_positive"] > 0
    assert witnesses["geometric_positive"] == 0


def test_sample_off_ridge_keeps_points_clear():
    rng = np.random.default_rng(3)
    x = geometry.sample_off_ridge(TORUS, 100, rng, margin=0.05)
    field = geometry.field(TORUS, x)
    assert len(x) == 100
    assert np.all(field.delta >= 0.05 - 1e-12)
    assert np.all(field.delta <= 0.95 + 1e-12)
