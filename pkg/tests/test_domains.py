import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from hardy_lab.domains import (
    Annulus,
    ConformalAnnulus,
    Cylinder,
    Disc,
    DomainSpec,
    Ellipse,
    ExteriorDisc,
    Hyperboloid,
    Torus,
)
from hardy_lab.maps import IdentityAnnulus


def test_domain_spec_discriminates_on_kind():
    adapter = TypeAdapter(DomainSpec)
    torus = adapter.validate_python(
        {"kind": "torus", "R_major": 3, "r_minor": 1}
    )
    assert isinstance(torus, Torus)
    assert torus.dim == 3


@pytest.mark.parametrize(
    "factory",
    [
        lambda: Disc(R=0),
        lambda: Disc(R=1, n=4),
        lambda: Annulus(rho=3, R=1),
        lambda: Torus(R_major=1, r_minor=2),
        lambda: Ellipse(a=-1, b=1),
        lambda: Disc(R=1, extra=2),
    ],
)
def test_invalid_parameters_are_rejected(factory):
    with pytest.raises(ValidationError):
        factory()


def test_domains_are_frozen():
    disc = Disc(R=1)
    with pytest.raises(ValidationError):
        disc.R = 2


def test_describe_round_trips_the_textual_form():
    assert Disc(R=1).describe() == "disc:R=1"
    assert Disc(R=2, n=3).describe() == "ball:R=2"
    assert Torus(R_major=3, r_minor=1).describe() == "torus:R=3,r=1"
    assert Annulus(rho=1, R=3).describe() == "annulus:rho=1,R=3"


def test_contains():
    x = np.array([[0.5, 0.0], [2.0, 0.0], [0.0, 0.0]])
    assert Disc(R=1).contains(x).tolist() == [True, False, True]
    assert Annulus(rho=1, R=3).contains(x).tolist() == [False, True, False]
    assert ExteriorDisc(rho=1).contains(x).tolist() == [False, True, False]


def test_annulus_sides():
    annulus = Annulus(rho=1, R=3)
    assert annulus.components == (0, 1)
    assert annulus.side(0) == "inner"
    assert annulus.side(1) == "outer"
    assert annulus.sup_delta() == 1.0


def test_truncated_domains_report_their_window():
    cylinder = Cylinder(r=1, half_height=2)
    hyperboloid = Hyperboloid(s_max=2)
    assert cylinder.truncation() == {"half_height": 2}
    assert hyperboloid.truncation() == {"s_max": 2}
    assert Disc(R=1).truncation() == {}

    params = np.array([[0.0, 1.0], [0.0, 3.0]])
    assert hyperboloid.window(params).tolist() == [True, False]
    assert cylinder.window(params).tolist() == [True, False]


def test_foot_points_lie_on_the_boundary():
    torus = Torus(R_major=3, r_minor=1)
    x = np.array([[3.5, 0.0, 0.0], [0.0, 2.4, 0.3]])
    foot = torus.foot(x)
    tube = np.hypot(np.hypot(foot.point[:, 0], foot.point[:, 1]) - 3.0,
                    foot.point[:, 2])
    np.testing.assert_allclose(tube, 1.0)
    np.testing.assert_allclose(
        np.linalg.norm(x - foot.point, axis=1), foot.delta
    )


def test_hyperboloid_foot_is_the_meridian_minimizer():
    hyperboloid = Hyperboloid(s_max=2)
    x = np.array([[0.2, 0.0, 0.0], [0.0, 0.5, 1.0]])
    foot = hyperboloid.foot(x)
    s = foot.params[:, 0]
    np.testing.assert_allclose(
        np.hypot(foot.point[:, 0], foot.point[:, 1]), np.sqrt(1.0 + s * s)
    )
    assert foot.delta[0] == pytest.approx(0.8)


def test_ellipse_curvature_at_the_vertices():
    ellipse = Ellipse(a=2, b=1)
    t = np.array([[0.0], [math.pi / 2]])
    kappas = ellipse.curvatures(t, 0)[:, 0]
    # a / b^2 at the major vertex, b / a^2 at the minor vertex
    np.testing.assert_allclose(kappas, [-2.0, -0.25])


def test_conformal_annulus_of_the_identity_has_two_circles():
    domain = ConformalAnnulus(map=IdentityAnnulus(rho=1, R=3))
    assert domain.components == (0, 1)
    assert {domain.side(c) for c in domain.components} == {"inner", "outer"}
    foot = domain.foot(np.array([[2.5, 0.0]]))
    assert foot.delta[0] == pytest.approx(0.5, abs=1e-9)
