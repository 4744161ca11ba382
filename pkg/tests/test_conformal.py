import math

import numpy as np
import pytest

from hardy_lab import conformal
from hardy_lab.domains import Annulus
from hardy_lab.errors import (
    AnnulusBoundaryError,
    BandEmptyError,
    InadmissibleCombinationError,
    PointOutsideDomainError,
)
from hardy_lab.inequalities import AnnulusAL
from hardy_lab.maps import (
    Composed,
    IdentityAnnulus,
    SqrtQuadratic,
    Squaring,
    Transform,
)
from hardy_lab.profiles import Band, SmoothBump
from hardy_lab.quadrature import QuadratureSpec
from hardy_lab.verifier import verify

IDENTITY = IdentityAnnulus(rho=1, R=3)
SQRT = SqrtQuadratic(rho=0.5, R=2)
TRANSFORMS = [
    Transform(kind="scale", value=2.0),
    Transform(kind="rotation", value=0.6),
    Transform(kind="inversion"),
]


def test_invariant_on_the_identity_annulus():
    result = conformal.frak_F(IDENTITY, 2.0)
    assert result.value == pytest.approx(3.75)
    assert result.components == pytest.approx((-0.25, 4.0))


@pytest.mark.parametrize("transform", TRANSFORMS, ids=lambda t: t.kind)
def test_invariant_ignores_moebius_changes_of_the_annulus(transform):
    moved = Composed(base=IDENTITY, transform=transform)
    z = np.array([1.3 + 0.4j, -2.2j, 2.9])
    np.testing.assert_allclose(
        conformal.frak_F(moved, z).value,
        conformal.frak_F(IDENTITY, z).value,
        rtol=1e-12,
    )


def test_points_next_to_the_circles_are_refused():
    with pytest.raises(AnnulusBoundaryError):
        conformal.frak_F(IDENTITY, 1.0 + 1e-13)
    with pytest.raises(PointOutsideDomainError):
        conformal.frak_F(IDENTITY, 0.5)


def test_example_display_matches_the_invariant_on_the_real_axis():
    z = math.sqrt(1.0 + 1.2**2)
    assert conformal.example_display(SQRT, z) == pytest.approx(
        conformal.frak_F(SQRT, z).value
    )
    off_axis = 1.2j
    assert conformal.example_display(SQRT, off_axis) != pytest.approx(
        conformal.frak_F(SQRT, off_axis).value, rel=1e-3
    )


def test_example_display_is_undefined_inside_the_unit_circle():
    assert np.isnan(conformal.example_display(SQRT, 0.5j))


def test_sample_domain_keeps_clear_of_both_circles():
    rng = np.random.default_rng(0)
    z = conformal.sample_domain(SQRT, 300, rng)
    m = np.sqrt(np.abs(z * z - 1.0))
    gap = conformal.SAMPLE_MARGIN * 1.5
    assert len(z) == 300
    assert np.all((m > 0.5 + gap) & (m < 2.0 - gap))


@pytest.mark.parametrize("spec", [IDENTITY, SQRT], ids=["identity", "sqrt"])
@pytest.mark.parametrize("transform", TRANSFORMS, ids=lambda t: t.kind)
def test_invariance_check_passes(spec, transform):
    result = conformal.invariance_check(
        spec, transform, samples=1000, seed=4
    )
    assert result.passed, result.to_dict()
    assert result.samples == 1000
    assert result.max_deviation <= 1e-10
    assert result.to_dict()["max_relative_deviation"] >= 0.0


def test_pullback_through_the_identity_is_the_annulus_inequality():
    band = Band(a=0.1, b=0.8)
    quad = QuadratureSpec()
    pulled = conformal.pullback_verify(IDENTITY, SmoothBump(), band, quad)
    direct = verify(
        AnnulusAL(), Annulus(rho=1, R=3), 2, SmoothBump(), band, quad
    )
    assert pulled.converged
    assert pulled.checks["change_of_variables"]["passed"]
    assert pulled.lhs == pytest.approx(direct.lhs, rel=1e-6)
    assert pulled.rhs == pytest.approx(direct.rhs, rel=1e-6)
    assert pulled.passed


@pytest.mark.slow
@pytest.mark.parametrize(
    "band",
    [Band(a=0.02 + 0.03 * k, b=0.3 + 0.04 * k) for k in range(10)],
    ids=lambda band: f"{band.a:.2f}-{band.b:.2f}",
)
def test_pullback_through_the_square_root_map(band):
    report = conformal.pullback_verify(
        SQRT, SmoothBump(), band, QuadratureSpec(resolution=512)
    )
    assert report.ratio >= 1.0
    assert report.checks["change_of_variables"]["passed"], report.checks
    assert report.domain == "conformal:sqrt-quadratic:rho=0.5,R=2"


def test_pullback_refuses_the_squaring_map():
    with pytest.raises(InadmissibleCombinationError):
        conformal.pullback_verify(
            Squaring(rho=1, R=4),
            SmoothBump(),
            Band(a=0.1, b=0.5),
            QuadratureSpec(),
        )


def test_pullback_refuses_empty_bands():
    with pytest.raises(BandEmptyError):
        conformal.pullback_verify(
            IDENTITY, SmoothBump(), Band(a=1.0, b=1.5), QuadratureSpec()
        )


def test_pullback_of_the_zero_function():
    report = conformal.pullback_verify(
        IDENTITY, None, Band(a=0.1, b=0.5), QuadratureSpec()
    )
    assert report.lhs == report.rhs == 0.0
    assert report.profile == "zero"


@pytest.mark.parametrize(
    "spec", [IDENTITY, SqrtQuadratic(rho=1.5, R=3)], ids=["identity", "sqrt"]
)
def test_univalent_maps_show_no_collision(spec):
    verdict = conformal.univalence_probe(spec, pairs=400, seed=2)
    assert verdict.kind == "no-collision-found"
    assert verdict.pairs_checked == 400


def test_squaring_collides_at_opposite_points():
    verdict = conformal.univalence_probe(Squaring(rho=1, R=4), pairs=40)
    assert verdict.kind == "collision"
    z1, z2 = verdict.pair
    assert z2 == pytest.approx(-z1, abs=1e-9)
    assert verdict.to_dict()["verdict"] == "collision"
