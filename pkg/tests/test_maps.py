import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from hardy_lab import maps
from hardy_lab.errors import BranchDiscontinuityError, PointOutsideDomainError
from hardy_lab.maps import (
    Composed,
    ConformalMapSpec,
    IdentityAnnulus,
    SqrtQuadratic,
    Squaring,
    Transform,
)

SQRT = SqrtQuadratic(rho=1.5, R=3)
HOLED = SqrtQuadratic(rho=0.5, R=2)


def test_map_spec_discriminates_on_kind():
    spec = TypeAdapter(ConformalMapSpec).validate_python(
        {
            "kind": "composed",
            "base": {"kind": "sqrt-quadratic", "rho": 0.5, "R": 2},
            "transform": {"kind": "scale", "value": 2},
        }
    )
    assert isinstance(spec, Composed)
    assert maps.describe(spec) == "sqrt-quadratic:rho=0.5,R=2|scale=2"
    assert maps.root_of(spec) == SqrtQuadratic(rho=0.5, R=2)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: IdentityAnnulus(rho=2, R=1),
        lambda: SqrtQuadratic(rho=1, R=2),
        lambda: Transform(kind="scale"),
        lambda: Transform(kind="scale", value=-1),
        lambda: Transform(kind="rotation"),
        lambda: Transform(kind="inversion", value=1),
    ],
)
def test_invalid_map_parameters(factory):
    with pytest.raises(ValidationError):
        factory()


def test_target_radii_follow_the_transform():
    base = IdentityAnnulus(rho=1, R=3)
    scale = Composed(base=base, transform=Transform(kind="scale", value=2))
    turn = Composed(
        base=base, transform=Transform(kind="rotation", value=0.4)
    )
    flip = Composed(base=base, transform=Transform(kind="inversion"))
    assert maps.target_radii(scale) == (2.0, 6.0)
    assert maps.target_radii(turn) == (1.0, 3.0)
    assert maps.target_radii(flip) == pytest.approx((1.0 / 3.0, 1.0))


def test_moduli_need_no_branch():
    assert maps.map_modulus(SQRT, 0.0) == pytest.approx(1.0)
    assert maps.map_modulus(SQRT, 3.0) == pytest.approx(math.sqrt(8.0))
    assert maps.deriv_modulus(SQRT, 2.0) == pytest.approx(2.0 / math.sqrt(3))


def test_sqrt_branch_is_odd_and_positive_on_the_real_axis():
    assert maps.map_eval(SQRT, 2.0) == pytest.approx(math.sqrt(3.0))
    assert maps.map_eval(SQRT, -2.0) == pytest.approx(-math.sqrt(3.0))
    z = np.array([1.8 + 0.7j, -0.3 + 2.1j])
    np.testing.assert_allclose(
        maps.map_eval(SQRT, -z), -maps.map_eval(SQRT, z)
    )


def test_holed_branch_is_continuous_off_the_cut():
    x = np.linspace(-0.8, 0.8, 2001)
    for height in (-0.0175, -0.0087, 0.0087, 0.0175):
        values = maps.map_eval(HOLED, x + 1j * height)
        assert np.abs(np.diff(values)).max() < 1e-2
    below = maps.map_eval(HOLED, -0.0087j - 1e-6)
    above = maps.map_eval(HOLED, -0.0087j + 1e-6)
    assert abs(below - above) < 1e-5


def test_holed_branch_jumps_only_across_the_cut():
    upper = maps.map_eval(HOLED, 0.3 + 1e-7j)
    lower = maps.map_eval(HOLED, 0.3 - 1e-7j)
    root = math.sqrt(1.0 - 0.3**2)
    assert upper == pytest.approx(1j * root, abs=1e-6)
    assert lower == pytest.approx(-1j * root, abs=1e-6)
    assert maps.map_eval(HOLED, -0.3 - 1e-7j) == pytest.approx(-upper)


def test_evaluation_on_the_cut_raises():
    with pytest.raises(BranchDiscontinuityError):
        maps.map_eval(HOLED, 0.3)
    value, deriv = maps.probe_eval(HOLED, [0.3, 0.3 + 0.1j])
    assert np.isnan(value[0]) and np.isnan(deriv[0])
    assert np.isfinite(value[1])


def test_continuation_grid_has_no_jump_off_the_cut():
    branch = maps._sqrt_branch(HOLED)
    v = branch.values
    n = v.shape[0]
    axis = -branch.half_width + (np.arange(n) + 0.5) * branch.step

    def jumps(a, b):
        both = ~np.isnan(a) & ~np.isnan(b)
        big = np.abs(a - b) > 0.5 * np.maximum(np.abs(a), np.abs(b))
        return both & big

    assert not jumps(v[:, :-1], v[:, 1:]).any()
    vertical = jumps(v[:-1], v[1:])
    vertical[n // 2 - 1, np.abs(axis) < 1.0] = False
    assert not vertical.any()
    assert jumps(v[n // 2 - 1], v[n // 2]).any()


def test_continuation_across_the_cut_is_detected():
    with pytest.raises(BranchDiscontinuityError):
        maps._continue_sqrt(HOLED, cut=False)
    np.testing.assert_array_equal(
        maps._continue_sqrt(SQRT, cut=False).values,
        maps._sqrt_branch(SQRT).values,
    )


@pytest.mark.parametrize(
    ("spec", "z"),
    [
        (SQRT, 1.8 + 0.7j),
        (SQRT, -0.3 + 2.1j),
        (SQRT, 2.5 - 1.0j),
        (HOLED, -0.846 + 0.0175j),
        (HOLED, 0.3 - 0.02j),
        (HOLED, -0.0087j),
    ],
)
def test_sqrt_derivative_satisfies_cauchy_riemann(spec, z):
    h = 1e-6
    along_x = (maps.map_eval(spec, z + h) - maps.map_eval(spec, z - h)) / (
        2 * h
    )
    along_y = (
        maps.map_eval(spec, z + 1j * h) - maps.map_eval(spec, z - 1j * h)
    ) / (2j * h)
    expected = maps.deriv_eval(spec, z)
    assert along_x == pytest.approx(expected, rel=1e-6)
    assert along_y == pytest.approx(expected, rel=1e-6)


def test_inversion_derivative():
    spec = Composed(
        base=IdentityAnnulus(rho=1, R=3),
        transform=Transform(kind="inversion"),
    )
    z = 1.5 + 0.5j
    assert maps.map_eval(spec, z) == pytest.approx(1.0 / z)
    assert maps.deriv_eval(spec, z) == pytest.approx(-1.0 / z**2)


def test_evaluation_outside_the_domain_raises():
    with pytest.raises(PointOutsideDomainError):
        maps.map_eval(IdentityAnnulus(rho=1, R=3), 0.5)


def test_probe_eval_marks_outside_points():
    value, deriv = maps.probe_eval(
        IdentityAnnulus(rho=1, R=3), [2.0, 0.5, 4.0j]
    )
    assert value[0] == 2.0
    assert np.isnan(value[1:]).all()
    assert np.isnan(deriv[1:]).all()


def test_contains_and_bounding_radius():
    squaring = Squaring(rho=1, R=4)
    assert maps.contains(squaring, [1.5, 0.9, 2.1]).tolist() == [
        True,
        False,
        False,
    ]
    assert maps.bounding_radius(squaring) == 2.0


@pytest.mark.parametrize(
    "spec",
    [
        IdentityAnnulus(rho=1, R=3),
        SqrtQuadratic(rho=0.5, R=2),
        SQRT,
        Squaring(rho=1, R=4),
    ],
)
def test_level_curves_lie_on_the_boundary_circles(spec):
    t = np.linspace(0.0, 4.0 * math.pi, 41)
    for curve in maps.level_curves(spec):
        radius = spec.rho if curve.component == 0 else spec.R
        np.testing.assert_allclose(
            maps.map_modulus(spec, curve.point(t)), radius, rtol=1e-12
        )
        h = 1e-6
        fd = (curve.point(t + h) - curve.point(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, curve.d1(t), rtol=1e-6, atol=1e-8)


def test_cassini_curves_split_below_the_lemniscate():
    curves = maps.level_curves(SqrtQuadratic(rho=0.5, R=2))
    assert [c.component for c in curves] == [0, 0, 1]
    assert curves[-1].period == 4.0 * math.pi
