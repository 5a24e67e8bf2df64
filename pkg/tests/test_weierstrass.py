"""The test for Weierstrass curves and Tate normal forms."""

import logging

import pytest

from qell.exact_algebra import CoefficientRing
from qell.exceptions import AlgebraError, NotInvertibleError
from qell.weierstrass import (
    CurvePoint,
    Transformation,
    WeierstrassCurve,
    add_points,
    division_polynomial,
    evaluate_at_point,
    multiply_point,
    order_five_check,
    point_ring,
    tate_curve,
    tate_normal_form,
    tate_parameters,
    tate_ring,
    tate_round_trip_check,
    transform,
    transform_point,
)

from .const import TATE_B_VALUES, TATE_B_VALUES_FULL

_LOGGER = logging.getLogger(__name__)

# y^2 = x^3 - x
CONGRUENT_CURVE = [0, 0, 0, -1, 0]

CHANGES = [
    "r, s, t, lam",
    [
        (0, 0, 0, 1),
        (1, 2, 3, 2),
        (-1, "1/2", 5, -3),
        ("2/3", 0, -1, "1/2"),
    ],
]


def _change(ring, r, s, t, lam):
    values = [ring.parse(str(v)) for v in (r, s, t, lam)]
    return Transformation.from_values(ring, *values)


def test_invariants(rationals):
    """Test if b2, b4, c4, c6 and the discriminant are calculated correctly."""
    curve = WeierstrassCurve.from_list(rationals, CONGRUENT_CURVE)
    invariants = curve.invariants()
    assert invariants["b2"] == 0
    assert invariants["b4"] == -2
    assert invariants["c4"] == 48
    assert invariants["c6"] == 0
    assert invariants["Delta"] == 64


@pytest.mark.parametrize(*CHANGES)
def test_transform_scales_invariants(rationals, r, s, t, lam):
    """Test if c4 and the discriminant scale by lambda^4 and lambda^12."""
    curve = WeierstrassCurve.from_list(rationals, CONGRUENT_CURVE)
    change = _change(rationals, r, s, t, lam)
    moved = transform(curve, change)
    assert moved.c4 == change.lam**4 * curve.c4
    assert moved.discriminant == change.lam**12 * curve.discriminant


@pytest.mark.parametrize(*CHANGES)
def test_transform_points(rationals, r, s, t, lam):
    """Test if transformed points lie on the transformed curve."""
    curve = WeierstrassCurve.from_list(rationals, CONGRUENT_CURVE)
    change = _change(rationals, r, s, t, lam)
    moved = transform(curve, change)
    for x, y in ((0, 0), (1, 0), (-1, 0)):
        point = CurvePoint.affine(rationals, x, y)
        assert curve.contains(point)
        assert moved.contains(transform_point(point, change))


def test_compose_and_inverse(rationals):
    """Test if composition applies the changes in order and inverses cancel."""
    curve = tate_curve(rationals.gen("b"))
    first = _change(rationals, 1, 2, 3, 2)
    second = _change(rationals, -1, "1/2", 5, -3)
    assert transform(transform(curve, first), second) == transform(curve, first.compose(second))
    assert first.compose(first.inverse()).is_identity()
    assert transform(transform(curve, first), first.inverse()) == curve


def test_lambda_must_be_a_unit(ring):
    """Test if a non-unit scaling is rejected."""
    with pytest.raises(NotInvertibleError):
        Transformation.from_values(ring, lam=2)


def test_group_law(rationals):
    """Test the chord-tangent law on y^2 = x^3 - x."""
    curve = WeierstrassCurve.from_list(rationals, CONGRUENT_CURVE)
    origin = CurvePoint.affine(rationals, 0, 0)
    one = CurvePoint.affine(rationals, 1, 0)
    assert add_points(curve, origin, one) == CurvePoint.affine(rationals, -1, 0)
    assert multiply_point(curve, 2, origin).is_infinity
    assert add_points(curve, CurvePoint.infinity(), one) == one


def test_division_polynomials(rationals):
    """Test psi_2 and psi_3 of y^2 = x^3 - x."""
    curve = WeierstrassCurve.from_list(rationals, CONGRUENT_CURVE)
    ring = point_ring(curve)
    assert division_polynomial(curve, 2) == 2 * ring.gen("y")
    assert division_polynomial(curve, 3) == ring.parse("3*x^4 - 6*x^2 - 1")
    with pytest.raises(AlgebraError):
        division_polynomial(curve, 0)


def test_tate_curve_has_order_five():
    """Test if (0,0) has exact order 5 on T(b) over Z[b]."""
    ring = tate_ring()
    curve = tate_curve(ring.gen("b"))
    origin = CurvePoint.affine(ring, 0, 0)
    assert not multiply_point(curve, 2, origin).is_infinity
    assert multiply_point(curve, 5, origin).is_infinity
    psi5 = evaluate_at_point(division_polynomial(curve, 5), curve, origin)
    assert psi5.is_zero
    report = order_five_check()
    assert report.ok, report.to_text()


def test_tate_normal_form_is_fixed(rationals):
    """Test if T(b) with (0,0) is its own normal form."""
    curve = tate_curve(rationals.constant(2))
    normal = tate_normal_form(curve, CurvePoint.affine(rationals, 0, 0))
    assert normal.curve == curve
    assert normal.transformation.is_identity()
    assert normal.parameters == (rationals.constant(2), rationals.constant(2))


def test_homogeneous_tate_parameters(rationals):
    """Test if the homogeneous normal form keeps its scale but still has the parameters of T(b)."""
    curve = tate_curve(rationals.constant(3))
    change = Transformation.from_values(rationals, 1, 2, -1, 2)
    origin = transform_point(CurvePoint.affine(rationals, 0, 0), change)
    normal = tate_normal_form(transform(curve, change), origin, homogeneous=True)
    assert normal.curve.a4.is_zero
    assert normal.curve.a6.is_zero
    assert normal.parameters is None
    b, c = (value.to_element() for value in tate_parameters(normal.curve))
    assert b == rationals.constant(3)
    assert c == rationals.constant(3)


def test_tate_normal_form_errors(rationals):
    """Test if the point at infinity and points off the curve are rejected."""
    curve = tate_curve(rationals.constant(2))
    with pytest.raises(AlgebraError):
        tate_normal_form(curve, CurvePoint.infinity())
    with pytest.raises(AlgebraError):
        tate_normal_form(curve, CurvePoint.affine(rationals, 1, 1))


def test_tate_round_trip():
    """Test if random coordinate changes of (T(b), (0,0)) normalize back to T(b)."""
    report = tate_round_trip_check(TATE_B_VALUES, seed=5, samples=10)
    assert report.ok, report.to_text()
    assert len(report.checks) == len(TATE_B_VALUES)


@pytest.mark.slow
def test_tate_round_trip_full():
    """Test the round trip with 100 random changes for each of 10 values of b."""
    report = tate_round_trip_check(TATE_B_VALUES_FULL, seed=2024, samples=100)
    assert report.ok, report.to_text()
    assert len(report.checks) == 10


def test_rational_coefficients_are_exact():
    """Test if the round trip runs over the rationals."""
    assert tate_ring(CoefficientRing.rationals()).coefficients.is_field_of_fractions


def test_tate_discriminant(rationals):
    """Test if the discriminant of T(b) is b^5(b^2 - 11b - 1)."""
    b = rationals.gen("b")
    assert tate_curve(b).discriminant == b**5 * (b**2 - 11 * b - 1)
    assert tate_curve(rationals.constant(1)).discriminant == -11
