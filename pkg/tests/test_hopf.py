"""The test for the Weierstrass and Γ₀(5) Hopf algebroids."""

from fractions import Fraction
import logging

import pytest

from qell.exact_algebra import CoefficientRing, GradedRing
from qell.hopf import (
    cobar_d0,
    evaluate_mod,
    gamma0_5_algebroid,
    lambda1_relations,
    lambda1_relations_check,
    right_unit,
    weierstrass_algebroid,
)
from qell.weierstrass import WeierstrassCurve

_LOGGER = logging.getLogger(__name__)

RIGHT_UNITS = [
    "generator, image",
    [
        ("a1", "a1 + 2*s"),
        ("a2", "a2 - s*a1 + 3*r - s^2"),
        ("a3", "a3 + r*a1 + 2*t"),
    ],
]


@pytest.fixture(name="algebroid", scope="module")
def algebroid_fixture():
    """Return (A, Γ) over the integers."""
    return weierstrass_algebroid()


@pytest.mark.parametrize(*RIGHT_UNITS)
def test_right_unit(algebroid, generator, image):
    """Test if the right unit is calculated correctly."""
    x = algebroid.objects.gen(generator)
    assert algebroid.right_unit(x) == algebroid.morphisms.parse(image)
    assert algebroid.left_unit(x) == algebroid.morphisms.gen(generator)


def test_cobar_d0(algebroid):
    """Test if d0 is the difference of the units."""
    a1 = algebroid.objects.gen("a1")
    assert algebroid.cobar_d0(a1) == 2 * algebroid.morphisms.gen("s")
    assert cobar_d0(a1) == algebroid.cobar_d0(a1)
    assert right_unit(a1) == algebroid.right_unit(a1)


def test_coproduct(algebroid):
    """Test if the coproduct composes the coordinate changes."""
    tensor = algebroid.coproduct.target
    morphisms = algebroid.morphisms
    assert algebroid.coproduct(morphisms.gen("r")) == tensor.parse("r1 + r2")
    assert algebroid.coproduct(morphisms.gen("s")) == tensor.parse("s1 + s2")
    assert algebroid.coproduct(morphisms.gen("t")) == tensor.parse("t1 + s1*r2 + t2")
    assert algebroid.coproduct(morphisms.gen("a3")) == tensor.gen("a3")


def test_c4_is_invariant(algebroid):
    """Test if c4 is primitive under the units."""
    c4 = WeierstrassCurve.universal(algebroid.objects).c4
    assert algebroid.right_unit(c4) == algebroid.left_unit(c4)
    assert algebroid.cobar_d0(c4).is_zero


@pytest.mark.slow
def test_discriminant_is_invariant(algebroid):
    """Test if the discriminant is primitive under the units."""
    delta = WeierstrassCurve.universal(algebroid.objects).discriminant
    assert algebroid.right_unit(delta) == algebroid.left_unit(delta)


def test_gamma0_5_objects():
    """Test if the Γ₀(5) algebroid reads only a1, a2 and a3."""
    algebroid = gamma0_5_algebroid()
    assert set(algebroid.eta_right.images) == {"a1", "a2", "a3"}
    assert set(lambda1_relations(algebroid)) == {"a4", "a6", "s6"}


@pytest.mark.slow
def test_lambda1_relations():
    """Test if the Λ¹ relations hold on the transformed curve and at random points."""
    report = lambda1_relations_check(seed=5)
    assert report.ok, report.to_text()
    assert "F_10007 points: s6" in report.to_text()


def test_evaluate_mod():
    """Test if a rational polynomial is evaluated over F_7."""
    ring = GradedRing.create(["x"], [1], CoefficientRing.rationals())
    x = ring.gen("x")
    assert evaluate_mod(x**2 + Fraction(1, 2), {"x": Fraction(3)}, 7) == 6
    assert evaluate_mod(x**2, {"x": Fraction(1, 7)}, 7) is None
