"""The test for the exact algebra layer."""

from fractions import Fraction
import logging

import pytest

from qell.exact_algebra import (
    CoefficientRing,
    GradedRing,
    RationalFunction,
    RingKind,
    RingMap,
    eval_ring_map,
    nu2,
    reduce_truncated,
    truncated_power,
    truncated_reducer,
)
from qell.exceptions import (
    AlgebraError,
    MixedWeightError,
    NotInvertibleError,
    UnknownGeneratorError,
)

_LOGGER = logging.getLogger(__name__)

COEFFICIENT_RINGS = [
    "coefficients, text",
    [
        (CoefficientRing(), "Z"),
        (CoefficientRing.localized(3), "Z[1/3]"),
        (CoefficientRing.localized(5, 3), "Z[1/3,1/5]"),
        (CoefficientRing.local_at(2), "Z_(2)"),
        (CoefficientRing.rationals(), "Q"),
        (CoefficientRing.prime_field2(), "F2"),
        (CoefficientRing.truncated_dyadic(3), "Z/8"),
        (CoefficientRing.cyclotomic5(), "Z[1/5,zeta]"),
    ],
]

VALUATIONS = [
    "value, expected",
    [
        (1, 0),
        (12, 2),
        (-40, 3),
        (Fraction(3, 8), -3),
        (Fraction(4, 3), 2),
    ],
]


@pytest.mark.parametrize(*COEFFICIENT_RINGS)
def test_coefficient_ring_names(coefficients, text):
    """Test if coefficient rings print their short names."""
    assert str(coefficients) == text


def test_coefficient_ring_denominators():
    """Test if denominators are admitted exactly when the primes are inverted."""
    localized = CoefficientRing.localized(3)
    assert localized.admits_denominator(9)
    assert not localized.admits_denominator(6)
    assert CoefficientRing.local_at(2).admits_denominator(15)
    assert not CoefficientRing.local_at(2).admits_denominator(4)
    assert CoefficientRing.rationals().is_field_of_fractions
    assert localized.is_unit(-3)
    assert not localized.is_unit(2)


def test_modular_coefficients():
    """Test if Z/2^k reduces odd fractions to residues."""
    z4 = CoefficientRing.truncated_dyadic(2)
    assert z4.modulus == 4
    assert z4.normalize(Fraction(1, 3)) == 3
    assert z4.normalize(7) == 3
    assert CoefficientRing.prime_field2().normalize(3) == 1
    with pytest.raises(NotInvertibleError):
        z4.normalize(Fraction(1, 2))
    with pytest.raises(ValueError):
        CoefficientRing.truncated_dyadic(0)


def test_ring_kind():
    """Test ring kind names and parsing."""
    assert RingKind.from_string("cyclotomic5") == RingKind.CYCLOTOMIC5
    assert RingKind.LOCALIZED_INTEGERS.to_name() == "Localized integers"
    with pytest.raises(ValueError, match="Valid kinds are"):
        RingKind.from_string("bogus")


def test_arithmetic(ring):
    """Test if sums, products and powers are exact."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert (a1 + a3) ** 2 == a1**2 + 2 * a1 * a3 + a3**2
    assert (a1 + a3) * (a1 - a3) == a1**2 - a3**2
    assert a1 - a1 == ring.zero()
    assert (a1 - a1).is_zero
    assert 3 - a1 == -(a1 - 3)
    assert str(2 * a1**2 * a3 - a3) == "2*a1^2*a3 - a3"
    assert str(ring.zero()) == "0"


def test_integrality(ring):
    """Test if coefficients must lie in the coefficient ring."""
    with pytest.raises(NotInvertibleError):
        ring.constant(Fraction(1, 2))
    assert not ring.constant(2).is_unit
    ring3 = GradedRing.create(["a1", "a3"], [1, 3], CoefficientRing.localized(3))
    assert ring3.constant(3).is_unit
    assert ring3.constant(3).inverse() == ring3.constant(Fraction(1, 3))


def test_parse(ring):
    """Test if the text serialization parses back."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert ring.parse("(a1 + a3)^2 - a3^2") == a1**2 + 2 * a1 * a3
    assert ring.parse("a1^3/a1") == a1**2
    assert ring.parse(str(2 * a1**2 * a3 - a3)) == 2 * a1**2 * a3 - a3
    with pytest.raises(NotInvertibleError):
        ring.parse("a1/a3")
    with pytest.raises(UnknownGeneratorError):
        ring.parse("a1 + b")
    with pytest.raises(AlgebraError):
        ring.parse("a1 +")


def test_weights(ring):
    """Test homogeneous weights and monomial bases."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert (a1**3 + a3).homogeneous_weight() == 3
    assert ring.zero().homogeneous_weight() is None
    with pytest.raises(MixedWeightError):
        (a1 + a3).homogeneous_weight()
    assert ring.monomials(3) == [(3, 0), (0, 1)]
    assert ring.monomials(6) == [(6, 0), (3, 1), (0, 2)]
    assert ring.monomials(-1) == []


def test_division(ring):
    """Test exact division."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert (a1**2 * a3 + a1 * a3**2) / (a1 + a3) == a1 * a3
    assert a1.divides(a1**2 * a3)
    assert not a3.divides(a1)
    with pytest.raises(NotInvertibleError):
        a1 / ring.zero()
    with pytest.raises(NotInvertibleError):
        a1**-1


def test_laurent_generators():
    """Test if invertible generators take negative powers."""
    ring = GradedRing.create(["v1", "u"], [1, 1], invertible=["u"])
    v1, u = ring.gen("v1"), ring.gen("u")
    assert u**-2 * u**3 == u
    assert (u**-1).is_unit
    assert str(u**-1) == "u^-1"
    assert (v1 + u) / u == v1 * u**-1 + 1
    assert ring.monomial((0, -3), 2) * u**3 == 2
    with pytest.raises(NotInvertibleError):
        ring.monomial((-1, 0))


def test_cyclotomic_ring():
    """Test if powers of zeta are reduced to the basis 1, zeta, zeta^2, zeta^3."""
    ring = GradedRing.create(["x"], [1], CoefficientRing.cyclotomic5())
    zeta = ring.gen("zeta")
    assert ring.names == ("x", "zeta")
    assert zeta**5 == ring.one()
    assert zeta**4 + zeta**3 + zeta**2 + zeta + 1 == ring.zero()
    assert zeta.inverse() == zeta**4
    assert zeta.is_unit


def test_embed(ring):
    """Test coercion between rings by generator name."""
    big = ring.extend(["s"], [1], name="Z[a1,a3,s]")
    assert big.embed(ring.gen("a1") + ring.gen("a3")) == big.gen("a1") + big.gen("a3")
    with pytest.raises(UnknownGeneratorError):
        ring.embed(big.gen("s"))
    with pytest.raises(UnknownGeneratorError):
        ring.gen("a2")


def test_rational_functions(ring):
    """Test if fractions compare by cross-multiplication."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert RationalFunction(a1 * a3, a3).to_element() == a1
    assert RationalFunction(a1, a3) + RationalFunction(a3, a1) == RationalFunction(
        a1**2 + a3**2, a1 * a3
    )
    assert RationalFunction(a1, a3) * a3 == a1
    assert (RationalFunction(a1, a3) - RationalFunction(a1, a3)).is_zero
    with pytest.raises(NotInvertibleError):
        RationalFunction(a1, a3).to_element()
    with pytest.raises(NotInvertibleError):
        RationalFunction(a1, ring.zero())


def test_ring_maps(ring):
    """Test evaluation and composition of ring maps."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    phi = RingMap.from_strings("phi", ring, ring, {"a1": "a1", "a3": "a3 + a1^3"})
    assert phi(a3**2) == (a3 + a1**3) ** 2
    assert phi.compose(phi).images["a3"] == a3 + 2 * a1**3
    assert RingMap.identity(ring).compose(phi).images == phi.images
    assert phi.to_json() == {"a1": "a1", "a3": "a1^3 + a3"}
    assert phi.is_unit_preserving()
    with pytest.raises(UnknownGeneratorError):
        RingMap("bad", ring, ring, {"a1": a1})


def test_truncated_evaluation(ring):
    """Test evaluation with reduction modulo (2^k, v1^j)."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    phi = RingMap.from_strings("phi", ring, ring, {"a1": "a1", "a3": "a3 + a1^3"})
    assert eval_ring_map(phi, a3**2, truncated_reducer(1, 3)) == a3**2
    assert eval_ring_map(phi, a3**2, truncated_reducer(2, 4)) == a3**2 + 2 * a1**3 * a3


def test_reduce_truncated(ring):
    """Test the normal form modulo (2^k, v1^j)."""
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert reduce_truncated(3 * a1**2 + 4 * a3 + a1**5, 2, 4) == 3 * a1**2
    assert reduce_truncated(-a3, 3, 1) == 7 * a3
    assert reduce_truncated(a1, 0, 4) == ring.zero()
    ring3 = GradedRing.create(["a1", "a3"], [1, 3], CoefficientRing.localized(3))
    assert reduce_truncated(ring3.parse("a3/3"), 2, 1) == 3 * ring3.gen("a3")
    rational = GradedRing.create(["a1"], [1], CoefficientRing.rationals())
    with pytest.raises(AlgebraError):
        reduce_truncated(rational.gen("a1"), 1, 1)


def test_truncated_power(ring):
    """Test square-and-multiply modulo (2^k, v1^j)."""
    a1 = ring.gen("a1")
    assert truncated_power(1 + a1, 2, 1, 2) == ring.one()
    assert truncated_power(1 + a1, 2, 2, 3) == 1 + 2 * a1 + a1**2
    assert truncated_power(1 + a1, 0, 2, 3) == ring.one()


@pytest.mark.parametrize(*VALUATIONS)
def test_nu2(value, expected):
    """Test if the 2-adic valuation is calculated correctly."""
    assert nu2(value) == expected


def test_nu2_of_zero():
    """Test if the valuation of zero is None."""
    assert nu2(0) is None
