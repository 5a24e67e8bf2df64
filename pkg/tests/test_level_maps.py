"""The test for the level-3 and level-5 structure maps."""

import logging

import pytest

from qell.exact_algebra import RationalFunction
from qell.exceptions import AlgebraError, MixedWeightError
from qell.hopf import weierstrass_algebroid
from qell.level_maps import (
    DeltaLocal,
    action_order_check,
    adams_operation,
    atkin_lehner_restriction_check,
    check_level,
    coface_assembly,
    coface_composite,
    composite_identity_check,
    d_tot0,
    discriminant,
    forms_of,
    invariant_subring,
    kernel_point_check,
    level_algebroid,
    level_data,
    structure_map,
)

_LOGGER = logging.getLogger(__name__)

INVARIANT_DIMENSIONS = {0: 1, 1: 0, 2: 1, 3: 0, 4: 2, 5: 0, 6: 3, 7: 0, 8: 3}


def test_check_level():
    """Test if only levels 3 and 5 are accepted."""
    assert check_level(5) == 5
    with pytest.raises(ValueError):
        check_level(4)


def test_level3_maps(level3):
    """Test if f*, q* and the action are read correctly."""
    a1, a3 = level3.weierstrass.gen("a1"), level3.weierstrass.gen("a3")
    b1 = level3.b1
    assert level3.q(a3) == 3 * b1.gen("a3")
    assert level3.f(a3) == b1.gen("a3")
    assert level3.q(a1) == level3.f(a1) == b1.gen("a1")
    assert level3.action(b1.gen("a1")) == -b1.gen("a1")
    assert set(level3.maps()) == {"f", "q", "action", "t_mf", "f_mf", "q_mf", "psi_mf"}
    assert structure_map("q", 3)(a3) == 3 * b1.gen("a3")


def test_adams_operation(level3):
    """Test if psi^3 scales weight k by 3^k."""
    a1, a3 = level3.weierstrass.gen("a1"), level3.weierstrass.gen("a3")
    assert adams_operation(a1**4 + a3 * a1, 3) == 81 * (a1**4 + a1 * a3)
    with pytest.raises(MixedWeightError):
        adams_operation(a1 + a3, 3)


def test_realization(level3):
    """Test if the level-3 forms are realized in B1."""
    mf = level3.mf
    A, B, C = forms_of(3, ["A", "B", "C"])
    assert mf.equal(B**2, A * C)
    assert not mf.equal(B, A)
    assert mf.realize(B) == level3.b1.parse("a1*a3")


@pytest.mark.parametrize("ell", [3, 5])
def test_action_order(ell):
    """Test if the action generator has order 2 at level 3 and 4 at level 5."""
    assert action_order_check(ell)


def test_invariant_subring():
    """Test if the invariant subring of B1(3) is Z[1/3][A, B, C]/(B^2 - AC)."""
    result = invariant_subring(3, 8)
    assert result.dimensions == INVARIANT_DIMENSIONS
    assert result.consistent
    A, B, C = forms_of(3, ["A", "B", "C"])
    assert result.relations == [B**2 - A * C]
    assert result.to_json()["relations"] == [str(B**2 - A * C)]


def test_composite_identities_level3():
    """Test t*f* = q*, t*q* = f*psi and t*t* = psi at level 3."""
    report = composite_identity_check(3, 12)
    assert report.ok, report.to_text()


@pytest.mark.slow
def test_composite_identities_level5():
    """Test t*f* = q*, t*q* = f*psi and t*t* = psi at level 5."""
    report = composite_identity_check(5, 8)
    assert report.ok, report.to_text()


def test_d_tot0(level3):
    """Test if the total differential of a1 is calculated correctly."""
    a1 = level3.weierstrass.gen("a1")
    result = d_tot0(a1, 3)
    assert result.gamma == 2 * level_algebroid(3).morphisms.gen("s")
    assert result.b1.is_zero
    assert result.a == 2 * a1
    assert not result.is_zero
    assert result.to_json()["b1"] == "0"


def test_d_tot0_mixed_weight(level3):
    """Test if inhomogeneous input is rejected."""
    ring = level3.weierstrass
    with pytest.raises(MixedWeightError):
        d_tot0(ring.gen("a1") + ring.gen("a2"), 3)


def test_coface_composite(level3):
    """Test if consecutive cofaces compose to zero on c4."""
    c4 = level3.mf1.ring.gen("c4")
    assert level3.mf.realize(coface_composite(c4, 3)).is_zero
    assert len(coface_assembly(1, 3)) == 3
    with pytest.raises(ValueError):
        coface_assembly(2, 3)


@pytest.mark.slow
def test_atkin_lehner_restriction():
    """Test if t* over Z[1/5, zeta] restricts to the rational t* on forms."""
    report = atkin_lehner_restriction_check()
    assert report.ok, report.to_text()


@pytest.mark.slow
def test_kernel_point():
    """Test if the stored kernel point of the dual isogeny reproduces t*."""
    report = kernel_point_check()
    assert report.ok, report.to_text()


def test_inverse_discriminant(level3):
    """Test arithmetic in A with Δ inverted."""
    ring = level3.weierstrass
    delta = discriminant(ring)
    a1 = ring.gen("a1")
    inverse = DeltaLocal.inverse_discriminant(ring)
    assert inverse.weight == -12
    assert inverse * delta == ring.one()
    assert inverse + inverse == DeltaLocal(2 * ring.one(), 1)
    assert (inverse * a1) - DeltaLocal(a1 * delta, 2) == ring.zero()
    reduced = DeltaLocal(a1 * delta**2, 3).normalized()
    assert (reduced.numerator, reduced.power) == (a1, 1)
    assert str(inverse) == "(1)/Delta^1"
    with pytest.raises(AlgebraError):
        DeltaLocal(a1, -1)


@pytest.mark.parametrize("ell", [3, 5])
def test_inverse_discriminant_images(ell):
    """Test if f* and q* send Δ⁻¹ to the inverse of the image of Δ."""
    data = level_data(ell)
    ring = data.weierstrass
    inverse = DeltaLocal.inverse_discriminant(ring)
    for ring_map in (data.f, data.q):
        image = inverse.map(ring_map)
        assert image * RationalFunction(ring_map(discriminant(ring))) == 1


@pytest.mark.slow
def test_inverse_discriminant_is_primitive():
    """Test if η_L and η_R agree on Δ⁻¹."""
    algebroid = weierstrass_algebroid()
    inverse = DeltaLocal.inverse_discriminant(algebroid.objects)
    assert inverse.map(algebroid.eta_right) == inverse.map(algebroid.eta_left)
    assert inverse.map(algebroid.eta_left) != 1
