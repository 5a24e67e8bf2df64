"""Seeded random tests of the identities the differential and the structure maps satisfy."""

import logging
from random import Random

import pytest

from qell.chromatic import (
    k_bound,
    leading_expansion,
    leibniz_identities,
    module_base,
    odd_power_rule,
    psi_divisibility,
    rule_agrees,
    square_rule,
)
from qell.level_maps import level_algebroid, level_data

from .const import PROPERTY_CASES, PROPERTY_SEED

_LOGGER = logging.getLogger(__name__)

RULE_V1_BOUND = 6


def random_element(rng, ring, max_weight, max_terms=3):
    """Return a homogeneous element with a few small integer coefficients."""
    monomials = ring.monomials(rng.randint(1, max_weight))
    chosen = rng.sample(monomials, min(max_terms, len(monomials)))
    return ring.from_terms({m: rng.randint(-9, 9) or 1 for m in chosen})


def test_two_adic_valuation_of_powers_of_three():
    """Test if ν₂(3^t − 1) is k(t) for random t."""
    rng = Random(PROPERTY_SEED)
    for _ in range(PROPERTY_CASES):
        t = rng.randint(1, 4096)
        assert psi_divisibility(t, 3) == k_bound(t), t


@pytest.mark.slow
@pytest.mark.parametrize("ell", [3, 5])
def test_ring_maps_are_homomorphisms(ell):
    """Test if f*, q* and both units are additive and multiplicative on random elements."""
    rng = Random(PROPERTY_SEED + ell)
    data, algebroid = level_data(ell), level_algebroid(ell)
    maps = [data.f, data.q, algebroid.eta_left, algebroid.eta_right]
    ring = data.weierstrass
    for _ in range(PROPERTY_CASES):
        x, y = random_element(rng, ring, 4), random_element(rng, ring, 4)
        ring_map = rng.choice(maps)
        assert ring_map(x + y) == ring_map(x) + ring_map(y), (str(x), str(y))
        assert ring_map(x * y) == ring_map(x) * ring_map(y), (str(x), str(y))
    assert all(ring_map(ring.one()) == ring_map.target.one() for ring_map in maps)


@pytest.mark.slow
@pytest.mark.parametrize("ell", [3, 5])
def test_leibniz_and_doubling(ell):
    """Test if D(xy) and D(x²) follow the Leibniz and doubling identities on random pairs."""
    rng = Random(PROPERTY_SEED + 10 * ell)
    ring = level_data(ell).weierstrass
    for _ in range(PROPERTY_CASES):
        x, y = random_element(rng, ring, 4), random_element(rng, ring, 4)
        results = leibniz_identities(x, y, ell)
        assert all(results.values()), (str(x), str(y), results)


@pytest.mark.slow
def test_power_rules():
    """Test if the square and odd-power rules match D(x^m) to depth 3 on random x."""
    rng = Random(PROPERTY_SEED)
    ring = level_data(3).weierstrass
    for _ in range(PROPERTY_CASES):
        x = random_element(rng, ring, 3)
        component = rng.choice(["gamma", "b1"])
        m = rng.choice([2, 3, 5])
        base = module_base(x, component, 3, depth=3, v1_bound=RULE_V1_BOUND)
        expansion = leading_expansion(x, 3, depth=3, v1_bound=RULE_V1_BOUND)[component]
        direct = leading_expansion(x, 3, depth=3, v1_bound=RULE_V1_BOUND, power=m)[component]
        predicted = square_rule(expansion, base) if m == 2 else odd_power_rule(expansion, base, m)
        assert rule_agrees(predicted, direct), (str(x), component, m)
