"""The test for the chromatic differential and the divided β-family."""

import logging

import pytest

from qell.chromatic import (
    DEFAULT_V1_BOUND,
    BetaFamily,
    BetaIndex,
    BssRule,
    ChromaticFraction,
    KnownExtData,
    LeadingTerm,
    WitnessCase,
    a_bound,
    beta_table,
    bss_differentials,
    common_truncation,
    compare_beta_tables,
    correction_candidates,
    d_chromatic,
    in_f2_span,
    is_invariant_ideal,
    k_bound,
    leading_expansion,
    leibniz_identities,
    load_witnesses,
    m11_bound,
    minimal_invariant_exponent,
    module_base,
    obstruction,
    odd_power_rule,
    parse_witness_fraction,
    psi_divisibility,
    rule_agrees,
    search_corrections,
    square_rule,
    verify_cocycle,
    x_generators,
)
from qell.exceptions import IncompatibleTruncationError, MixedWeightError, VerificationError
from qell.level_maps import level_algebroid

from .const import INVARIANT_IDEALS

_LOGGER = logging.getLogger(__name__)

K_BOUNDS = ["j, expected", [(1, 1), (2, 3), (3, 1), (4, 4), (12, 4), (16, 6)]]
A_BOUNDS = ["i, expected", [(-1, 0), (0, 1), (1, 2), (2, 6), (3, 12)]]


@pytest.mark.parametrize("k, j, expected", INVARIANT_IDEALS)
def test_invariant_ideals(k, j, expected):
    """Test if (2^k, v1^j) is invariant exactly when expected."""
    assert is_invariant_ideal(k, j) is expected


def test_minimal_invariant_exponent():
    """Test if the least invariant v1 exponent is found."""
    assert minimal_invariant_exponent(2, 1) == 2
    assert minimal_invariant_exponent(3, 5) == 8
    assert minimal_invariant_exponent(1, 3) == 3


def test_x_generators(level3):
    """Test if x0 is a3 + a1a2."""
    x0, _, x2 = x_generators(3)
    ring = level3.weierstrass
    assert x0 == ring.parse("a3 + a1*a2")
    assert x2.homogeneous_weight() == 12


def test_d_chromatic(level3):
    """Test if the B1 component of D(x0) is q*(x0) - f*(x0)."""
    x0, _, _ = x_generators(3)
    result = d_chromatic(x0, 2, 2, 3)
    assert result.b1 == 2 * level3.b1.gen("a3")


def test_leading_expansion(level3):
    """Test if the leading terms of D(x0) are calculated correctly."""
    x0, _, _ = x_generators(3)
    morphisms = level_algebroid(3).morphisms
    expansion = leading_expansion(x0, 3, depth=2)
    assert expansion["gamma"].terms == [
        LeadingTerm(0, 1, morphisms.parse("s^2")),
        LeadingTerm(1, 0, morphisms.parse("t + a2*s + r*s + s^3")),
    ]
    assert expansion["b1"].terms == [LeadingTerm(1, 0, level3.b1.gen("a3"))]
    with pytest.raises(ValueError):
        leading_expansion(x0, 3, depth=0)


RULE_CASES = [
    "index, component",
    [(0, "gamma"), (0, "b1"), (1, "gamma"), (1, "b1"), (2, "gamma"), (2, "b1")],
]

ODD_RULE_CASES = [
    "index, component, m",
    [
        (0, "gamma", 3),
        (0, "b1", 3),
        (0, "gamma", 5),
        (0, "b1", 5),
        (1, "gamma", 3),
        (1, "b1", 3),
        (1, "gamma", 5),
        (1, "b1", 5),
        (2, "gamma", 3),
        (2, "b1", 3),
        pytest.param(2, "gamma", 5, marks=pytest.mark.slow),
        pytest.param(2, "b1", 5, marks=pytest.mark.slow),
    ],
]


def test_module_base(level3):
    """Test if d1(x0) is a3 modulo (2, v1)."""
    x0, _, _ = x_generators(3)
    assert module_base(x0, "gamma", 3) == level_algebroid(3).morphisms.gen("a3")
    assert module_base(x0, "b1", 3) == level3.b1.gen("a3")


@pytest.mark.parametrize(*RULE_CASES)
def test_square_rule(index, component):
    """Test if D(x^2) to depth 3 follows from D(x) with the carried 2·d1(x)·D(x) term."""
    x = x_generators(3)[index]
    base = module_base(x, component, 3, depth=3, v1_bound=DEFAULT_V1_BOUND)
    expansion = leading_expansion(x, 3, depth=3)[component]
    squared = leading_expansion(x, 3, depth=3, power=2)[component]
    assert rule_agrees(square_rule(expansion, base), squared)


@pytest.mark.parametrize(*ODD_RULE_CASES)
def test_odd_power_rule(index, component, m):
    """Test if D(x^m) to depth 3 follows from D(x) with every binomial cross term."""
    x = x_generators(3)[index]
    base = module_base(x, component, 3, depth=3, v1_bound=DEFAULT_V1_BOUND)
    expansion = leading_expansion(x, 3, depth=3)[component]
    powered = leading_expansion(x, 3, depth=3, power=m)[component]
    assert rule_agrees(odd_power_rule(expansion, base, m), powered)


def test_rule_mismatch():
    """Test if the terms of D(x0) are not mistaken for those of D(x0^2)."""
    x0, _, _ = x_generators(3)
    expansion = leading_expansion(x0, 3, depth=3)["gamma"]
    squared = leading_expansion(x0, 3, depth=3, power=2)["gamma"]
    assert not rule_agrees(expansion.terms, squared)
    base = module_base(x0, "gamma", 3)
    with pytest.raises(ValueError):
        odd_power_rule(expansion, base, 2)


def test_leibniz_identities(level3):
    """Test the product and square rules of D."""
    x0, _, _ = x_generators(3)
    results = leibniz_identities(level3.weierstrass.gen("a1"), x0)
    assert all(results.values()), results


def test_single_fraction_is_not_a_cocycle(level3):
    """Test if a3/(4 v1) is not a cocycle."""
    fraction = ChromaticFraction(level3.weierstrass.gen("a3"), 2, 1)
    assert not verify_cocycle([fraction])


def test_common_truncation(level3):
    """Test if fractions are summed over an invariant ideal."""
    a3 = level3.weierstrass.gen("a3")
    assert common_truncation([ChromaticFraction(a3, 2, 1), ChromaticFraction(a3, 1, 1)]) == (2, 2)
    assert common_truncation([ChromaticFraction(a3, 3, 5)]) == (3, 8)
    with pytest.raises(IncompatibleTruncationError):
        common_truncation([ChromaticFraction(a3, 2, 1, (2, 1))])


def test_mixed_weight_fractions(level3):
    """Test if fractions of different weights are rejected."""
    ring = level3.weierstrass
    fractions = [ChromaticFraction(ring.gen("a3"), 1, 1), ChromaticFraction(ring.gen("a1"), 1, 1)]
    with pytest.raises(MixedWeightError):
        verify_cocycle(fractions)


@pytest.mark.slow
def test_delta_cocycle(level3):
    """Test if Delta/(8 v1^2) + x0^5/(2 v1^5) + a3(a4 + a2^2)^2/(2 v1) is a cocycle."""
    x0, _, x2 = x_generators(3)
    ring = level3.weierstrass
    a2, a3, a4 = (ring.gen(n) for n in ("a2", "a3", "a4"))
    fractions = [
        ChromaticFraction(x2, 3, 2),
        ChromaticFraction(x0**5, 1, 5),
        ChromaticFraction(a3 * (a4 + a2**2) ** 2, 1, 1),
    ]
    assert verify_cocycle(fractions)


@pytest.mark.parametrize(*K_BOUNDS)
def test_k_bound(j, expected):
    """Test if k(j) is calculated correctly."""
    assert k_bound(j) == expected


@pytest.mark.parametrize(*A_BOUNDS)
def test_a_bound(i, expected):
    """Test if a(i) is calculated correctly."""
    assert a_bound(i) == expected


def test_psi_divisibility():
    """Test if the 2-divisibility of 3^t - 1 matches k(t)."""
    assert all(psi_divisibility(t) == k_bound(t) for t in range(1, 65))


def test_m11_bound():
    """Test the v1-divisibility of powers of a3."""
    assert [m11_bound(3, n) for n in range(4)] == [1, 2, 6, 12]
    assert [m11_bound(5, n) for n in range(4)] == [1, 2, 8, 16]


def test_sphere_table():
    """Test if the sphere table holds a3^4/(8 v1^2) but not a3^4/(8 v1^4)."""
    table = beta_table("sphere", 4, 8, 4)
    index = BetaIndex(BetaFamily.SPHERE, 1, 2, 2, 3)
    assert index in table
    assert str(index) == "a3^4/(8*v1^2)"
    assert BetaIndex(BetaFamily.SPHERE, 1, 2, 4, 3) not in table


def test_q3_matches_sphere():
    """Test if the Q(3) table equals the sphere table."""
    q3 = beta_table(BetaFamily.Q3, 8, 12, 5)
    sphere = beta_table(BetaFamily.SPHERE, 8, 12, 5)
    assert compare_beta_tables(q3, sphere) == (set(), set())


def test_q5_table():
    """Test if Q(5) only carries k = 1 and reaches v1^8 on a3^4."""
    table = beta_table("q5", 4, 10, 3)
    assert BetaIndex(BetaFamily.Q5, 1, 2, 8, 1) in table
    assert BetaIndex(BetaFamily.Q5, 1, 2, 9, 1) not in table
    assert all(index.k == 1 for index in table)


def test_beta_family():
    """Test family names and parsing."""
    assert BetaFamily.from_string("Q3") == BetaFamily.Q3
    assert BetaFamily.Q5.to_name() == "Q(5)"
    with pytest.raises(ValueError, match="Valid families are"):
        BetaFamily.from_string("bogus")
    with pytest.raises(ValueError):
        beta_table("q3", 0, 1, 1)


def test_bss_differentials():
    """Test the first v1-Bockstein differentials at level 3."""
    rules = bss_differentials(3, 1, 2)
    assert rules == (
        BssRule(3, "d1", 1, 1, "gamma", "h2"),
        BssRule(3, "d2", 2, 2, "gamma", "a3 h1"),
        BssRule(3, "d6", 4, 6, "b1", "a3'^2"),
    )
    assert str(rules[0]) == "d1(a3^1/v1^j) = h2/v1^(j-1)"


def test_unit_family():
    """Test if 1/(2^k v1^j) is listed exactly for k ≤ k(j)."""
    table = beta_table("sphere", 4, 4, 4)
    index = BetaIndex(BetaFamily.SPHERE, 0, -1, 2, 3)
    assert index in table
    assert index.is_unit
    assert index.power == 0
    assert str(index) == "1/(8*v1^2)"
    assert BetaIndex(BetaFamily.SPHERE, 0, -1, 1, 2) not in table
    assert BetaIndex(BetaFamily.SPHERE, 0, -1, 4, 4) in table
    units = {index for index in beta_table("q5", 4, 6, 3) if index.is_unit}
    assert units == {BetaIndex(BetaFamily.Q5, 0, -1, j, 1) for j in range(1, 7)}


WITNESS_ROWS = [
    "row",
    [
        0,
        1,
        2,
        3,
        4,
        pytest.param(5, marks=pytest.mark.slow),
        pytest.param(6, marks=pytest.mark.slow),
        pytest.param(7, marks=pytest.mark.slow),
        pytest.param(8, marks=pytest.mark.slow),
        pytest.param(9, marks=pytest.mark.slow),
    ],
]


def test_load_witnesses():
    """Test if the stored witnesses cover every case and index the Q(3) table."""
    witnesses = load_witnesses()
    assert len(witnesses) == 10
    assert {witness.case for witness in witnesses} == set(WitnessCase)
    table = beta_table(BetaFamily.Q3, 16, 8, 4)
    assert all(witness.index in table for witness in witnesses)
    delta = next(w for w in witnesses if w.case == WitnessCase.K3_N2)
    assert len(delta.corrections) == 2
    assert str(delta.index) == "a3^4/(8*v1^2)"


def test_load_witnesses_rejects_wrong_numerator(tmp_path):
    """Test if a leading numerator not reducing to a power of a3 is rejected."""
    path = tmp_path / "witnesses.csv"
    path.write_text("case,m,n,j,k,leading,corrections\nk1,1,0,1,1,a1*a2:1:1,\n", encoding="utf-8")
    with pytest.raises(VerificationError, match="modulo"):
        load_witnesses(path=path)
    path.write_text("case,m,n,j,k,leading,corrections\nk1,1,0,1,1,x0:2:1,\n", encoding="utf-8")
    with pytest.raises(VerificationError, match="denominator"):
        load_witnesses(path=path)


@pytest.mark.parametrize(*WITNESS_ROWS)
def test_certify_witness(row):
    """Test if every stored witness sums to a cocycle."""
    witness = load_witnesses()[row]
    assert witness.certify(), str(witness)


def test_witness_case():
    """Test witness case names and parsing."""
    assert WitnessCase.from_string("K3ODD") == WitnessCase.K3_ODD
    assert WitnessCase.K2.to_name() == "k = 2"
    with pytest.raises(ValueError, match="Valid cases are"):
        WitnessCase.from_string("k4")


def test_parse_witness_fraction(level3):
    """Test if x0, x1 and x2 are expanded in the witness numerators."""
    x0, _, _ = x_generators(3)
    fraction = parse_witness_fraction("x0^3:1:5")
    assert fraction == ChromaticFraction(x0**3, 1, 5)
    assert parse_witness_fraction("1:3:4").numerator == level3.weierstrass.one()


def test_search_without_corrections():
    """Test if x0/(2 v1) needs no correction."""
    x0, _, _ = x_generators(3)
    assert search_corrections(ChromaticFraction(x0, 1, 1)) == ()


def test_correction_candidates(level3):
    """Test the candidate corrections of Delta/(8 v1^2)."""
    x0, _, x2 = x_generators(3)
    ring = level3.weierstrass
    a2, a3, a4 = (ring.gen(n) for n in ("a2", "a3", "a4"))
    candidates = correction_candidates(ChromaticFraction(x2, 3, 2))
    assert len(candidates) == 4
    assert ChromaticFraction(x0**5, 1, 5) in candidates
    assert ChromaticFraction(a3 * (a4 + a2**2) ** 2, 1, 1) in candidates
    assert correction_candidates(ChromaticFraction(x0, 1, 1)) == []
    with pytest.raises(MixedWeightError):
        correction_candidates(ChromaticFraction(a3 + ring.gen("a1"), 1, 1))


@pytest.mark.slow
def test_search_delta_corrections():
    """Test if the search finds the two corrections of Delta/(8 v1^2)."""
    _, _, x2 = x_generators(3)
    leading = ChromaticFraction(x2, 3, 2)
    assert search_corrections(leading, max_terms=0) is None
    corrections = search_corrections(leading)
    assert corrections is not None
    assert len(corrections) == 2
    assert verify_cocycle([leading, *corrections])


def test_in_f2_span(level3):
    """Test membership in the span over the field with two elements."""
    ring = level3.weierstrass
    a1, a3 = ring.gen("a1"), ring.gen("a3")
    assert in_f2_span(a1 + a3, [a1, a3])
    assert in_f2_span(3 * a1, [a1 + a3, a3])
    assert in_f2_span(2 * a1, [])
    assert not in_f2_span(a1, [a3])
    assert not in_f2_span(a1, [])


def test_obstruction_killed():
    """Test if the obstruction to halving x0/(2 v1) is the target of d2."""
    x0, _, _ = x_generators(3)
    morphisms = level_algebroid(3).morphisms
    result = obstruction([ChromaticFraction(x0, 1, 1)], m_max=1, n_max=1)
    assert result is not None
    assert (result.component, result.order, result.killed) == ("gamma", 2, True)
    assert result.head == morphisms.parse("a3*s")
    assert str(result).endswith(", killed")


def test_obstruction_not_killed():
    """Test if a3^3 h1/v1^2 is not a v1-Bockstein target."""
    x0, _, _ = x_generators(3)
    morphisms = level_algebroid(3).morphisms
    result = obstruction([ChromaticFraction(x0**3, 1, 1)], m_max=3, n_max=1)
    assert result is not None
    assert result.head == morphisms.parse("a3^3*s")
    assert not result.killed


def test_obstruction_of_units(level3):
    """Test if 1/(2 v1) cannot be halved while 1/(2 v1^2) can."""
    one = level3.weierstrass.one()
    morphisms = level_algebroid(3).morphisms
    result = obstruction([ChromaticFraction(one, 1, 1)], m_max=1, n_max=1)
    assert result is not None
    assert (result.component, result.head, result.killed) == ("gamma", morphisms.gen("s"), False)
    assert obstruction([ChromaticFraction(one, 1, 2)], m_max=1, n_max=1) is None


def test_obstruction_of_non_cocycle(level3):
    """Test if a non-cocycle has no obstruction."""
    with pytest.raises(VerificationError, match="not a cocycle"):
        obstruction([ChromaticFraction(level3.weierstrass.gen("a3"), 2, 1)], m_max=1, n_max=1)


@pytest.mark.parametrize("ell", [3, 5])
def test_known_ext_bidegrees(ell):
    """Test if d1 and the relations are homogeneous."""
    assert KnownExtData(ell).check_bidegrees()


def test_known_ext_d1():
    """Test if d1(g a3^2) = h21^4 u^6 at level 5."""
    data = KnownExtData(5)
    ring = data.level_ring
    assert data.d1_image(1, 2) == ring.gen("h21") ** 4 * ring.gen("u") ** 6
    assert data.bidegree(data.gamma_ring.gen("g")) == (4, 24)
