"""2-adic leading terms of the total differential and the divided β-family."""
from __future__ import annotations

from collections.abc import Iterable, Sequence
import csv
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
import logging
from math import comb
from pathlib import Path
from typing import Self

from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from .const import DEFAULT_MAX_M, DEFAULT_MAX_N, V1
from .exact_algebra import (
    CoefficientRing,
    GradedRing,
    PolyElement,
    RingMap,
    eval_ring_map,
    nu2,
    reduce_truncated,
    truncated_power,
    truncated_reducer,
)
from .exceptions import IncompatibleTruncationError, MixedWeightError, VerificationError
from .level_maps import FIXTURES, TotalDifferential, check_level, level_algebroid, level_data
from .weierstrass import WeierstrassCurve

_LOGGER = logging.getLogger(__name__)

COMPONENTS = ("gamma", "b1", "a")
D_COMPONENTS = ("gamma", "b1")
DEFAULT_V1_BOUND = 16


class BetaFamily(StrEnum):
    """Index sets of divided β-family elements."""

    SPHERE = "sphere"
    Q3 = "q3"
    Q5 = "q5"

    def to_name(self) -> str:
        """Return the title of the family."""
        return {"sphere": "Sphere", "q3": "Q(3)", "q5": "Q(5)"}[self.value]

    @classmethod
    def from_string(cls, string: str) -> Self:
        """Return the family from string."""
        if string.lower() in [family.value for family in cls]:
            return cls(string.lower())
        raise ValueError(
            f"Unknown family: {string}. Valid families are: "
            + ", ".join(family.value for family in cls)
        )


def x_generators(ell: int = 3) -> tuple[PolyElement, PolyElement, PolyElement]:
    """Return x₀ = a3 + a1a2, x₁ = x₀² + a1²a4 + a1²a2² and x₂ = Δ in A."""
    ring = level_data(ell).weierstrass
    a1, a2, a3, a4 = (ring.gen(n) for n in ("a1", "a2", "a3", "a4"))
    x0 = a3 + a1 * a2
    x1 = x0**2 + a1**2 * a4 + a1**2 * a2**2
    x2 = WeierstrassCurve.universal(ring).discriminant
    for x, expected in ((x0, a3), (x1, a3**2), (x2, a3**4)):
        if reduce_truncated(x - expected, 1, 1) != 0:
            raise VerificationError(f"{x} is not congruent to {expected} modulo (2, v1)")
    return x0, x1, x2


def is_invariant_ideal(k: int, j: int) -> bool:
    """Return True if (2^k, v1^j) is carried into itself by η_R(v1) = v1 + 2s."""
    if k <= 1:
        return True
    return all(nu2(comb(j, i)) + i >= k for i in range(1, j + 1))


def minimal_invariant_exponent(k: int, j: int) -> int:
    """Return the least J ≥ j with (2^k, v1^J) invariant."""
    while not is_invariant_ideal(k, j):
        j += 1
    return j


def _component_maps(ell: int) -> dict[str, tuple[RingMap, RingMap]]:
    data, algebroid = level_data(ell), level_algebroid(ell)
    return {
        "gamma": (algebroid.eta_right, algebroid.eta_left),
        "b1": (data.q, data.f),
    }


def _component_ring(name: str, ell: int) -> GradedRing:
    if name == "gamma":
        return level_algebroid(ell).morphisms
    if name == "b1":
        return level_data(ell).b1
    return level_data(ell).weierstrass


def d_chromatic(
    x: PolyElement,
    k: int,
    j: int,
    ell: int = 3,
    power: int = 1,
    components: Sequence[str] = COMPONENTS,
) -> TotalDifferential:
    """Return D_tot(x^power) with every component reduced modulo (2^k, v1^j)."""
    check_level(ell)
    if not is_invariant_ideal(k, j):
        _LOGGER.warning("(2^%s, v1^%s) is not an invariant ideal", k, j)
    data = level_data(ell)
    x = data.weierstrass.embed(x)
    weight = x.homogeneous_weight() or 0
    reducer = truncated_reducer(k, j)
    maps = _component_maps(ell)
    values = {name: _component_ring(name, ell).zero() for name in COMPONENTS}
    for name in components:
        if name == "a":
            factor = Fraction(ell) ** (weight * power) - 1
            values[name] = reduce_truncated(factor * truncated_power(x, power, k, j), k, j)
            continue
        right, left = maps[name]
        d0 = truncated_power(eval_ring_map(right, x, reducer), power, k, j)
        d1 = truncated_power(eval_ring_map(left, x, reducer), power, k, j)
        values[name] = reducer(d0 - d1)
        _LOGGER.debug("D component %s has %s terms modulo (2^%s, v1^%s)", name, len(values[name]), k, j)
    return TotalDifferential(**values)


@dataclass(frozen=True)
class LeadingTerm:
    """The term 2^level·v1^v1_exponent·head with head over 𝔽₂."""

    level: int
    v1_exponent: int
    head: PolyElement

    def __str__(self) -> str:
        """Return e.g. ``2*v1^0*(t + r*s)``."""
        return f"{2**self.level}*v1^{self.v1_exponent}*({self.head})"


@dataclass
class LeadingExpansion:
    """2-adic digit expansion of one component, truncated at (2^depth, v1^bound)."""

    component: str
    depth: int
    v1_bound: int
    digits: dict[tuple[int, int], PolyElement] = field(default_factory=dict)

    @classmethod
    def from_element(cls, component: str, x: PolyElement, depth: int, v1_bound: int, v1: str = V1) -> LeadingExpansion:
        """Split the reduced element into heads indexed by (2-level, v1 exponent)."""
        ring = x.ring
        index = ring.generators.index(v1)
        modulus = 2**depth
        collected: dict[tuple[int, int], dict[tuple[int, ...], int]] = {}
        for exponents, value in reduce_truncated(x, depth, v1_bound, v1).terms():
            residue = int(value) % modulus
            stripped = exponents[:index] + (0,) + exponents[index + 1 :]
            for level in range(depth):
                if residue >> level & 1:
                    collected.setdefault((level, exponents[index]), {})[stripped] = 1
        digits = {key: ring.from_terms(terms) for key, terms in collected.items()}
        return cls(component, depth, v1_bound, digits)

    def lifted(self, ring: GradedRing, v1: str = V1) -> PolyElement:
        """Return Σ 2^level·v1^j·head, the reduced element the digits were read from."""
        v = ring.gen(v1)
        total = ring.zero()
        for (level, j), head in self.digits.items():
            total = total + 2**level * v**j * head
        return total

    @property
    def terms(self) -> list[LeadingTerm]:
        """Return the lowest v1 term on every 2-level."""
        found = []
        for level in range(self.depth):
            exponents = sorted(j for lvl, j in self.digits if lvl == level)
            if exponents:
                found.append(LeadingTerm(level, exponents[0], self.digits[(level, exponents[0])]))
        return found

    def leading(self, level: int) -> LeadingTerm | None:
        """Return the leading term on one 2-level."""
        for term in self.terms:
            if term.level == level:
                return term
        return None

    def __str__(self) -> str:
        """Return the ordered sum of leading terms."""
        return " + ".join(str(term) for term in self.terms) or "0"


def leading_expansion(
    x: PolyElement,
    ell: int = 3,
    depth: int = 2,
    v1_bound: int = DEFAULT_V1_BOUND,
    power: int = 1,
    components: Sequence[str] = D_COMPONENTS,
) -> dict[str, LeadingExpansion]:
    """Return the leading 2-adic terms of each component of D(x^power)."""
    if depth < 1:
        raise ValueError(f"Expansion depth must be positive, got {depth}")
    differential = d_chromatic(x, depth, v1_bound, ell, power, components)
    return {
        name: LeadingExpansion.from_element(name, getattr(differential, name), depth, v1_bound)
        for name in components
    }


def module_base(
    x: PolyElement, component: str, ell: int = 3, depth: int = 1, v1_bound: int = 1
) -> PolyElement:
    """Return d1(x) in a component's module structure, modulo (2^depth, v1^v1_bound)."""
    left = _component_maps(ell)[component][1]
    return reduce_truncated(left(level_data(ell).weierstrass.embed(x)), depth, v1_bound)


def _predicted(expansion: LeadingExpansion, value: PolyElement) -> list[LeadingTerm]:
    return LeadingExpansion.from_element(
        expansion.component, value, expansion.depth, expansion.v1_bound
    ).terms


def square_rule(expansion: LeadingExpansion, base: PolyElement) -> list[LeadingTerm]:
    """Predict the leading terms of D(x²) = 2·d1(x)·D(x) + D(x)² from those of D(x).

    ``base`` is d1(x) reduced modulo the same (2^depth, v1^v1_bound) as the expansion,
    so the carry of the doubled term and of the squared digits reaches every 2-level.
    """
    reducer = truncated_reducer(expansion.depth, expansion.v1_bound)
    d = expansion.lifted(base.ring)
    return _predicted(expansion, reducer(2 * base * d) + reducer(d * d))


def odd_power_rule(expansion: LeadingExpansion, base: PolyElement, m: int) -> list[LeadingTerm]:
    """Predict the leading terms of D(x^m), m odd, as Σ C(m, i)·d1(x)^(m−i)·D(x)^i."""
    if m % 2 == 0:
        raise ValueError(f"The odd power rule needs an odd exponent, got {m}")
    reducer = truncated_reducer(expansion.depth, expansion.v1_bound)
    d = expansion.lifted(base.ring)
    total = base.ring.zero()
    d_power = base.ring.one()
    for i in range(1, m + 1):
        d_power = reducer(d_power * d)
        if d_power.is_zero:
            break
        cofactor = truncated_power(base, m - i, expansion.depth, expansion.v1_bound)
        total = total + reducer(comb(m, i) * cofactor * d_power)
    return _predicted(expansion, total)


def rule_agrees(predicted: Iterable[LeadingTerm], direct: LeadingExpansion) -> bool:
    """Return True if the predicted terms are the leading terms of every 2-level."""
    predicted = [term for term in predicted if not term.head.is_zero]
    if predicted != direct.terms:
        _LOGGER.debug("Predicted %s, found %s", " + ".join(map(str, predicted)), direct)
        return False
    return True


def leibniz_identities(x: PolyElement, y: PolyElement, ell: int = 3) -> dict[str, bool]:
    """Check D(xy) = D(x)d0(y) + d1(x)D(y) and D(x²) = 2d1(x)D(x) + D(x)² per component."""
    ring = level_data(ell).weierstrass
    x, y = ring.embed(x), ring.embed(y)
    results = {}
    for name, (right, left) in _component_maps(ell).items():
        dx, dy = right(x) - left(x), right(y) - left(y)
        dxy = right(x * y) - left(x * y)
        dxx = right(x * x) - left(x * x)
        results[f"{name}: product"] = dxy == dx * right(y) + left(x) * dy
        results[f"{name}: square"] = dxx == 2 * left(x) * dx + dx**2
    return results


@dataclass(frozen=True)
class ChromaticFraction:
    """The element numerator / (2^k v1^j) of M₀²A."""

    numerator: PolyElement
    k: int
    j: int
    truncation: tuple[int, int] | None = None

    @classmethod
    def parse(cls, ring: GradedRing, text: str, k: int, j: int) -> ChromaticFraction:
        """Build a fraction from a numerator in text form."""
        return cls(ring.parse(text), k, j)

    @property
    def weight(self) -> int | None:
        """Return the weight of the fraction."""
        weight = self.numerator.homogeneous_weight()
        return None if weight is None else weight - self.j

    def normalized(self) -> ChromaticFraction:
        """Reduce the numerator modulo (2^k, v1^j)."""
        return ChromaticFraction(
            reduce_truncated(self.numerator, self.k, self.j), self.k, self.j, self.truncation
        )

    def __str__(self) -> str:
        """Return e.g. ``(a3)/(2*v1^1)``."""
        return f"({self.numerator})/({2**self.k}*v1^{self.j})"


def common_truncation(fractions: Sequence[ChromaticFraction]) -> tuple[int, int]:
    """Return the invariant ideal (2^K, v1^J) over which the fractions are summed."""
    if not fractions:
        return (1, 1)
    rings = {f.numerator.ring for f in fractions}
    if len(rings) > 1:
        raise IncompatibleTruncationError("Fractions live in different rings")
    k = max(f.k for f in fractions)
    j = max(f.j for f in fractions)
    explicit = {f.truncation for f in fractions if f.truncation is not None}
    if len(explicit) > 1:
        raise IncompatibleTruncationError(f"Fractions carry different truncations {sorted(explicit)}")
    if explicit:
        (k_given, j_given), = explicit
        if k_given < k or j_given < j or not is_invariant_ideal(k_given, j_given):
            raise IncompatibleTruncationError(
                f"(2^{k_given}, v1^{j_given}) does not cover the fractions or is not invariant"
            )
        return k_given, j_given
    return k, minimal_invariant_exponent(k, j)


def total_numerator(fractions: Sequence[ChromaticFraction], k: int, j: int) -> PolyElement:
    """Return N with Σ p_i/(2^k_i v1^j_i) = N/(2^k v1^j)."""
    ring = fractions[0].numerator.ring
    v1 = ring.gen(V1)
    total = ring.zero()
    for fraction in fractions:
        total = total + 2 ** (k - fraction.k) * v1 ** (j - fraction.j) * fraction.numerator
    return reduce_truncated(total, k, j)


def reduced_total_differential(
    fractions: Sequence[ChromaticFraction], ell: int = 3
) -> tuple[TotalDifferential, tuple[int, int]]:
    """Return the numerator of D_tot of the sum and the ideal it is reduced by."""
    fractions = [
        ChromaticFraction(level_data(ell).weierstrass.embed(f.numerator), f.k, f.j, f.truncation)
        for f in fractions
        if not f.numerator.is_zero
    ]
    if not fractions:
        zero = {name: _component_ring(name, ell).zero() for name in COMPONENTS}
        return TotalDifferential(**zero), (1, 1)
    weights = {f.weight for f in fractions}
    if len(weights) > 1:
        raise MixedWeightError(f"Fractions of different weights {sorted(weights)}")
    k, j = common_truncation(fractions)
    numerator = total_numerator(fractions, k, j)
    differential = d_chromatic(numerator, k, j, ell, components=D_COMPONENTS)
    weight = weights.pop()
    factor = Fraction(ell) ** weight - 1
    a = reduce_truncated(factor * numerator, k, j)
    _LOGGER.debug("Summed %s fractions over (2^%s, v1^%s)", len(fractions), k, j)
    return TotalDifferential(differential.gamma, differential.b1, a), (k, j)


def verify_cocycle(fractions: Sequence[ChromaticFraction], ell: int = 3) -> bool:
    """Return True if the sum of the fractions is a cocycle of M₀²C_tot."""
    differential, truncation = reduced_total_differential(fractions, ell)
    _LOGGER.info("D_tot modulo (2^%s, v1^%s) vanishes: %s", *truncation, differential.is_zero)
    return differential.is_zero


def k_bound(j: int) -> int:
    """Return k(j): 1 for odd j, ν₂(j) + 2 for even j."""
    return 1 if j % 2 else nu2(j) + 2


def a_bound(i: int) -> int:
    """Return a(i): 1, 2 and 3·2^(i−1) for i = 0, 1 and i ≥ 2; 0 below."""
    if i < 0:
        return 0
    if i < 2:
        return i + 1
    return 3 * 2 ** (i - 1)


def psi_divisibility(t: int, ell: int = 3) -> int:
    """Return ν₂(ℓ^t − 1)."""
    return nu2(ell**t - 1)


def m11_bound(ell: int, n: int) -> int:
    """Return the v1-divisibility of a3^(m2^n) read off the v1-Bockstein differential lengths."""
    check_level(ell)
    if n == 0:
        return 1
    if n == 1:
        return 2
    return 3 * 2 ** (n - 1) if ell == 3 else 2 ** (n + 1)


@dataclass(frozen=True, order=True)
class BetaIndex:
    """Index (m2^n, j, k) of a3^(m2^n)/(2^k v1^j)."""

    family: BetaFamily
    m: int
    n: int
    j: int
    k: int

    @property
    def power(self) -> int:
        """Return m·2^n, 0 for the unit family."""
        return 0 if self.is_unit else self.m * 2**self.n

    @property
    def is_unit(self) -> bool:
        """Return True for 1/(2^k v1^j), stored as m = 0, n = −1."""
        return self.m == 0

    def key(self) -> tuple[int, int, int, int]:
        """Return the family-free index."""
        return (self.m, self.n, self.j, self.k)

    def __str__(self) -> str:
        """Return e.g. ``a3^4/(8*v1^2)`` or ``1/(4*v1^2)``."""
        numerator = "1" if self.is_unit else f"a3^{self.power}"
        return f"{numerator}/({2**self.k}*v1^{self.j})"


def _sphere_admissible(n: int, j: int, k: int) -> bool:
    if k > k_bound(j):
        return False
    bound = a_bound(1) if (k, n) == (3, 2) else a_bound(n - k + 1)
    return j <= bound


def _q3_admissible(n: int, j: int, k: int) -> bool:
    if k > psi_divisibility(j):
        return False
    if k == 1:
        return j <= m11_bound(3, n)
    if k == 2:
        return j <= a_bound(n - 1)
    bound = a_bound(n - k + 1)
    if (k, n) == (3, 2):
        bound = max(bound, 2)
    return j <= bound


def beta_table(family: BetaFamily | str, i_max: int, j_max: int, k_max: int) -> set[BetaIndex]:
    """Return the admissible indices with m2^n ≤ i_max, j ≤ j_max and k ≤ k_max.

    The elements 1/(2^k v1^j) with k ≤ k(j), or 1/v1^j for Q(5), are included as m = 0, n = −1.
    """
    family = family if isinstance(family, BetaFamily) else BetaFamily.from_string(family)
    if min(i_max, j_max, k_max) < 1:
        raise ValueError("Table bounds must be positive")
    found = set()
    for j in range(1, j_max + 1):
        top = 1 if family == BetaFamily.Q5 else min(k_max, k_bound(j))
        found.update(BetaIndex(family, 0, -1, j, k) for k in range(1, top + 1))
    for m in range(1, i_max + 1, 2):
        n = 0
        while m * 2**n <= i_max:
            for j in range(1, j_max + 1):
                if family == BetaFamily.Q5:
                    if j <= m11_bound(5, n):
                        found.add(BetaIndex(family, m, n, j, 1))
                    continue
                for k in range(1, k_max + 1):
                    admissible = (
                        _sphere_admissible(n, j, k)
                        if family == BetaFamily.SPHERE
                        else _q3_admissible(n, j, k)
                    )
                    if admissible:
                        found.add(BetaIndex(family, m, n, j, k))
            n += 1
    _LOGGER.debug("%s beta table has %s indices", family.to_name(), len(found))
    return found


def compare_beta_tables(
    first: Iterable[BetaIndex], second: Iterable[BetaIndex]
) -> tuple[set[tuple[int, int, int, int]], set[tuple[int, int, int, int]]]:
    """Return the index keys found only in the first and only in the second table."""
    left = {index.key() for index in first}
    right = {index.key() for index in second}
    return left - right, right - left


@dataclass(frozen=True)
class BssRule:
    """A v1-Bockstein differential from the 0-line to the 1-line."""

    ell: int
    family: str
    source: int
    length: int
    component: str
    target: str
    head: PolyElement | None = field(default=None, compare=False, repr=False)

    def to_row(self) -> dict[str, object]:
        """Return a table row."""
        return {
            "ell": self.ell,
            "family": self.family,
            "source": f"a3^{self.source}",
            "length": self.length,
            "component": self.component,
            "target": self.target,
        }

    def __str__(self) -> str:
        """Return e.g. ``d2(a3^2/v1^j) = a3 h1/v1^(j-2)``."""
        return f"{self.family}(a3^{self.source}/v1^j) = {self.target}/v1^(j-{self.length})"


def _power_name(name: str, exponent: int) -> str:
    if exponent == 0:
        return ""
    return name if exponent == 1 else f"{name}^{exponent}"


def _target_name(head: PolyElement, component: str, ell: int) -> str:
    if len(head) != 1:
        return f"({head})"
    ((exponents, _),) = head.terms()
    powers = dict(zip(head.ring.names, exponents))
    if component == "gamma":
        extra = {n: e for n, e in powers.items() if e and n not in ("a3", "s")}
        h = {2: "h2", 1: "h1"}.get(powers.get("s", 0))
        if h and not extra:
            return " ".join(p for p in (_power_name("a3", powers.get("a3", 0)), h) if p)
        return str(head)
    if ell == 3 and set(n for n, e in powers.items() if e) <= {"a3"}:
        return _power_name("a3'", powers.get("a3", 0)) or "1"
    if ell == 5 and set(n for n, e in powers.items() if e) <= {"u"}:
        return _power_name("u", powers.get("u", 0)) or "1"
    return str(head)


def _bss_rule(ell: int, family: str, source: int, x: PolyElement, power: int, bound: int) -> BssRule | None:
    differential = d_chromatic(x, 1, bound + 1, ell, power, D_COMPONENTS)
    best = None
    for component in D_COMPONENTS:
        expansion = LeadingExpansion.from_element(component, getattr(differential, component), 1, bound + 1)
        term = expansion.leading(0)
        if term is not None and (best is None or term.v1_exponent < best[1].v1_exponent):
            best = (component, term)
    if best is None:
        return None
    component, term = best
    return BssRule(
        ell, family, source, term.v1_exponent, component, _target_name(term.head, component, ell), term.head
    )


@lru_cache(maxsize=None)
def bss_differentials(ell: int, m_max: int = 3, n_max: int = 3) -> tuple[BssRule, ...]:
    """Return the v1-Bockstein differentials generated from x₀^m, x₁^m and x₂^(m2^(n−2))."""
    check_level(ell)
    x0, x1, x2 = x_generators(ell)
    rules = []
    for m in range(1, m_max + 1, 2):
        for family, x, source, bound in (("d1", x0, m, 1), ("d2", x1, 2 * m, 2)):
            rule = _bss_rule(ell, family, source, x, m, bound)
            if rule is not None:
                rules.append(rule)
        for n in range(2, n_max + 1):
            length = m11_bound(ell, n)
            rule = _bss_rule(ell, f"d{length}", m * 2**n, x2, m * 2 ** (n - 2), length)
            if rule is not None:
                rules.append(rule)
    _LOGGER.info("Computed %s v1-Bockstein differentials for level %s", len(rules), ell)
    return tuple(sorted(rules, key=lambda r: (r.length, r.source)))


WITNESSES_FILE = FIXTURES / "beta_witnesses.csv"
DEFAULT_CORRECTION_SLACK = 4
DEFAULT_CORRECTION_TERMS = 2
WITNESS_GENERATORS = (("x0", 3), ("x1", 6), ("x2", 12))


class WitnessCase(StrEnum):
    """Cases of the 2-divisibility argument a stored witness certifies."""

    UNIT = "unit"
    K1 = "k1"
    K2 = "k2"
    K3_N2 = "k3n2"
    K3_EVEN = "k3even"
    K3_ODD = "k3odd"

    def to_name(self) -> str:
        """Return a short description."""
        return {
            "unit": "1/(2^k v1^j)",
            "k1": "k = 1",
            "k2": "k = 2",
            "k3n2": "k = 3, n = 2",
            "k3even": "k ≥ 3, j even",
            "k3odd": "k ≥ 3, j odd",
        }[self.value]

    @classmethod
    def from_string(cls, string: str) -> Self:
        """Return the case from string."""
        if string.lower() in [case.value for case in cls]:
            return cls(string.lower())
        raise ValueError(
            f"Unknown witness case: {string}. Valid cases are: "
            + ", ".join(case.value for case in cls)
        )


@dataclass(frozen=True)
class BetaWitness:
    """A leading fraction and the smaller-denominator corrections making it a cocycle."""

    case: WitnessCase
    index: BetaIndex
    leading: ChromaticFraction
    corrections: tuple[ChromaticFraction, ...] = ()

    @property
    def fractions(self) -> list[ChromaticFraction]:
        """Return the leading fraction followed by the corrections."""
        return [self.leading, *self.corrections]

    def certify(self, ell: int = 3) -> bool:
        """Return True if the sum is a cocycle."""
        return verify_cocycle(self.fractions, ell)

    def __str__(self) -> str:
        return " + ".join(str(fraction) for fraction in self.fractions)


def witness_ring(ell: int = 3) -> tuple[GradedRing, RingMap]:
    """Return A with x₀, x₁, x₂ adjoined and the map substituting their definitions."""
    ring = level_data(ell).weierstrass
    names, weights = zip(*WITNESS_GENERATORS)
    extended = ring.extend(names, weights, name="A[x0,x1,x2]")
    images = {name: ring.gen(name) for name in ring.names}
    images.update(zip(names, x_generators(ell)))
    return extended, RingMap("expand", extended, ring, images)


def parse_witness_fraction(text: str, ell: int = 3) -> ChromaticFraction:
    """Parse ``NUMERATOR:K:J`` with a numerator in a1, ..., a6, x0, x1 and x2."""
    ring, expand = witness_ring(ell)
    numerator, k, j = text.rsplit(":", 2)
    return ChromaticFraction(expand(ring.parse(numerator)), int(k), int(j))


def load_witnesses(ell: int = 3, path: Path = WITNESSES_FILE) -> list[BetaWitness]:
    """Return the stored witnesses, checking each leading numerator against its index."""
    a3 = level_data(ell).weierstrass.gen("a3")
    witnesses = []
    with path.open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            index = BetaIndex(
                BetaFamily.Q3, int(row["m"]), int(row["n"]), int(row["j"]), int(row["k"])
            )
            leading = parse_witness_fraction(row["leading"], ell)
            if (leading.k, leading.j) != (index.k, index.j):
                raise VerificationError(f"{leading} does not have the denominator of {index}")
            if reduce_truncated(leading.numerator - a3**index.power, 1, 1) != 0:
                raise VerificationError(f"{leading} does not reduce to {index} modulo (2, v1)")
            corrections = tuple(
                parse_witness_fraction(text, ell) for text in row["corrections"].split(";") if text
            )
            witnesses.append(BetaWitness(WitnessCase.from_string(row["case"]), index, leading, corrections))
    _LOGGER.debug("Loaded %s witnesses from %s", len(witnesses), path)
    return witnesses


def _smaller(fraction: ChromaticFraction, leading: ChromaticFraction) -> bool:
    return fraction.k < leading.k or (fraction.k == leading.k and fraction.j < leading.j)


def correction_candidates(
    leading: ChromaticFraction, ell: int = 3, slack: int = DEFAULT_CORRECTION_SLACK
) -> list[ChromaticFraction]:
    """Return the fractions x₀^p/(2v1^j) and a3^q(a4 + a2²)²/(2v1^j) of the leading weight.

    The v1 exponent runs up to that of the leading fraction plus ``slack``.
    """
    weight = leading.weight
    if weight is None:
        raise MixedWeightError(f"{leading} is not homogeneous")
    ring = level_data(ell).weierstrass
    x0, _, _ = x_generators(ell)
    a2, a3, a4 = (ring.gen(n) for n in ("a2", "a3", "a4"))
    kills_s4 = (a4 + a2**2) ** 2
    candidates = []
    for j in range(1, leading.j + slack + 1):
        total = weight + j
        if total > 0 and total % 3 == 0:
            candidates.append(ChromaticFraction(x0 ** (total // 3), 1, j))
        if total >= 8 and (total - 8) % 3 == 0:
            candidates.append(ChromaticFraction(a3 ** ((total - 8) // 3) * kills_s4, 1, j))
    return [fraction for fraction in candidates if _smaller(fraction, leading)]


def search_corrections(
    leading: ChromaticFraction,
    ell: int = 3,
    max_terms: int = DEFAULT_CORRECTION_TERMS,
    slack: int = DEFAULT_CORRECTION_SLACK,
) -> tuple[ChromaticFraction, ...] | None:
    """Return the fewest candidate corrections turning the leading fraction into a cocycle."""
    candidates = correction_candidates(leading, ell, slack)
    for size in range(max_terms + 1):
        for corrections in combinations(candidates, size):
            if verify_cocycle([leading, *corrections], ell):
                _LOGGER.info("Found %s correction(s) for %s", size, leading)
                return corrections
    _LOGGER.info("No %s of %s candidates makes %s a cocycle", max_terms, len(candidates), leading)
    return None


def in_f2_span(x: PolyElement, basis: Sequence[PolyElement]) -> bool:
    """Return True if x is a sum of basis elements after reducing coefficients mod 2."""
    field2 = GF(2)
    monomials = sorted({e for y in (x, *basis) for e, _ in y.terms()})

    def row(y: PolyElement) -> list[int]:
        coefficients = dict(y.terms())
        return [int(coefficients.get(e, 0)) % 2 for e in monomials]

    target = row(x)
    if not any(target):
        return True
    if not basis:
        return False
    rows = [[field2(v) for v in row(y)] for y in basis]
    target = [field2(v) for v in target]
    spanned = DomainMatrix(rows, (len(rows), len(monomials)), field2).rank()
    augmented = DomainMatrix([*rows, target], (len(rows) + 1, len(monomials)), field2).rank()
    return spanned == augmented


@dataclass(frozen=True)
class Obstruction:
    """The leading term head/v1^order of ∂ of a cocycle, on one component."""

    component: str
    order: int
    head: PolyElement
    killed: bool

    def __str__(self) -> str:
        """Return e.g. ``gamma: (a3*s)/v1^2, killed``."""
        return f"{self.component}: ({self.head})/v1^{self.order}, " + ("killed" if self.killed else "not killed")


def obstruction(
    fractions: Sequence[ChromaticFraction],
    ell: int = 3,
    m_max: int = DEFAULT_MAX_M,
    n_max: int = DEFAULT_MAX_N,
) -> Obstruction | None:
    """Return the leading term of ∂ of a cocycle, the obstruction to dividing it by 2.

    The term is killed if its head lies in the 𝔽₂-span of the v1-Bockstein targets on the
    same component; the ψ-component is never killed. None means the halved sum is a cocycle.
    """
    halved = [ChromaticFraction(f.numerator, f.k + 1, f.j) for f in fractions]
    differential, (k, j) = reduced_total_differential(halved, ell)
    best = None
    for name in COMPONENTS:
        expansion = LeadingExpansion.from_element(name, getattr(differential, name), k, j)
        if any(term.level < k - 1 for term in expansion.terms):
            raise VerificationError(f"{' + '.join(map(str, fractions))} is not a cocycle")
        term = expansion.leading(k - 1)
        if term is not None and (best is None or term.v1_exponent < best[1].v1_exponent):
            best = (name, term)
    if best is None:
        return None
    name, term = best
    targets = [
        rule.head
        for rule in bss_differentials(ell, m_max, n_max)
        if rule.component == name and rule.head is not None
    ]
    killed = name != "a" and in_f2_span(term.head, targets)
    _LOGGER.debug("Obstruction %s over (2^%s, v1^%s)", term, k, j)
    return Obstruction(name, j - term.v1_exponent, term.head, killed)


EXT_BIDEGREES = {
    "a3": (0, 6),
    "h1": (1, 2),
    "h2": (1, 4),
    "g": (4, 24),
    "u": (0, 2),
    "h21": (1, 6),
}


@dataclass
class KnownExtData:
    """Mod (2, v1) cohomology of the two algebroids and the d₁ between the lines."""

    ell: int
    gamma_ring: GradedRing = field(init=False)
    level_ring: GradedRing = field(init=False)
    d1: RingMap = field(init=False)

    def __post_init__(self) -> None:
        """Build the named 𝔽₂ monomial bases and the d₁ map."""
        check_level(self.ell)
        field2 = CoefficientRing.prime_field2()
        self.gamma_ring = GradedRing.create(
            ["a3", "h1", "h2", "g"],
            [EXT_BIDEGREES[n][1] for n in ("a3", "h1", "h2", "g")],
            field2,
            invertible=["a3"],
            name="H(M20 Gamma)",
        )
        unit = "a3" if self.ell == 3 else "u"
        self.level_ring = GradedRing.create(
            [unit, "h21"], [EXT_BIDEGREES[unit][1], EXT_BIDEGREES["h21"][1]], field2,
            invertible=[unit], name=f"H(M20 Lambda1({self.ell}))",
        )
        target = self.level_ring
        image = target.gen("a3") if self.ell == 3 else target.gen("u") ** 3
        self.d1 = RingMap(
            "d1",
            self.gamma_ring,
            target,
            {"a3": image, "h1": target.zero(), "h2": target.zero(), "g": target.gen("h21") ** 4},
        )

    @property
    def relations(self) -> list[str]:
        """Return the defining relations as text."""
        return ["h2^3 = a3*h1^3", "h21^4 = g"]

    def bidegree(self, x: PolyElement) -> tuple[int, int]:
        """Return the (s, t) bidegree of a monomial."""
        ((exponents, _),) = x.terms()
        s = t = 0
        for name, e in zip(x.ring.names, exponents):
            ds, dt = EXT_BIDEGREES[name]
            s, t = s + e * ds, t + e * dt
        return s, t

    def d1_image(self, i: int, j: int) -> PolyElement:
        """Return d₁(g^i ā3^j) on the 2-line."""
        ring = self.gamma_ring
        return self.d1(ring.gen("g") ** i * ring.gen("a3") ** j)

    def check_bidegrees(self, i_max: int = 3, j_max: int = 4) -> bool:
        """Return True if d₁ and the relations are homogeneous in (s, t)."""
        if 4 * EXT_BIDEGREES["h21"][0] != EXT_BIDEGREES["g"][0]:
            return False
        if 4 * EXT_BIDEGREES["h21"][1] != EXT_BIDEGREES["g"][1]:
            return False
        h2, h1 = EXT_BIDEGREES["h2"], EXT_BIDEGREES["h1"]
        if 3 * h2[1] != EXT_BIDEGREES["a3"][1] + 3 * h1[1]:
            return False
        for i in range(i_max + 1):
            for j in range(-j_max, j_max + 1):
                ring = self.gamma_ring
                source = ring.gen("g") ** i * ring.gen("a3") ** j
                if self.bidegree(source) != self.bidegree(self.d1_image(i, j)):
                    return False
        return True
