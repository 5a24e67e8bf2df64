"""Cohomology of cyclic groups acting on graded polynomial rings."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from itertools import product
import logging
from math import lcm
from typing import Self

from sympy import Matrix
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from .exact_algebra import CoefficientRing, GradedRing, Monomial, PolyElement, RingMap, nu2
from .exceptions import AlgebraError
from .state import Report

_LOGGER = logging.getLogger(__name__)


class SummandKind(StrEnum):
    """Indecomposable summands of a cyclic-group module."""

    R = "R"
    RNEG = "Rneg"
    TAU = "Tau"
    PSI = "Psi"

    def to_name(self) -> str:
        """Return the title of the summand kind."""
        return self.value

    @classmethod
    def from_string(cls, string: str) -> Self:
        """Return the summand kind from string."""
        if string in [kind.value for kind in cls]:
            return cls(string)
        raise ValueError(
            f"Unknown summand kind: {string}. Valid kinds are: "
            + ", ".join(kind.value for kind in cls)
        )


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group ℤ^rank ⊕ ⊕ ℤ/torsion."""

    rank: int = 0
    torsion: tuple[int, ...] = ()

    @property
    def is_zero(self) -> bool:
        """Return True for the trivial group."""
        return self.rank == 0 and not self.torsion

    def __add__(self, other: AbelianGroup) -> AbelianGroup:
        """Return the direct sum."""
        return AbelianGroup(self.rank + other.rank, tuple(sorted(self.torsion + other.torsion)))

    def __str__(self) -> str:
        """Return e.g. ``Z+Z/2+Z/4``."""
        parts = ["Z"] * self.rank + [f"Z/{n}" for n in self.torsion]
        return "+".join(parts) if parts else "0"


@dataclass(frozen=True)
class CyclicAction:
    """Cyclic group of the given order acting on a graded ring through a generator."""

    ring: GradedRing
    generator: RingMap
    order: int
    internal_degree: int = 2

    @classmethod
    def level5(cls) -> CyclicAction:
        """Return 𝔽₅ˣ ≅ C4 acting on ℤ[1/5][x, y] by σx = y, σy = −x."""
        ring = GradedRing.create(["x", "y"], [1, 1], CoefficientRing.localized(5), name="Z[1/5][x,y]")
        x, y = ring.gen("x"), ring.gen("y")
        return cls(ring, RingMap("sigma", ring, ring, {"x": y, "y": -x}), 4)

    @classmethod
    def level3(cls) -> CyclicAction:
        """Return 𝔽₃ˣ ≅ C2 acting on ℤ[1/3][a1, a3] by the sign."""
        ring = GradedRing.create(["a1", "a3"], [1, 3], CoefficientRing.localized(3), name="B1(3)")
        return cls(
            ring,
            RingMap("[-1]", ring, ring, {"a1": -ring.gen("a1"), "a3": -ring.gen("a3")}),
            2,
        )

    def act(self, power: int, x: PolyElement) -> PolyElement:
        """Return σ^power · x."""
        for _ in range(power % self.order):
            x = self.generator(x)
        return x

    def norm(self, x: PolyElement) -> PolyElement:
        """Return Σ σ^i x."""
        return sum((self.act(i, x) for i in range(self.order)), self.ring.zero())

    def weight(self, degree: int) -> int:
        """Return the polynomial weight of an internal degree."""
        if degree % self.internal_degree:
            raise AlgebraError(f"Degree {degree} is not a multiple of {self.internal_degree}")
        return degree // self.internal_degree

    def monomials(self, weight: int) -> list[Monomial]:
        """Return the monomial basis in a weight."""
        return self.ring.monomials(weight)


@dataclass(frozen=True)
class GradedSummand:
    """Indecomposable summand spanned by an orbit of monomials."""

    kind: SummandKind
    basis: tuple[PolyElement, ...]

    @property
    def label(self) -> str:
        """Return the representative monomial as text."""
        return str(self.basis[0]).replace("*", "")

    def __str__(self) -> str:
        """Return e.g. ``Tau{x^4}``."""
        return f"{self.kind.value}{{{self.label}}}"


def _sign_image(action: CyclicAction, monomial: PolyElement) -> tuple[PolyElement, Fraction]:
    image = action.generator(monomial)
    if len(image) != 1:
        raise AlgebraError(f"{action.generator.name} does not permute monomials up to sign")
    ((exponents, value),) = image.terms()
    return action.ring.monomial(exponents), value


def decompose_action(degree: int, action: CyclicAction | None = None) -> list[GradedSummand]:
    """Split the degree piece of the ring into R, Rneg, Tau and Psi summands."""
    action = action or CyclicAction.level5()
    weight = action.weight(degree)
    seen: set[Monomial] = set()
    summands = []
    for exponents in sorted(action.monomials(weight), reverse=True):
        if exponents in seen:
            continue
        monomial = action.ring.monomial(exponents)
        image, sign = _sign_image(action, monomial)
        if image == monomial:
            seen.add(exponents)
            kind = SummandKind.R if sign == 1 else SummandKind.RNEG
            summands.append(GradedSummand(kind, (monomial,)))
            continue
        square = action.generator(action.generator(monomial))
        if square == monomial:
            kind = SummandKind.TAU
        elif square == -monomial:
            kind = SummandKind.PSI
        else:
            raise AlgebraError(f"Orbit of {monomial} is not of size two")
        seen.update({exponents, image.terms()[0][0]})
        summands.append(GradedSummand(kind, (monomial, sign * image)))
    _LOGGER.debug("Degree %s splits as %s", degree, " + ".join(str(s) for s in summands))
    return summands


def summand_cohomology(kind: SummandKind, s: int, order: int = 4) -> AbelianGroup:
    """Return H^s of a summand from the periodic answers."""
    even = s % 2 == 0
    if kind == SummandKind.R:
        if s == 0:
            return AbelianGroup(1)
        return AbelianGroup(0, (order,)) if even else AbelianGroup()
    if kind == SummandKind.TAU:
        if s == 0:
            return AbelianGroup(1)
        return AbelianGroup(0, (2,)) if even else AbelianGroup()
    return AbelianGroup() if even else AbelianGroup(0, (2,))


def _matrix(action: CyclicAction, elements: list[PolyElement], basis: list[Monomial]) -> list[list[int]]:
    rows = []
    for exponents in basis:
        row = []
        for x in elements:
            value = x.coefficient(exponents)
            if value.denominator != 1:
                raise AlgebraError(f"Non-integral action matrix entry {value}")
            row.append(int(value))
        rows.append(row)
    return rows


def _invariant_factors(rows: list[list[int]], inverted: frozenset[int] | None) -> list[int]:
    if not rows or not rows[0]:
        return []
    matrix = DomainMatrix([[ZZ(v) for v in row] for row in rows], (len(rows), len(rows[0])), ZZ)
    factors = [abs(int(f)) for f in invariant_factors(matrix) if f]
    stripped = []
    for factor in factors:
        for prime in inverted or ():
            while factor % prime == 0:
                factor //= prime
        stripped.append(factor)
    return stripped


def _rank(rows: list[list[int]]) -> int:
    if not rows or not rows[0]:
        return 0
    return Matrix(rows).rank()


@dataclass(frozen=True)
class ModuleDifferentials:
    """The maps σ − 1 and N on a span of monomials, as integer matrices."""

    action: CyclicAction
    basis: list[Monomial]

    @cached_property
    def difference(self) -> list[list[int]]:
        """Return the matrix of σ − 1."""
        ring = self.action.ring
        images = [self.action.generator(ring.monomial(m)) - ring.monomial(m) for m in self.basis]
        return _matrix(self.action, images, self.basis)

    @cached_property
    def norm(self) -> list[list[int]]:
        """Return the matrix of the norm."""
        ring = self.action.ring
        images = [self.action.norm(ring.monomial(m)) for m in self.basis]
        return _matrix(self.action, images, self.basis)

    def maps(self, s: int) -> tuple[list[list[int]], list[list[int]] | None]:
        """Return (outgoing, incoming) matrices at cochain degree s."""
        if s == 0:
            return self.difference, None
        if s % 2:
            return self.norm, self.difference
        return self.difference, self.norm

    def cohomology(self, s: int) -> AbelianGroup:
        """Return H^s computed from the periodic resolution."""
        outgoing, incoming = self.maps(s)
        size = len(self.basis)
        nullity = size - _rank(outgoing)
        if incoming is None:
            return AbelianGroup(nullity)
        inverted = self.action.ring.coefficients.inverted
        torsion = tuple(sorted(f for f in _invariant_factors(incoming, inverted) if f > 1))
        return AbelianGroup(nullity - _rank(incoming), torsion)

    def vector(self, x: PolyElement) -> list[Fraction]:
        """Return the coordinates of x in the monomial basis."""
        return [x.coefficient(m) for m in self.basis]

    def contains_boundary(self, x: PolyElement, s: int) -> bool:
        """Return True if x lies in the image of the incoming map at degree s, 2-locally."""
        _, incoming = self.maps(s)
        vector = self.vector(x)
        if s == 0:
            return all(v == 0 for v in vector)
        if any(nu2(v) is not None and nu2(v) < 0 for v in vector):
            return False
        scale = lcm(1, *(v.denominator for v in vector))
        column = [int(v * scale) for v in vector]
        augmented = [row + [c] for row, c in zip(incoming, column)]
        if _rank(augmented) != _rank(incoming):
            return False
        inverted = self.action.ring.coefficients.inverted
        before = sum(nu2(f) for f in _invariant_factors(incoming, inverted))
        after = sum(nu2(f) for f in _invariant_factors(augmented, inverted))
        return before == after


def degree_differentials(degree: int, action: CyclicAction) -> ModuleDifferentials:
    """Return σ − 1 and N on a whole internal degree."""
    weight = action.weight(degree)
    return ModuleDifferentials(action, sorted(action.monomials(weight), reverse=True))


def summand_differentials(summand: GradedSummand, action: CyclicAction) -> ModuleDifferentials:
    """Return σ − 1 and N on a single summand."""
    basis = [b.terms()[0][0] for b in summand.basis]
    return ModuleDifferentials(action, basis)


# Named classes: (kind, representative exponents, base cohomological degree).
SPECIAL_NAMES = {
    (SummandKind.PSI, (1, 0), 1): "eta",
    (SummandKind.RNEG, (1, 1), 1): "nu",
    (SummandKind.PSI, (3, 0), 1): "gamma",
    (SummandKind.R, (2, 2), 2): "xi",
}


def _invariant_names(weight: int) -> list[str]:
    names = []
    for i in range(weight // 2, -1, -1):
        for e in (0, 1):
            rest = weight - 2 * i - 4 * e
            if rest < 0 or rest % 4:
                continue
            j = rest // 4
            factors = [
                f"b2^{i}" if i > 1 else ("b2" if i else ""),
                "b4" if e else "",
                f"delta^{j}" if j > 1 else ("delta" if j else ""),
            ]
            names.append("".join(f for f in factors if f) or "1")
    return names


def _class_name(summand: GradedSummand, s: int) -> str:
    exponents = summand.basis[0].terms()[0][0]
    base = 1 if s % 2 else 2
    beta = (s - base) // 2 if s else 0
    special = SPECIAL_NAMES.get((summand.kind, exponents, base))
    if special:
        name = special
    elif summand.kind == SummandKind.R:
        name, beta = ("" if not any(exponents) else f"{{{summand.label}}}"), s // 2
        name = f"beta^{beta}{name}" if beta != 1 else f"beta{name}"
        return name
    else:
        name = f"{{{summand.label}}}"
    if beta <= 0:
        return name
    return f"beta^{beta}{name}" if beta > 1 else f"beta{name}"


@dataclass
class CohomologyGroup:
    """H^s in one internal degree with named generators."""

    s: int
    degree: int
    group: AbelianGroup
    generators: list[str] = field(default_factory=list)
    matches_summands: bool = True

    @property
    def stem(self) -> int:
        """Return t − s."""
        return self.degree - self.s

    def to_row(self) -> dict[str, object]:
        """Return a chart row."""
        return {
            "stem": self.stem,
            "s": self.s,
            "group": str(self.group),
            "generators": " ".join(self.generators),
        }


def cohomology(s: int, degree: int, action: CyclicAction | None = None) -> CohomologyGroup:
    """Return H^s of the internal degree piece, computed and cross-checked summandwise."""
    action = action or CyclicAction.level5()
    summands = decompose_action(degree, action)
    computed = degree_differentials(degree, action).cohomology(s)
    known = AbelianGroup()
    generators: list[str] = []
    for summand in summands:
        piece = summand_cohomology(summand.kind, s, action.order)
        if summand_differentials(summand, action).cohomology(s) != piece:
            _LOGGER.warning("Summand %s disagrees with the periodic answer in degree %s", summand, s)
        known = known + piece
        if s and not piece.is_zero:
            generators.append(_class_name(summand, s))
    if s == 0 and action.order == 4:
        generators = _invariant_names(action.weight(degree))
    elif s == 0:
        generators = [str(b.basis[0]).replace("*", "") for b in summands if b.kind == SummandKind.R]
    return CohomologyGroup(s, degree, computed, generators, computed == known)


def e2_chart(max_weight: int, max_s: int = 4, action: CyclicAction | None = None) -> list[CohomologyGroup]:
    """Return every nonzero E2 group with t ≤ 2·max_weight and s ≤ max_s."""
    action = action or CyclicAction.level5()
    rows = []
    for degree in range(0, action.internal_degree * max_weight + 1, action.internal_degree):
        for s in range(0, max_s + 1):
            group = cohomology(s, degree, action)
            if not group.group.is_zero:
                rows.append(group)
    return rows


@dataclass
class Cochain:
    """Normalized inhomogeneous cochain keyed by exponent tuples of σ."""

    action: CyclicAction
    degree: int
    table: dict[tuple[int, ...], PolyElement] = field(default_factory=dict)

    @classmethod
    def from_values(cls, action: CyclicAction, degree: int, values: dict[tuple[int, ...], PolyElement | str | int]) -> Cochain:
        """Build a cochain, parsing text values."""
        table = {}
        for key, value in values.items():
            if isinstance(value, str):
                value = action.ring.parse(value)
            elif not isinstance(value, PolyElement):
                value = action.ring.constant(value)
            table[tuple(k % action.order for k in key)] = value
        return cls(action, degree, table)

    @classmethod
    def zero(cls, action: CyclicAction, degree: int) -> Cochain:
        """Return the zero cochain."""
        return cls(action, degree, {})

    @classmethod
    def scalar(cls, action: CyclicAction, value: PolyElement) -> Cochain:
        """Return a 0-cochain."""
        return cls(action, 0, {(): value})

    def __call__(self, *args: int) -> PolyElement:
        """Return the value on (σ^a1, …, σ^an)."""
        if len(args) != self.degree:
            raise AlgebraError(f"A {self.degree}-cochain takes {self.degree} arguments")
        key = tuple(a % self.action.order for a in args)
        if self.degree and 0 in key:
            return self.action.ring.zero()
        return self.table.get(key, self.action.ring.zero())

    def keys(self) -> list[tuple[int, ...]]:
        """Return every argument tuple."""
        return list(product(range(self.action.order), repeat=self.degree))

    def is_normalized(self) -> bool:
        """Return True if the stored table vanishes on the identity."""
        return all(v.is_zero for k, v in self.table.items() if 0 in k)

    def _combine(self, other: Cochain, sign: int) -> Cochain:
        if other.degree != self.degree:
            raise AlgebraError("Cochains of different degrees")
        table = {k: self(*k) + sign * other(*k) for k in self.keys()}
        return Cochain(self.action, self.degree, {k: v for k, v in table.items() if not v.is_zero})

    def __add__(self, other: Cochain) -> Cochain:
        """Return the pointwise sum."""
        return self._combine(other, 1)

    def __sub__(self, other: Cochain) -> Cochain:
        """Return the pointwise difference."""
        return self._combine(other, -1)

    def __rmul__(self, scalar: int | Fraction | PolyElement) -> Cochain:
        """Multiply every value by an invariant scalar."""
        return Cochain(self.action, self.degree, {k: scalar * v for k, v in self.table.items()})

    def __eq__(self, other: object) -> bool:
        """Compare tables."""
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.degree == other.degree and all(self(*k) == other(*k) for k in self.keys())

    def is_zero(self) -> bool:
        """Return True if every value vanishes."""
        return all(self(*k).is_zero for k in self.keys())

    def weight(self) -> int | None:
        """Return the common weight of the values."""
        weights = {v.homogeneous_weight() for v in self.table.values() if not v.is_zero}
        if len(weights) > 1:
            raise AlgebraError(f"Cochain values of mixed weights {sorted(weights)}")
        return weights.pop() if weights else None

    def to_json(self) -> dict[str, str]:
        """Return the table with keys written as powers of σ."""
        return {",".join(f"s^{a}" for a in k): str(self(*k)) for k in self.keys()}


def coboundary(cochain: Cochain) -> Cochain:
    """Return δφ by the standard inhomogeneous formula."""
    action, n = cochain.action, cochain.degree
    table = {}
    for key in product(range(action.order), repeat=n + 1):
        value = action.act(key[0], cochain(*key[1:]))
        for i in range(1, n + 1):
            merged = key[: i - 1] + ((key[i - 1] + key[i]) % action.order,) + key[i + 1 :]
            value = value + (-1) ** i * cochain(*merged)
        value = value + (-1) ** (n + 1) * cochain(*key[:n])
        if not value.is_zero:
            table[key] = value
    return Cochain(action, n + 1, table)


def cup(first: Cochain, second: Cochain) -> Cochain:
    """Return φ ∪ ψ for 1-cochains, or a scalar product with a 0-cochain."""
    action = first.action
    if first.degree == 0:
        return first() * second
    if second.degree == 0:
        return second() * first
    if first.degree == 1 and second.degree == 1:
        table = {}
        for a, b in product(range(action.order), repeat=2):
            value = action.act(a, first(b)) * second(a)
            if not value.is_zero:
                table[(a, b)] = value
        return Cochain(action, 2, table)
    raise AlgebraError(f"Cup products of degrees ({first.degree}, {second.degree}) are not supported")


def class_of(cochain: Cochain) -> PolyElement:
    """Return a representative of the cohomology class in the periodic resolution."""
    action = cochain.action
    if cochain.degree == 0:
        return cochain()
    if cochain.degree == 1:
        return cochain(1)
    if cochain.degree == 2:
        return sum((cochain(i, 1) for i in range(action.order)), action.ring.zero())
    raise AlgebraError("Classes are only read off in degrees at most 2")


def is_cohomologous(first: Cochain, second: Cochain) -> bool:
    """Return True if two cocycles define the same class, 2-locally."""
    if first.degree != second.degree:
        raise AlgebraError("Cochains of different degrees")
    difference = class_of(first) - class_of(second)
    if difference.is_zero:
        return True
    weight = difference.homogeneous_weight()
    differentials = ModuleDifferentials(
        first.action, sorted(first.action.monomials(weight), reverse=True)
    )
    return differentials.contains_boundary(difference, first.degree)


class E2Classes:
    """Named cochain representatives for the level-5 E2-term."""

    def __init__(self, action: CyclicAction | None = None) -> None:
        """Initialize the named representatives."""
        self.action = action or CyclicAction.level5()
        ring = self.action.ring
        x, y = ring.gen("x"), ring.gen("y")
        self.b2 = x**2 + y**2
        self.b4 = x**3 * y - x * y**3
        self.delta = x**2 * y**2
        self.eta = Cochain.from_values(self.action, 1, {(1,): x, (2,): x + y, (3,): y})
        self.nu = Cochain.from_values(self.action, 1, {(1,): x * y, (3,): x * y})
        self.gamma = Cochain.from_values(
            self.action, 1, {(1,): x**3, (2,): x**3 + y**3, (3,): y**3}
        )
        one = ring.one()
        self.beta = Cochain(
            self.action,
            2,
            {(a, b): one for a, b in product(range(1, 4), repeat=2) if a + b >= 4},
        )
        self.xi = self.delta * self.beta
        self.witness = Cochain.from_values(
            self.action, 1, {(1,): -x * y**3, (2,): -x * y**3, (3,): x**4 - x * y**3}
        )

    def invariant_monomials(self, max_weight: int) -> list[tuple[int, PolyElement]]:
        """Return (weight, b2^i b4^e δ^j) with weight at most max_weight."""
        found = []
        for i in range(max_weight // 2 + 1):
            for e in (0, 1):
                for j in range(max_weight // 4 + 1):
                    weight = 2 * i + 4 * e + 4 * j
                    if weight <= max_weight:
                        found.append((weight, self.b2**i * self.b4**e * self.delta**j))
        return sorted(found, key=lambda item: item[0])

    def relations(self) -> list[tuple[str, int, Cochain | PolyElement, Cochain | PolyElement]]:
        """Return (name, weight, lhs, rhs) for every relation of the E2-term."""
        b2, b4, delta = self.b2, self.b4, self.delta
        eta, nu, gamma, xi = self.eta, self.nu, self.gamma, self.xi
        zero1 = Cochain.zero(self.action, 1)
        zero2 = Cochain.zero(self.action, 2)
        return [
            ("b4^2 = b2^2 delta - 4 delta^2", 8, b4**2, b2**2 * delta - 4 * delta**2),
            ("2 eta = 0", 1, 2 * eta, zero1),
            ("2 nu = 0", 2, 2 * nu, zero1),
            ("2 gamma = 0", 3, 2 * gamma, zero1),
            ("4 xi = 0", 4, 4 * xi, zero2),
            ("nu^2 = 2 xi", 4, cup(nu, nu), 2 * xi),
            ("gamma^2 = (b2^2 + delta) eta^2", 6, cup(gamma, gamma), (b2**2 + delta) * cup(eta, eta)),
            ("eta nu = 0", 3, cup(eta, nu), zero2),
            ("b2 nu = 0", 4, b2 * nu, zero1),
            ("b2 xi = delta eta^2", 6, b2 * xi, delta * cup(eta, eta)),
            ("nu gamma = 0", 5, cup(nu, gamma), zero2),
            (
                "b4 xi = b2^2 xi + 2 delta xi + delta eta gamma",
                8,
                b4 * xi,
                b2**2 * xi + 2 * delta * xi + delta * cup(eta, gamma),
            ),
            ("b4 nu = 0", 6, b4 * nu, zero1),
            ("b4 gamma = (b4 + delta) b2 eta", 7, b4 * gamma, (b4 + delta) * b2 * eta),
            ("gamma b2 = eta (b2^2 + b4)", 5, b2 * gamma, (b2**2 + b4) * eta),
        ]


def _holds(lhs: Cochain | PolyElement, rhs: Cochain | PolyElement) -> bool:
    if isinstance(lhs, PolyElement):
        return lhs == rhs
    return is_cohomologous(lhs, rhs)


def verify_e2_relations(max_weight: int = 12, action: CyclicAction | None = None) -> Report:
    """Check every E2 relation, also multiplied by invariant monomials up to max_weight."""
    classes = E2Classes(action)
    report = Report("E2 relations")
    for name, weight, lhs, rhs in classes.relations():
        failures = []
        for extra, monomial in classes.invariant_monomials(max(max_weight - weight, 0)):
            if not _holds(monomial * lhs, monomial * rhs):
                failures.append(weight + extra)
        report.add(name, not failures, f"fails in weight {failures[0]}" if failures else "")

    witness = coboundary(classes.witness)
    expected = cup(classes.eta, classes.gamma) + (
        classes.b4 + classes.b2**2 - 2 * classes.delta
    ) * classes.beta
    report.add("eta gamma + beta(b4 + b2^2 - 2 delta) is a coboundary", witness == expected)

    cocycles = {"eta": classes.eta, "nu": classes.nu, "gamma": classes.gamma, "beta": classes.beta}
    for name, cochain in cocycles.items():
        report.add(f"{name} is a cocycle", coboundary(cochain).is_zero())
    _LOGGER.info("E2 relations: %s", report.summary())
    return report
