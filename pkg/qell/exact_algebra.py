"""Exact coefficient rings and graded Laurent polynomial arithmetic."""
from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import cached_property, lru_cache
import logging
from typing import Any, Self, Union

from sympy import Symbol, SympifyError, fraction, sympify, together
from sympy.polys.domains import QQ
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyRing

from .const import RATIONAL_FUNCTION_SIZE_CAP, V1
from .exceptions import (
    AlgebraError,
    MixedWeightError,
    NotInvertibleError,
    UnknownGeneratorError,
)

_LOGGER = logging.getLogger(__name__)

ZETA = "zeta"

Scalar = Union[int, Fraction]
Monomial = tuple[int, ...]


class RingKind(StrEnum):
    """Coefficient ring kind."""

    LOCALIZED_INTEGERS = "localized_integers"
    CYCLOTOMIC5 = "cyclotomic5"
    PRIME_FIELD2 = "prime_field2"
    TRUNCATED_DYADIC = "truncated_dyadic"

    def to_name(self) -> str:
        """Return the title of the ring kind."""
        return self.value.replace("_", " ").capitalize()

    @classmethod
    def from_string(cls, string: str) -> Self:
        """Return the ring kind from string."""
        if string in [kind.value for kind in cls]:
            return cls(string)
        raise ValueError(
            f"Unknown ring kind: {string}. Valid kinds are: "
            + ", ".join(kind.value for kind in cls)
        )


@lru_cache(maxsize=4096)
def _strip_primes(number: int, primes: frozenset[int]) -> int:
    for prime in primes:
        while number % prime == 0:
            number //= prime
    return number


@dataclass(frozen=True)
class CoefficientRing:
    """Exact coefficient ring.

    ``inverted`` lists the inverted primes; ``None`` means every prime is
    inverted (the rationals). ``local_prime`` localizes at a single prime.
    """

    kind: RingKind = RingKind.LOCALIZED_INTEGERS
    inverted: frozenset[int] | None = frozenset()
    local_prime: int | None = None
    exponent: int = 0

    @classmethod
    def localized(cls, *primes: int) -> CoefficientRing:
        """Integers with the given primes inverted."""
        return cls(inverted=frozenset(primes))

    @classmethod
    def local_at(cls, prime: int) -> CoefficientRing:
        """Integers localized at ``prime`` (every other prime inverted)."""
        return cls(inverted=None, local_prime=prime)

    @classmethod
    def rationals(cls) -> CoefficientRing:
        """Field of rational numbers."""
        return cls(inverted=None)

    @classmethod
    def cyclotomic5(cls) -> CoefficientRing:
        """Z[1/5, zeta] with zeta a primitive fifth root of unity."""
        return cls(kind=RingKind.CYCLOTOMIC5, inverted=frozenset({5}))

    @classmethod
    def prime_field2(cls) -> CoefficientRing:
        """The field with two elements."""
        return cls(kind=RingKind.PRIME_FIELD2, inverted=frozenset(), exponent=1)

    @classmethod
    def truncated_dyadic(cls, exponent: int) -> CoefficientRing:
        """Z/2^k."""
        if exponent < 1:
            raise ValueError(f"Truncation exponent must be positive, got {exponent}")
        return cls(kind=RingKind.TRUNCATED_DYADIC, inverted=frozenset(), exponent=exponent)

    @property
    def is_modular(self) -> bool:
        """Return True for the rings Z/2^k."""
        return self.kind in (RingKind.PRIME_FIELD2, RingKind.TRUNCATED_DYADIC)

    @property
    def modulus(self) -> int | None:
        """Return 2^k for the rings Z/2^k."""
        return 2**self.exponent if self.is_modular else None

    @property
    def is_field_of_fractions(self) -> bool:
        """Return True for the rationals."""
        return self.inverted is None and self.local_prime is None and not self.is_modular

    def admits_denominator(self, denominator: int) -> bool:
        """Return True if ``1/denominator`` lies in the ring."""
        denominator = abs(int(denominator))
        if denominator == 0:
            return False
        if self.is_modular:
            return denominator % 2 == 1
        if self.local_prime is not None:
            return denominator % self.local_prime != 0
        if self.inverted is None:
            return True
        return _strip_primes(denominator, self.inverted) == 1

    def is_unit(self, value: Scalar) -> bool:
        """Return True if ``value`` is invertible in the ring."""
        value = Fraction(value)
        if self.is_modular:
            return value.denominator % 2 == 1 and value.numerator % 2 == 1
        return value != 0 and self.admits_denominator(value.numerator)

    def normalize(self, value: Scalar) -> Fraction:
        """Return the canonical representative of ``value``."""
        value = Fraction(value)
        if self.is_modular:
            if value.denominator % 2 == 0:
                raise NotInvertibleError(f"{value} has an even denominator")
            modulus = self.modulus
            return Fraction(
                value.numerator * pow(value.denominator, -1, modulus) % modulus
            )
        if not self.admits_denominator(value.denominator):
            raise NotInvertibleError(f"{value} does not lie in {self}")
        return value

    def __str__(self) -> str:
        """Return a short description."""
        if self.kind == RingKind.CYCLOTOMIC5:
            return "Z[1/5,zeta]"
        if self.kind == RingKind.PRIME_FIELD2:
            return "F2"
        if self.kind == RingKind.TRUNCATED_DYADIC:
            return f"Z/{self.modulus}"
        if self.local_prime is not None:
            return f"Z_({self.local_prime})"
        if self.inverted is None:
            return "Q"
        if not self.inverted:
            return "Z"
        return "Z[" + ",".join(f"1/{p}" for p in sorted(self.inverted)) + "]"


@dataclass(frozen=True)
class GeneratorTable:
    """Generator names with their weights and invertibility flags."""

    names: tuple[str, ...]
    weights: tuple[int, ...]
    invertible: tuple[bool, ...]

    def __post_init__(self) -> None:
        """Check the table is consistent."""
        if not (len(self.names) == len(self.weights) == len(self.invertible)):
            raise ValueError("Generator names, weights and flags differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"Duplicate generator names in {self.names}")

    def index(self, name: str) -> int:
        """Return the position of a generator."""
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownGeneratorError(
                f"Unknown generator: {name}. Generators are: {', '.join(self.names)}"
            ) from None

    def weight(self, exponents: Monomial) -> int:
        """Return the weight of a monomial."""
        return sum(w * e for w, e in zip(self.weights, exponents))


@dataclass(frozen=True)
class GradedRing:
    """Graded Laurent polynomial ring over an exact coefficient ring."""

    generators: GeneratorTable
    coefficients: CoefficientRing = field(default_factory=CoefficientRing)
    name: str = field(default="", compare=False)

    @classmethod
    def create(
        cls,
        names: Iterable[str],
        weights: Iterable[int],
        coefficients: CoefficientRing | None = None,
        invertible: Iterable[str] = (),
        name: str = "",
    ) -> GradedRing:
        """Build a ring from generator names and weights."""
        coefficients = coefficients or CoefficientRing()
        names, weights = list(names), list(weights)
        if coefficients.kind == RingKind.CYCLOTOMIC5 and ZETA not in names:
            names.append(ZETA)
            weights.append(0)
        if not names:
            raise ValueError("A ring needs at least one generator")
        invertible = set(invertible)
        unknown = invertible - set(names)
        if unknown:
            raise UnknownGeneratorError(f"Unknown invertible generators: {sorted(unknown)}")
        table = GeneratorTable(
            tuple(names), tuple(weights), tuple(n in invertible for n in names)
        )
        return cls(table, coefficients, name)

    @cached_property
    def poly_ring(self) -> PolyRing:
        """Return the underlying sparse polynomial ring."""
        return PolyRing(tuple(Symbol(n) for n in self.generators.names), QQ)

    @property
    def names(self) -> tuple[str, ...]:
        """Return the generator names."""
        return self.generators.names

    @property
    def ngens(self) -> int:
        """Return the number of generators."""
        return len(self.generators.names)

    @cached_property
    def invertible_indices(self) -> tuple[int, ...]:
        """Return the positions of the invertible generators."""
        return tuple(i for i, flag in enumerate(self.generators.invertible) if flag)

    @cached_property
    def zeta_index(self) -> int | None:
        """Return the position of zeta in a cyclotomic ring."""
        if self.coefficients.kind != RingKind.CYCLOTOMIC5:
            return None
        return self.generators.index(ZETA)

    def zero(self) -> PolyElement:
        """Return 0."""
        return PolyElement(self, self.poly_ring.zero)

    def one(self) -> PolyElement:
        """Return 1."""
        return PolyElement(self, self.poly_ring.one)

    def constant(self, value: Scalar) -> PolyElement:
        """Return a constant."""
        value = Fraction(value)
        return PolyElement(
            self, self.poly_ring.from_dict({(0,) * self.ngens: QQ(value.numerator, value.denominator)})
        )

    def gen(self, name: str) -> PolyElement:
        """Return a generator."""
        index = self.generators.index(name)
        return PolyElement(self, self.poly_ring.gens[index])

    def gens(self) -> tuple[PolyElement, ...]:
        """Return every generator."""
        return tuple(self.gen(name) for name in self.names)

    def monomial(self, exponents: Monomial, coefficient: Scalar = 1) -> PolyElement:
        """Return ``coefficient`` times a monomial; negative exponents allowed on units."""
        return self.from_terms({tuple(exponents): coefficient})

    def from_terms(self, terms: Mapping[Monomial, Scalar]) -> PolyElement:
        """Build an element from a map of exponent vectors to coefficients."""
        shift = [0] * self.ngens
        for exponents in terms:
            if len(exponents) != self.ngens:
                raise AlgebraError(f"Exponent vector {exponents} does not match {self}")
            for i, e in enumerate(exponents):
                if e < 0:
                    if not self.generators.invertible[i]:
                        raise NotInvertibleError(
                            f"{self.names[i]} is not invertible in {self}"
                        )
                    shift[i] = max(shift[i], -e)
        data = {}
        for exponents, value in terms.items():
            value = Fraction(value)
            if value:
                key = tuple(e + s for e, s in zip(exponents, shift))
                data[key] = data.get(key, QQ.zero) + QQ(value.numerator, value.denominator)
        return PolyElement(self, self.poly_ring.from_dict(data), tuple(shift))

    def from_sparse(self, poly: Any) -> PolyElement:
        """Wrap a polynomial of the underlying sparse ring."""
        return PolyElement(self, self.poly_ring.from_dict(dict(poly.items())))

    def parse(self, text: str) -> PolyElement:
        """Parse the text serialization of an element."""
        symbols = {name: Symbol(name) for name in self.names}
        try:
            expr = sympify(text.replace("^", "**"), locals=symbols)
        except (SympifyError, SyntaxError, TypeError) as err:
            raise AlgebraError(f"Cannot parse {text!r}: {err}") from err
        unknown = {str(s) for s in expr.free_symbols} - set(self.names)
        if unknown:
            raise UnknownGeneratorError(
                f"Unknown generators in {text!r}: {', '.join(sorted(unknown))}"
            )
        numerator, denominator = fraction(together(expr))
        try:
            top = PolyElement(self, self.poly_ring.from_expr(numerator))
            bottom = PolyElement(self, self.poly_ring.from_expr(denominator))
        except ValueError as err:
            raise AlgebraError(f"Cannot parse {text!r}: {err}") from err
        return top / bottom

    def extend(
        self,
        names: Iterable[str],
        weights: Iterable[int],
        invertible: Iterable[str] = (),
        coefficients: CoefficientRing | None = None,
        name: str = "",
    ) -> GradedRing:
        """Return a ring with additional generators."""
        names, weights = list(names), list(weights)
        own = [n for n in self.names if n != ZETA]
        own_weights = [w for n, w in zip(self.names, self.generators.weights) if n != ZETA]
        flags = [n for n, f in zip(self.names, self.generators.invertible) if f]
        return GradedRing.create(
            own + names,
            own_weights + weights,
            coefficients or self.coefficients,
            invertible=flags + list(invertible),
            name=name,
        )

    def with_coefficients(self, coefficients: CoefficientRing, name: str = "") -> GradedRing:
        """Return the same generators over other coefficients."""
        names = [n for n in self.names if n != ZETA]
        weights = [w for n, w in zip(self.names, self.generators.weights) if n != ZETA]
        flags = [n for n, f in zip(self.names, self.generators.invertible) if f]
        return GradedRing.create(names, weights, coefficients, flags, name or self.name)

    def embed(self, x: PolyElement) -> PolyElement:
        """Coerce an element of another ring into this ring by generator name."""
        if x.ring == self:
            return x
        positions = []
        for i, name in enumerate(x.ring.names):
            if name in self.names:
                positions.append(self.generators.index(name))
            else:
                positions.append(None)
        terms: dict[Monomial, Fraction] = {}
        for exponents, value in x.terms():
            key = [0] * self.ngens
            for i, e in enumerate(exponents):
                if e == 0:
                    continue
                if positions[i] is None:
                    raise UnknownGeneratorError(
                        f"{x.ring.names[i]} is not a generator of {self}"
                    )
                key[positions[i]] = e
            terms[tuple(key)] = terms.get(tuple(key), Fraction(0)) + value
        return self.from_terms(terms)

    def monomials(self, weight: int) -> list[Monomial]:
        """Return the exponent vectors of the given weight, weight-zero generators excluded."""
        weights = self.generators.weights
        found: list[Monomial] = []

        def fill(index: int, remaining: int, prefix: list[int]) -> None:
            if index == self.ngens:
                if remaining == 0:
                    found.append(tuple(prefix))
                return
            w = weights[index]
            if w <= 0:
                fill(index + 1, remaining, prefix + [0])
                return
            for e in range(remaining // w, -1, -1):
                fill(index + 1, remaining - e * w, prefix + [e])

        if weight >= 0:
            fill(0, weight, [])
        return found

    def __str__(self) -> str:
        """Return the ring description."""
        gens = ",".join(
            (f"{n}^±" if f else n)
            for n, f in zip(self.names, self.generators.invertible)
            if n != ZETA
        )
        label = f"{self.coefficients}[{gens}]"
        return f"{self.name} = {label}" if self.name else label


def _format_coefficient(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _reduce_zeta(poly: Any, index: int) -> Any:
    """Rewrite every power of zeta in the basis 1, zeta, zeta^2, zeta^3."""
    if all(monom[index] < 4 for monom in poly.keys()):
        return poly
    data: dict[Monomial, Any] = {}
    for monom, value in poly.items():
        e = monom[index] % 5
        if e == 4:
            for k in range(4):
                key = monom[:index] + (k,) + monom[index + 1 :]
                data[key] = data.get(key, QQ.zero) - value
        else:
            key = monom[:index] + (e,) + monom[index + 1 :]
            data[key] = data.get(key, QQ.zero) + value
    return poly.ring.from_dict(data)


def _canonical(ring: GradedRing, poly: Any, shift: Monomial) -> tuple[Any, Monomial]:
    if ring.zeta_index is not None:
        poly = _reduce_zeta(poly, ring.zeta_index)
    coefficients = ring.coefficients
    if not coefficients.is_field_of_fractions:
        if coefficients.is_modular:
            data = {}
            for monom, value in poly.items():
                reduced = coefficients.normalize(
                    Fraction(int(value.numerator), int(value.denominator))
                )
                if reduced:
                    data[monom] = QQ(reduced.numerator, reduced.denominator)
            poly = poly.ring.from_dict(data)
        else:
            for value in poly.values():
                if not coefficients.admits_denominator(int(value.denominator)):
                    raise NotInvertibleError(
                        f"Coefficient {value} does not lie in {coefficients}"
                    )
    if not poly:
        return poly, (0,) * ring.ngens
    shift = list(shift)
    cancel = [0] * ring.ngens
    for i in ring.invertible_indices:
        lowest = min(monom[i] for monom in poly.keys())
        if shift[i] == 0 and lowest == 0:
            continue
        cancel[i] = min(lowest, shift[i]) if shift[i] else 0
    if any(cancel):
        poly = poly.ring.from_dict(
            {tuple(e - c for e, c in zip(monom, cancel)): v for monom, v in poly.items()}
        )
        shift = [s - c for s, c in zip(shift, cancel)]
    return poly, tuple(shift)


def _mul_monomial(poly: Any, exponents: Monomial) -> Any:
    if not any(exponents):
        return poly
    return poly.ring.from_dict(
        {tuple(e + d for e, d in zip(monom, exponents)): v for monom, v in poly.items()}
    )


class PolyElement:
    """Element of a graded Laurent polynomial ring.

    The value is ``poly / x^shift`` where ``shift`` only involves invertible
    generators; the pair is kept in canonical form so that equality is
    structural.
    """

    __slots__ = ("ring", "poly", "shift")

    def __init__(self, ring: GradedRing, poly: Any, shift: Monomial | None = None) -> None:
        """Initialize and canonicalize the element."""
        shift = tuple(shift) if shift is not None else (0,) * ring.ngens
        poly, shift = _canonical(ring, poly, shift)
        self.ring = ring
        self.poly = poly
        self.shift = shift

    def _coerce(self, other: Any) -> PolyElement:
        if isinstance(other, PolyElement):
            if other.ring != self.ring:
                raise AlgebraError(f"Ring mismatch: {self.ring} and {other.ring}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.constant(other)
        return NotImplemented

    @property
    def is_zero(self) -> bool:
        """Return True for 0."""
        return not self.poly

    def __bool__(self) -> bool:
        """Return False for 0."""
        return bool(self.poly)

    def __len__(self) -> int:
        """Return the number of terms."""
        return len(self.poly)

    def __eq__(self, other: object) -> bool:
        """Compare exactly."""
        if isinstance(other, (int, Fraction)):
            other = self.ring.constant(other)
        if not isinstance(other, PolyElement):
            return NotImplemented
        return self.ring == other.ring and self.shift == other.shift and self.poly == other.poly

    def __hash__(self) -> int:
        """Return the hash of the canonical form."""
        return hash((self.ring, self.shift, frozenset(self.poly.items())))

    def __neg__(self) -> PolyElement:
        """Return -self."""
        return PolyElement(self.ring, -self.poly, self.shift)

    def __add__(self, other: Any) -> PolyElement:
        """Return self + other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.shift == other.shift:
            return PolyElement(self.ring, self.poly + other.poly, self.shift)
        shift = tuple(max(a, b) for a, b in zip(self.shift, other.shift))
        left = _mul_monomial(self.poly, tuple(s - a for s, a in zip(shift, self.shift)))
        right = _mul_monomial(other.poly, tuple(s - b for s, b in zip(shift, other.shift)))
        return PolyElement(self.ring, left + right, shift)

    __radd__ = __add__

    def __sub__(self, other: Any) -> PolyElement:
        """Return self - other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: Any) -> PolyElement:
        """Return other - self."""
        return (-self) + other

    def __mul__(self, other: Any) -> PolyElement:
        """Return self * other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        shift = tuple(a + b for a, b in zip(self.shift, other.shift))
        return PolyElement(self.ring, self.poly * other.poly, shift)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> PolyElement:
        """Return self ** exponent."""
        if exponent < 0:
            return self.inverse() ** (-exponent)
        if exponent == 0:
            return self.ring.one()
        return PolyElement(
            self.ring, self.poly**exponent, tuple(s * exponent for s in self.shift)
        )

    @property
    def is_unit(self) -> bool:
        """Return True if the element is invertible."""
        if len(self.poly) != 1:
            return False
        ((monom, value),) = self.poly.items()
        if not self.ring.coefficients.is_unit(Fraction(int(value.numerator), int(value.denominator))):
            return False
        flags = self.ring.generators.invertible
        return all(
            e == 0 or flags[i] or i == self.ring.zeta_index for i, e in enumerate(monom)
        )

    def inverse(self) -> PolyElement:
        """Return the multiplicative inverse."""
        if not self.is_unit:
            raise NotInvertibleError(f"{self} is not a unit in {self.ring}")
        ((monom, value),) = self.poly.items()
        value = Fraction(int(value.numerator), int(value.denominator))
        exponents = []
        for i, e in enumerate(monom):
            true = e - self.shift[i]
            if i == self.ring.zeta_index:
                exponents.append((-true) % 5)
            else:
                exponents.append(-true)
        return self.ring.monomial(tuple(exponents), 1 / value)

    def __truediv__(self, other: Any) -> PolyElement:
        """Return the exact quotient."""
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise NotInvertibleError("Division by zero")
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise NotInvertibleError("Division by zero")
        if other.is_unit:
            return self * other.inverse()
        try:
            quotient = self.poly.exquo(other.poly)
        except ExactQuotientFailed:
            raise NotInvertibleError(f"{other} does not divide {self}") from None
        result = PolyElement(self.ring, quotient, self.shift)
        if any(other.shift):
            result = result * self.ring.monomial(other.shift)
        return result

    def divides(self, other: PolyElement) -> bool:
        """Return True if self divides other exactly."""
        try:
            other / self
        except NotInvertibleError:
            return False
        return True

    def terms(self) -> list[tuple[Monomial, Fraction]]:
        """Return (exponents, coefficient) pairs in canonical printing order."""
        table = self.ring.generators
        items = []
        for monom, value in self.poly.items():
            exponents = tuple(e - s for e, s in zip(monom, self.shift))
            items.append(
                (exponents, Fraction(int(value.numerator), int(value.denominator)))
            )
        items.sort(key=lambda item: (table.weight(item[0]), item[0]), reverse=True)
        return items

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        """Iterate over terms."""
        return iter(self.terms())

    def coefficient(self, exponents: Monomial) -> Fraction:
        """Return the coefficient of a monomial."""
        key = tuple(e + s for e, s in zip(exponents, self.shift))
        value = self.poly.get(key)
        if value is None:
            return Fraction(0)
        return Fraction(int(value.numerator), int(value.denominator))

    def degree(self, name: str) -> int:
        """Return the largest exponent of a generator."""
        index = self.ring.generators.index(name)
        if self.is_zero:
            return 0
        return max(exponents[index] for exponents, _ in self.terms())

    @property
    def is_constant(self) -> bool:
        """Return True for constants."""
        return all(not any(exponents) for exponents, _ in self.terms())

    def constant_value(self) -> Fraction:
        """Return the value of a constant element."""
        if not self.is_constant:
            raise AlgebraError(f"{self} is not constant")
        return self.coefficient((0,) * self.ring.ngens)

    def weights(self) -> set[int]:
        """Return the set of term weights."""
        table = self.ring.generators
        return {table.weight(exponents) for exponents, _ in self.terms()}

    def homogeneous_weight(self) -> int | None:
        """Return the common weight, None for 0."""
        weights = self.weights()
        if not weights:
            return None
        if len(weights) > 1:
            raise MixedWeightError(f"{self} has mixed weights {sorted(weights)}")
        return weights.pop()

    def evaluate(self, values: Mapping[str, Scalar]) -> Fraction:
        """Substitute rational values for every generator."""
        names = self.ring.names
        missing = {n for n in names if n not in values}
        total = Fraction(0)
        for exponents, value in self.terms():
            term = value
            for name, e in zip(names, exponents):
                if e:
                    if name in missing:
                        raise UnknownGeneratorError(f"No value given for {name}")
                    term *= Fraction(values[name]) ** e
            total += term
        return total

    def map_coefficients(self, func: Callable[[Fraction], Scalar]) -> PolyElement:
        """Apply a function to every coefficient."""
        return self.ring.from_terms({e: func(c) for e, c in self.terms()})

    def __str__(self) -> str:
        """Return the text serialization."""
        if self.is_zero:
            return "0"
        names = self.ring.names
        pieces = []
        for exponents, value in self.terms():
            factors = [
                (name if e == 1 else f"{name}^{e}")
                for name, e in zip(names, exponents)
                if e
            ]
            monomial = "*".join(factors)
            if not monomial:
                piece = _format_coefficient(value)
            elif value == 1:
                piece = monomial
            elif value == -1:
                piece = f"-{monomial}"
            else:
                piece = f"{_format_coefficient(value)}*{monomial}"
            pieces.append(piece)
        text = pieces[0]
        for piece in pieces[1:]:
            text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return text

    def __repr__(self) -> str:
        """Return a debugging representation."""
        return f"PolyElement({self})"

    def to_json(self) -> list[dict[str, Any]]:
        """Return a JSON-ready list of terms with exact decimal strings."""
        names = self.ring.names
        return [
            {
                "monomial": {n: e for n, e in zip(names, exponents) if e},
                "coefficient": _format_coefficient(value),
            }
            for exponents, value in self.terms()
        ]


class RationalFunction:
    """Quotient of two elements, compared by cross-multiplication."""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: PolyElement, denominator: PolyElement | None = None) -> None:
        """Initialize the fraction."""
        if denominator is None:
            denominator = numerator.ring.one()
        if denominator.ring != numerator.ring:
            raise AlgebraError("Numerator and denominator live in different rings")
        if denominator.is_zero:
            raise NotInvertibleError("Zero denominator")
        if denominator.is_unit and not denominator == 1:
            numerator = numerator * denominator.inverse()
            denominator = numerator.ring.one()
        self.numerator = numerator
        self.denominator = denominator
        if len(numerator) + len(denominator) > RATIONAL_FUNCTION_SIZE_CAP and not denominator == 1:
            reduced = self.reduced()
            self.numerator, self.denominator = reduced.numerator, reduced.denominator

    @property
    def ring(self) -> GradedRing:
        """Return the ring of numerator and denominator."""
        return self.numerator.ring

    def _coerce(self, other: Any) -> RationalFunction:
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, PolyElement):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction(self.ring.constant(other))
        return NotImplemented

    @property
    def is_zero(self) -> bool:
        """Return True for 0."""
        return self.numerator.is_zero

    def __eq__(self, other: object) -> bool:
        """Compare by cross-multiplication."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.numerator * other.denominator == other.numerator * self.denominator

    def __hash__(self) -> int:
        """Rational functions are not hashable by value."""
        raise TypeError("RationalFunction is unhashable")

    def __neg__(self) -> RationalFunction:
        """Return -self."""
        return RationalFunction(-self.numerator, self.denominator)

    def __add__(self, other: Any) -> RationalFunction:
        """Return self + other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.denominator == other.denominator:
            return RationalFunction(self.numerator + other.numerator, self.denominator)
        return RationalFunction(
            self.numerator * other.denominator + other.numerator * self.denominator,
            self.denominator * other.denominator,
        )

    __radd__ = __add__

    def __sub__(self, other: Any) -> RationalFunction:
        """Return self - other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other: Any) -> RationalFunction:
        """Return other - self."""
        return (-self) + other

    def __mul__(self, other: Any) -> RationalFunction:
        """Return self * other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(
            self.numerator * other.numerator, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> RationalFunction:
        """Return self / other."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise NotInvertibleError("Division by zero")
        return RationalFunction(
            self.numerator * other.denominator, self.denominator * other.numerator
        )

    def __pow__(self, exponent: int) -> RationalFunction:
        """Return self ** exponent."""
        if exponent < 0:
            return RationalFunction(self.denominator, self.numerator) ** (-exponent)
        return RationalFunction(self.numerator**exponent, self.denominator**exponent)

    def reduced(self) -> RationalFunction:
        """Cancel the gcd of numerator and denominator."""
        ring = self.ring
        top = _mul_monomial(self.numerator.poly, self.denominator.shift)
        bottom = _mul_monomial(self.denominator.poly, self.numerator.shift)
        top, bottom = top.cancel(bottom)
        _LOGGER.debug("Reduced rational function to %s/%s terms", len(top), len(bottom))
        numerator = PolyElement(ring, top)
        denominator = PolyElement(ring, bottom)
        result = object.__new__(RationalFunction)
        if denominator.is_unit:
            numerator, denominator = numerator * denominator.inverse(), ring.one()
        result.numerator, result.denominator = numerator, denominator
        return result

    def to_element(self) -> PolyElement:
        """Return the quotient as a ring element if it is one."""
        return self.numerator / self.denominator

    def __str__(self) -> str:
        """Return the text serialization."""
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"

    def __repr__(self) -> str:
        """Return a debugging representation."""
        return f"RationalFunction({self})"


@dataclass(frozen=True)
class RingMap:
    """Ring homomorphism given by the images of the source generators."""

    name: str
    source: GradedRing
    target: GradedRing
    images: Mapping[str, PolyElement]

    def __post_init__(self) -> None:
        """Check that every generator has an image in the target."""
        images = dict(self.images)
        if ZETA in self.source.names and ZETA not in images:
            if ZETA not in self.target.names:
                raise UnknownGeneratorError(f"{self.name}: target has no zeta")
            images[ZETA] = self.target.gen(ZETA)
        for name in self.source.names:
            if name not in images:
                raise UnknownGeneratorError(f"{self.name}: no image for generator {name}")
        for name, image in images.items():
            if name not in self.source.names:
                raise UnknownGeneratorError(f"{self.name}: {name} is not a source generator")
            if not isinstance(image, PolyElement) or image.ring != self.target:
                images[name] = self.target.embed(image) if isinstance(image, PolyElement) else self.target.constant(image)
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, ring: GradedRing, name: str = "id") -> RingMap:
        """Return the identity map."""
        return cls(name, ring, ring, {n: ring.gen(n) for n in ring.names})

    @classmethod
    def from_strings(
        cls, name: str, source: GradedRing, target: GradedRing, images: Mapping[str, str]
    ) -> RingMap:
        """Build a map from text images."""
        return cls(name, source, target, {g: target.parse(t) for g, t in images.items()})

    def __call__(self, x: PolyElement) -> PolyElement:
        """Apply the map."""
        return eval_ring_map(self, x)

    def compose(self, inner: RingMap) -> RingMap:
        """Return self after inner."""
        if inner.target != self.source:
            raise AlgebraError(f"Cannot compose {self.name} with {inner.name}")
        return RingMap(
            f"{self.name}∘{inner.name}",
            inner.source,
            self.target,
            {g: self(image) for g, image in inner.images.items()},
        )

    def is_unit_preserving(self) -> bool:
        """Return True if every invertible generator maps to a unit."""
        return all(
            self.images[n].is_unit
            for n, flag in zip(self.source.names, self.source.generators.invertible)
            if flag
        )

    def to_json(self) -> dict[str, str]:
        """Return the generator images as text."""
        return {n: str(self.images[n]) for n in self.source.names if n != ZETA}


Reducer = Callable[[PolyElement], PolyElement]


def _reduced_power(base: PolyElement, exponent: int, reducer: Reducer) -> PolyElement:
    result = base.ring.one()
    while exponent:
        if exponent & 1:
            result = reducer(result * base)
        exponent >>= 1
        if exponent:
            base = reducer(base * base)
    return result


def eval_ring_map(
    ring_map: RingMap, x: PolyElement, reducer: Reducer | None = None
) -> PolyElement:
    """Substitute the generator images into ``x``.

    With a ``reducer`` every partial product is reduced, which keeps truncated
    evaluations small.
    """
    if x.ring != ring_map.source:
        x = ring_map.source.embed(x)
    target = ring_map.target
    names = ring_map.source.names
    powers: dict[tuple[int, int], PolyElement] = {}

    def power(index: int, exponent: int) -> PolyElement:
        key = (index, exponent)
        if key not in powers:
            image = ring_map.images[names[index]]
            if exponent < 0:
                if not image.is_unit:
                    raise NotInvertibleError(
                        f"{ring_map.name}: {names[index]} maps to the non-unit {image}"
                    )
                image, exponent = image.inverse(), -exponent
            if reducer is None:
                powers[key] = image**exponent
            else:
                powers[key] = _reduced_power(image, exponent, reducer)
        return powers[key]

    result = target.zero()
    for exponents, value in x.terms():
        term = target.constant(value)
        for index, exponent in enumerate(exponents):
            if exponent:
                term = term * power(index, exponent)
                if reducer is not None:
                    term = reducer(term)
        result = result + term
    if reducer is not None:
        result = reducer(result)
    return result


def reduce_truncated(x: PolyElement, k: int, j: int, v1: str = V1) -> PolyElement:
    """Return the normal form of ``x`` modulo (2^k, v1^j)."""
    ring = x.ring
    if ring.coefficients.admits_denominator(2):
        raise AlgebraError(f"2 is invertible in {ring.coefficients}")
    if k <= 0 or j <= 0:
        return ring.zero()
    index = ring.generators.index(v1)
    modulus = 2**k
    terms: dict[Monomial, int] = {}
    for exponents, value in x.terms():
        if exponents[index] >= j:
            continue
        if value.denominator % 2 == 0:
            raise NotInvertibleError(f"{value} is not 2-integral")
        residue = value.numerator * pow(value.denominator, -1, modulus) % modulus
        if residue:
            terms[exponents] = residue
    return ring.from_terms(terms)


def truncated_reducer(k: int, j: int, v1: str = V1) -> Reducer:
    """Return the reduction modulo (2^k, v1^j) as a callable."""

    def reducer(x: PolyElement) -> PolyElement:
        return reduce_truncated(x, k, j, v1)

    return reducer


def truncated_power(x: PolyElement, exponent: int, k: int, j: int, v1: str = V1) -> PolyElement:
    """Return x^exponent modulo (2^k, v1^j) by square-and-multiply."""
    if exponent < 0:
        raise AlgebraError("Truncated powers need a non-negative exponent")
    return _reduced_power(reduce_truncated(x, k, j, v1), exponent, truncated_reducer(k, j, v1))


def cyclotomic_normalize(x: PolyElement) -> PolyElement:
    """Rewrite ``x`` in the basis 1, zeta, zeta^2, zeta^3."""
    if x.ring.zeta_index is None:
        raise AlgebraError(f"{x.ring} has no fifth root of unity")
    return PolyElement(x.ring, _reduce_zeta(x.poly, x.ring.zeta_index), x.shift)


def nu2(value: Scalar) -> int | None:
    """Return the 2-adic valuation, None for 0."""
    value = Fraction(value)
    if value == 0:
        return None
    count = 0
    numerator, denominator = value.numerator, value.denominator
    while numerator % 2 == 0:
        numerator //= 2
        count += 1
    while denominator % 2 == 0:
        denominator //= 2
        count -= 1
    return count
