"""Weierstrass curves over symbolic rings."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import logging
from random import Random
from typing import Any, Union

from .exact_algebra import (
    CoefficientRing,
    GradedRing,
    PolyElement,
    RationalFunction,
    RingMap,
    Scalar,
)
from .exceptions import AlgebraError, AmbiguousCaseError, NotInvertibleError
from .state import Report

_LOGGER = logging.getLogger(__name__)

WEIERSTRASS_NAMES = ("a1", "a2", "a3", "a4", "a6")
WEIERSTRASS_WEIGHTS = (1, 2, 3, 4, 6)
POINT_NAMES = ("x", "y")
POINT_WEIGHTS = (2, 3)

Coordinate = Union[PolyElement, RationalFunction, int]


def _as_fraction(value: Coordinate, ring: GradedRing) -> RationalFunction:
    if isinstance(value, RationalFunction):
        return value
    if isinstance(value, PolyElement):
        return RationalFunction(value)
    return RationalFunction(ring.constant(value))


@dataclass(frozen=True)
class Transformation:
    """Coordinate change x = λ⁻²x′ + r, y = λ⁻³y′ + λ⁻²sx′ + t."""

    r: PolyElement
    s: PolyElement
    t: PolyElement
    lam: PolyElement

    def __post_init__(self) -> None:
        """Check λ is a unit."""
        if not self.lam.is_unit:
            raise NotInvertibleError(f"λ = {self.lam} is not a unit")

    @classmethod
    def identity(cls, ring: GradedRing) -> Transformation:
        """Return (0,0,0,1)."""
        return cls(ring.zero(), ring.zero(), ring.zero(), ring.one())

    @classmethod
    def from_values(
        cls, ring: GradedRing, r: Scalar | PolyElement = 0, s: Scalar | PolyElement = 0,
        t: Scalar | PolyElement = 0, lam: Scalar | PolyElement = 1,
    ) -> Transformation:
        """Build a transformation from constants or elements."""

        def lift(value: Scalar | PolyElement) -> PolyElement:
            return value if isinstance(value, PolyElement) else ring.constant(value)

        return cls(lift(r), lift(s), lift(t), lift(lam))

    @property
    def ring(self) -> GradedRing:
        """Return the ring of the parameters."""
        return self.r.ring

    def compose(self, other: Transformation) -> Transformation:
        """Return the transformation applying self first and then other."""
        inv = self.lam.inverse()
        return Transformation(
            self.r + inv**2 * other.r,
            self.s + inv * other.s,
            self.t + inv**2 * self.s * other.r + inv**3 * other.t,
            self.lam * other.lam,
        )

    def inverse(self) -> Transformation:
        """Return the inverse transformation."""
        lam = self.lam
        return Transformation(
            -(lam**2) * self.r,
            -lam * self.s,
            lam**3 * (self.s * self.r - self.t),
            lam.inverse(),
        )

    def is_identity(self) -> bool:
        """Return True for (0,0,0,1)."""
        return self.r.is_zero and self.s.is_zero and self.t.is_zero and self.lam == 1

    def to_json(self) -> dict[str, str]:
        """Return the parameters as text."""
        return {"r": str(self.r), "s": str(self.s), "t": str(self.t), "lambda": str(self.lam)}


@dataclass(frozen=True)
class CurvePoint:
    """Point at infinity or an affine point with rational-function coordinates."""

    x: RationalFunction | None = None
    y: RationalFunction | None = None

    @classmethod
    def infinity(cls) -> CurvePoint:
        """Return the point at infinity."""
        return cls()

    @classmethod
    def affine(cls, ring: GradedRing, x: Coordinate, y: Coordinate) -> CurvePoint:
        """Return an affine point."""
        return cls(_as_fraction(x, ring), _as_fraction(y, ring))

    @property
    def is_infinity(self) -> bool:
        """Return True for the point at infinity."""
        return self.x is None

    def __eq__(self, other: object) -> bool:
        """Compare points as rational functions."""
        if not isinstance(other, CurvePoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.x == other.x and self.y == other.y

    def __str__(self) -> str:
        """Return the coordinates as text."""
        return "∞" if self.is_infinity else f"({self.x}, {self.y})"

    def to_json(self) -> list[str] | str:
        """Return the coordinates as text."""
        return "infinity" if self.is_infinity else [str(self.x), str(self.y)]


@dataclass(frozen=True)
class WeierstrassCurve:
    """Curve y² + a1xy + a3y = x³ + a2x² + a4x + a6."""

    a1: PolyElement
    a2: PolyElement
    a3: PolyElement
    a4: PolyElement
    a6: PolyElement

    def __post_init__(self) -> None:
        """Check the coefficients share a ring."""
        rings = {c.ring for c in self.coefficients}
        if len(rings) != 1:
            raise AlgebraError("Weierstrass coefficients live in different rings")

    @classmethod
    def from_list(cls, ring: GradedRing, values: Sequence[Scalar | PolyElement | str]) -> WeierstrassCurve:
        """Build a curve from [a1, a2, a3, a4, a6]."""
        if len(values) != 5:
            raise AlgebraError(f"A Weierstrass curve needs 5 coefficients, got {len(values)}")
        lifted = []
        for value in values:
            if isinstance(value, PolyElement):
                lifted.append(ring.embed(value))
            elif isinstance(value, str):
                lifted.append(ring.parse(value))
            else:
                lifted.append(ring.constant(value))
        return cls(*lifted)

    @classmethod
    def universal(cls, ring: GradedRing) -> WeierstrassCurve:
        """Return the curve whose coefficients are the generators a1..a6."""
        return cls(*(ring.gen(name) for name in WEIERSTRASS_NAMES))

    @property
    def ring(self) -> GradedRing:
        """Return the coefficient ring."""
        return self.a1.ring

    @property
    def coefficients(self) -> tuple[PolyElement, ...]:
        """Return (a1, a2, a3, a4, a6)."""
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b2(self) -> PolyElement:
        """Return b2."""
        return self.a1**2 + 4 * self.a2

    @cached_property
    def b4(self) -> PolyElement:
        """Return b4."""
        return self.a1 * self.a3 + 2 * self.a4

    @cached_property
    def b6(self) -> PolyElement:
        """Return b6."""
        return self.a3**2 + 4 * self.a6

    @cached_property
    def b8(self) -> PolyElement:
        """Return b8."""
        a1, a2, a3, a4, a6 = self.coefficients
        return a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2

    @cached_property
    def c4(self) -> PolyElement:
        """Return c4."""
        return self.b2**2 - 24 * self.b4

    @cached_property
    def c6(self) -> PolyElement:
        """Return c6."""
        return -(self.b2**3) + 36 * self.b2 * self.b4 - 216 * self.b6

    @cached_property
    def discriminant(self) -> PolyElement:
        """Return Δ."""
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6

    def invariants(self) -> dict[str, PolyElement]:
        """Return b2, b4, b6, c4, c6 and Δ."""
        return {
            "b2": self.b2,
            "b4": self.b4,
            "b6": self.b6,
            "c4": self.c4,
            "c6": self.c6,
            "Delta": self.discriminant,
        }

    def equation(self, x: Any, y: Any) -> Any:
        """Return y² + a1xy + a3y − x³ − a2x² − a4x − a6 at (x, y)."""
        a1, a2, a3, a4, a6 = self.coefficients
        return y * y + a1 * x * y + a3 * y - x * x * x - a2 * x * x - a4 * x - a6

    def two_torsion_polynomial(self, x: Any) -> Any:
        """Return 4x³ + b2x² + 2b4x + b6."""
        return 4 * x * x * x + self.b2 * x * x + 2 * self.b4 * x + self.b6

    def contains(self, point: CurvePoint) -> bool:
        """Return True if the point satisfies the curve equation."""
        if point.is_infinity:
            return True
        return self.equation(point.x, point.y) == 0

    def transform(self, change: Transformation) -> WeierstrassCurve:
        """Apply a coordinate change."""
        return transform(self, change)

    def map_coefficients(self, ring_map: RingMap) -> WeierstrassCurve:
        """Push the curve along a ring map."""
        return WeierstrassCurve(*(ring_map(c) for c in self.coefficients))

    def __eq__(self, other: object) -> bool:
        """Compare coefficients."""
        if not isinstance(other, WeierstrassCurve):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self) -> int:
        """Hash the coefficients."""
        return hash(self.coefficients)

    def __str__(self) -> str:
        """Return the coefficients as text."""
        return "[" + ", ".join(str(c) for c in self.coefficients) + "]"

    def to_json(self) -> list[str]:
        """Return [a1, a2, a3, a4, a6] as polynomial strings."""
        return [str(c) for c in self.coefficients]


def curve_invariants(curve: WeierstrassCurve) -> dict[str, PolyElement]:
    """Return b2, b4, b6, c4, c6 and Δ of a curve."""
    return curve.invariants()


def transform(curve: WeierstrassCurve, change: Transformation) -> WeierstrassCurve:
    """Return the curve in the coordinates of ``change``."""
    a1, a2, a3, a4, a6 = curve.coefficients
    r, s, t, lam = change.r, change.s, change.t, change.lam
    if r.ring != curve.ring:
        r, s, t, lam = (curve.ring.embed(v) for v in (r, s, t, lam))
    return WeierstrassCurve(
        lam * (a1 + 2 * s),
        lam**2 * (a2 - s * a1 + 3 * r - s**2),
        lam**3 * (a3 + r * a1 + 2 * t),
        lam**4 * (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r**2 - 2 * s * t),
        lam**6 * (a6 + r * a4 + r**2 * a2 + r**3 - t * a3 - t**2 - r * t * a1),
    )


def transform_point(point: CurvePoint, change: Transformation) -> CurvePoint:
    """Return the coordinates of ``point`` after the coordinate change."""
    if point.is_infinity:
        return point
    r, s, t, lam = change.r, change.s, change.t, change.lam
    shifted = point.x - r
    return CurvePoint(lam**2 * shifted, lam**3 * (point.y - s * shifted - t))


def negate_point(curve: WeierstrassCurve, point: CurvePoint) -> CurvePoint:
    """Return −P."""
    if point.is_infinity:
        return point
    return CurvePoint(point.x, -point.y - curve.a1 * point.x - curve.a3)


def add_points(curve: WeierstrassCurve, first: CurvePoint, second: CurvePoint) -> CurvePoint:
    """Return the chord-tangent sum of two points."""
    if first.is_infinity:
        return second
    if second.is_infinity:
        return first
    a1, a2, a3, a4, a6 = curve.coefficients
    x1, y1, x2, y2 = first.x, first.y, second.x, second.y
    if x1 == x2:
        if y2 == -y1 - a1 * x1 - a3:
            return CurvePoint.infinity()
        if not y1 == y2:
            raise AmbiguousCaseError(
                f"Cannot decide the case split for {first} and {second}"
            )
        denominator = 2 * y1 + a1 * x1 + a3
        if denominator.is_zero:
            raise AmbiguousCaseError(f"Tangent at {first} is vertical")
        slope = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / denominator
        intercept = (-(x1 * x1 * x1) + a4 * x1 + 2 * a6 - a3 * y1) / denominator
    else:
        delta = x2 - x1
        slope = (y2 - y1) / delta
        intercept = (y1 * x2 - y2 * x1) / delta
    x3 = slope * slope + a1 * slope - a2 - x1 - x2
    y3 = -(slope + a1) * x3 - intercept - a3
    return CurvePoint(x3, y3)


def multiply_point(curve: WeierstrassCurve, n: int, point: CurvePoint) -> CurvePoint:
    """Return [n]P by double-and-add."""
    if n < 0:
        return multiply_point(curve, -n, negate_point(curve, point))
    result = CurvePoint.infinity()
    addend = point
    while n:
        if n & 1:
            result = add_points(curve, result, addend)
        n >>= 1
        if n:
            addend = add_points(curve, addend, addend)
    return result


def point_ring(curve: WeierstrassCurve) -> GradedRing:
    """Return the coefficient ring extended by the coordinates x and y."""
    return curve.ring.extend(POINT_NAMES, POINT_WEIGHTS)


class _DivisionPolynomials:
    """Memoized f_n with ψ_n = f_n for odd n and ψ_n = ψ₂f_n for even n."""

    def __init__(self, curve: WeierstrassCurve) -> None:
        self.ring = point_ring(curve)
        embed = self.ring.embed
        self.x = self.ring.gen("x")
        b2, b4, b6, b8 = (embed(v) for v in (curve.b2, curve.b4, curve.b6, curve.b8))
        x = self.x
        self.two_torsion = 4 * x**3 + b2 * x**2 + 2 * b4 * x + b6
        self.psi2 = 2 * self.ring.gen("y") + embed(curve.a1) * x + embed(curve.a3)
        self.values = {
            0: self.ring.zero(),
            1: self.ring.one(),
            2: self.ring.one(),
            3: 3 * x**4 + b2 * x**3 + 3 * b4 * x**2 + 3 * b6 * x + b8,
            4: 2 * x**6 + b2 * x**5 + 5 * b4 * x**4 + 10 * b6 * x**3 + 10 * b8 * x**2
            + (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6**2),
        }

    def f(self, n: int) -> PolyElement:
        if n in self.values:
            return self.values[n]
        m = n // 2
        f = self.f
        if n % 2:
            square = self.two_torsion**2
            if m % 2 == 0:
                value = square * f(m + 2) * f(m) ** 3 - f(m - 1) * f(m + 1) ** 3
            else:
                value = f(m + 2) * f(m) ** 3 - square * f(m - 1) * f(m + 1) ** 3
        else:
            value = f(m) * (f(m + 2) * f(m - 1) ** 2 - f(m - 2) * f(m + 1) ** 2)
        _LOGGER.debug("Division polynomial f_%s has %s terms", n, len(value))
        self.values[n] = value
        return value

    def psi(self, n: int) -> PolyElement:
        return self.f(n) if n % 2 else self.psi2 * self.f(n)


def division_polynomial(curve: WeierstrassCurve, n: int) -> PolyElement:
    """Return ψ_n in the ring of :func:`point_ring`."""
    if n < 1:
        raise AlgebraError(f"Division polynomials need n ≥ 1, got {n}")
    return _DivisionPolynomials(curve).psi(n)


def evaluate_at_point(value: PolyElement, curve: WeierstrassCurve, point: CurvePoint) -> RationalFunction:
    """Substitute the coordinates of an affine point for x and y."""
    if point.is_infinity:
        raise AlgebraError("Cannot evaluate at the point at infinity")
    ring = curve.ring
    images = {name: ring.gen(name) for name in ring.names}
    if point.x.denominator == 1 and point.y.denominator == 1:
        images.update(x=point.x.numerator, y=point.y.numerator)
        return RationalFunction(RingMap("at-point", value.ring, ring, images)(value))
    total = RationalFunction(ring.zero())
    names = value.ring.names
    for exponents, coefficient in value.terms():
        term = RationalFunction(ring.constant(coefficient))
        for name, e in zip(names, exponents):
            if not e:
                continue
            if name == "x":
                term = term * point.x**e
            elif name == "y":
                term = term * point.y**e
            else:
                term = term * ring.gen(name) ** e
        total = total + term
    return total


@dataclass(frozen=True)
class NormalForm:
    """Tate normal form of a curve with a point, and the witnessing change."""

    curve: WeierstrassCurve
    transformation: Transformation
    parameters: tuple[PolyElement, PolyElement] | None = None


def tate_normal_form(
    curve: WeierstrassCurve, point: CurvePoint, homogeneous: bool = False
) -> NormalForm:
    """Move ``point`` to (0,0) and bring the curve to Tate normal form.

    The first change translates the point to the origin, the second clears
    a4, and unless ``homogeneous`` is set the third rescales so the y- and
    x²-coefficients agree. The rescaled curve is checked against T(b, c)
    and (b, c) is returned with it.
    """
    if point.is_infinity:
        raise AlgebraError("The point at infinity has no Tate normal form")
    if not curve.contains(point):
        raise AlgebraError(f"{point} does not lie on {curve}")
    ring = curve.ring
    alpha, beta = point.x.to_element(), point.y.to_element()
    change = Transformation(alpha, ring.zero(), beta, ring.one())
    moved = transform(curve, change)
    _LOGGER.debug("Translated point to the origin: %s", moved)

    shear = Transformation(ring.zero(), moved.a4 / moved.a3, ring.zero(), ring.one())
    change = change.compose(shear)
    moved = transform(moved, shear)

    if homogeneous:
        _LOGGER.debug("Homogeneous Tate normal form %s via %s", moved, change.to_json())
        return NormalForm(moved, change)

    if moved.a2.is_zero:
        raise NotInvertibleError(f"a2 vanishes on {moved}; the point has order 3")
    scale = moved.a2 / moved.a3
    if not scale.is_unit:
        raise NotInvertibleError(f"λ = {scale} is not a unit in {ring}")
    b, c = (value.to_element() for value in tate_parameters(moved))
    rescale = Transformation(ring.zero(), ring.zero(), ring.zero(), scale)
    change = change.compose(rescale)
    moved = transform(moved, rescale)
    if moved != tate_curve_bc(b, c):
        raise AlgebraError(f"{moved} is not T({b}, {c})")
    _LOGGER.debug("Tate normal form %s via %s", moved, change.to_json())
    return NormalForm(moved, change, (b, c))


def tate_parameters(curve: WeierstrassCurve) -> tuple[RationalFunction, RationalFunction]:
    """Return (b, c) with b = −a2³/a3², c = 1 − a1a2/a3 for a homogeneous form."""
    a1, a2, a3 = (RationalFunction(v) for v in (curve.a1, curve.a2, curve.a3))
    return -(a2**3) / a3**2, 1 - a1 * a2 / a3


def tate_ring(coefficients: CoefficientRing | None = None) -> GradedRing:
    """Return ℤ[b] for the curves T(b)."""
    return GradedRing.create(["b"], [0], coefficients, name="Z[b]")


def tate_curve(b: PolyElement) -> WeierstrassCurve:
    """Return T(b) = [1−b, −b, −b, 0, 0]."""
    zero = b.ring.zero()
    return WeierstrassCurve(1 - b, -b, -b, zero, zero)


def tate_curve_bc(b: PolyElement, c: PolyElement) -> WeierstrassCurve:
    """Return T(b, c) = [1−c, −b, −b, 0, 0]."""
    zero = b.ring.zero()
    return WeierstrassCurve(1 - c, -b, -b, zero, zero)


def homogeneous_tate_ring(coefficients: CoefficientRing | None = None) -> GradedRing:
    """Return the ring of T¹ coefficients a1, a2, a3."""
    return GradedRing.create(
        ["a1", "a2", "a3"], [1, 2, 3], coefficients or CoefficientRing.localized(5), name="B1"
    )


def homogeneous_tate_curve(a1: PolyElement, a2: PolyElement, a3: PolyElement) -> WeierstrassCurve:
    """Return T¹(a1, a2, a3) = [a1, a2, a3, 0, 0]."""
    zero = a1.ring.zero()
    return WeierstrassCurve(a1, a2, a3, zero, zero)


def a1u_ring(coefficients: CoefficientRing | None = None) -> GradedRing:
    """Return ℤ[1/5][a1, u]."""
    return GradedRing.create(
        ["a1", "u"], [1, 1], coefficients or CoefficientRing.localized(5), name="MF5"
    )


def a1u_curve(ring: GradedRing) -> WeierstrassCurve:
    """Return T¹ with a2 = u(a1−u), a3 = u²(a1−u)."""
    a1, u = ring.gen("a1"), ring.gen("u")
    return homogeneous_tate_curve(a1, u * (a1 - u), u**2 * (a1 - u))


def _random_change(ring: GradedRing, rng: Random) -> Transformation:
    def draw() -> Fraction:
        return Fraction(rng.randint(-9, 9), rng.randint(1, 9))

    lam = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
    return Transformation.from_values(ring, draw(), draw(), draw(), lam)


def tate_round_trip_check(
    b_values: Sequence[Scalar], seed: int = 5, samples: int = 100
) -> Report:
    """Perturb (T(b), (0,0)) by random changes over ℚ and recover T(b)."""
    ring = tate_ring(CoefficientRing.rationals())
    rng = Random(seed)
    report = Report("Tate normal form round trip")
    for b in b_values:
        curve = tate_curve(ring.constant(b))
        origin = CurvePoint.affine(ring, 0, 0)
        failures = 0
        for _ in range(samples):
            change = _random_change(ring, rng)
            moved = transform(curve, change)
            normal = tate_normal_form(moved, transform_point(origin, change)).curve
            if normal != curve:
                _LOGGER.debug("Recovered %s instead of %s via %s", normal, curve, change.to_json())
                failures += 1
        report.add(f"b = {b}", not failures, f"{samples} changes, {failures} failures")
    return report


def order_five_check() -> Report:
    """Certify that (0,0) has order 5 on T(b) over ℤ[b]."""
    ring = tate_ring()
    curve = tate_curve(ring.gen("b"))
    origin = CurvePoint.affine(ring, 0, 0)
    report = Report("Order five certificate")
    report.add("[5](0,0) is infinity", multiply_point(curve, 5, origin).is_infinity)
    report.add("[4](0,0) is not infinity", not multiply_point(curve, 4, origin).is_infinity)
    psi5 = evaluate_at_point(division_polynomial(curve, 5), curve, origin)
    report.add("psi_5(0,0) vanishes", psi5.is_zero)
    return report
