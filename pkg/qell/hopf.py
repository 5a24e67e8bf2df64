"""Weierstrass and Γ₀(5) Hopf algebroid structure maps."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import logging
from random import Random

from sympy.polys.domains import GF
from sympy.polys.domains.finitefield import FiniteField

from .const import DEFAULT_PRIME, DEFAULT_RELATION_SAMPLES, DEFAULT_SEED
from .exact_algebra import CoefficientRing, GradedRing, PolyElement, RingMap
from .exceptions import AmbiguousCaseError
from .state import Report
from .weierstrass import (
    WEIERSTRASS_NAMES,
    WEIERSTRASS_WEIGHTS,
    CurvePoint,
    Transformation,
    WeierstrassCurve,
    homogeneous_tate_curve,
    homogeneous_tate_ring,
    multiply_point,
    transform,
)

_LOGGER = logging.getLogger(__name__)

MORPHISM_NAMES = ("r", "s", "t")
MORPHISM_WEIGHTS = (2, 1, 3)


@dataclass(frozen=True)
class HopfAlgebroid:
    """Object ring, morphism ring and structure maps of a Hopf algebroid."""

    name: str
    objects: GradedRing
    morphisms: GradedRing
    eta_left: RingMap
    eta_right: RingMap
    coproduct: RingMap
    curve: WeierstrassCurve
    transformed: WeierstrassCurve

    def right_unit(self, x: PolyElement) -> PolyElement:
        """Return η_R(x)."""
        return self.eta_right(self.objects.embed(x))

    def left_unit(self, x: PolyElement) -> PolyElement:
        """Return η_L(x)."""
        return self.eta_left(self.objects.embed(x))

    def cobar_d0(self, x: PolyElement) -> PolyElement:
        """Return η_R(x) − η_L(x)."""
        x = self.objects.embed(x)
        return self.eta_right(x) - self.eta_left(x)

    def universal_transformation(self) -> Transformation:
        """Return (r, s, t, 1) over the morphism ring."""
        ring = self.morphisms
        return Transformation(ring.gen("r"), ring.gen("s"), ring.gen("t"), ring.one())


def _tensor_ring(morphisms: GradedRing, objects: GradedRing) -> GradedRing:
    names = [f"{n}{i}" for i in (1, 2) for n in MORPHISM_NAMES]
    return objects.extend(names, list(MORPHISM_WEIGHTS) * 2, name=f"{morphisms.name}⊗{morphisms.name}")


def _build(name: str, objects: GradedRing, curve: WeierstrassCurve, read: tuple[str, ...]) -> HopfAlgebroid:
    morphisms = objects.extend(MORPHISM_NAMES, MORPHISM_WEIGHTS, name=f"{name}.morphisms")
    embedded = WeierstrassCurve(*(morphisms.embed(c) for c in curve.coefficients))
    universal = Transformation(
        morphisms.gen("r"), morphisms.gen("s"), morphisms.gen("t"), morphisms.one()
    )
    transformed = transform(embedded, universal)
    images = dict(zip(WEIERSTRASS_NAMES, transformed.coefficients))
    eta_left = RingMap(
        "eta_L", objects, morphisms, {n: morphisms.gen(n) for n in objects.names}
    )
    eta_right = RingMap("eta_R", objects, morphisms, {n: images[n] for n in read})

    tensor = _tensor_ring(morphisms, objects)
    first = Transformation(tensor.gen("r1"), tensor.gen("s1"), tensor.gen("t1"), tensor.one())
    second = Transformation(tensor.gen("r2"), tensor.gen("s2"), tensor.gen("t2"), tensor.one())
    composite = first.compose(second)
    coproduct_images = {n: tensor.gen(n) for n in objects.names}
    coproduct_images.update(r=composite.r, s=composite.s, t=composite.t)
    coproduct = RingMap("coproduct", morphisms, tensor, coproduct_images)
    _LOGGER.debug("Built Hopf algebroid %s over %s", name, objects)
    return HopfAlgebroid(
        name, objects, morphisms, eta_left, eta_right, coproduct, embedded, transformed
    )


def weierstrass_algebroid(coefficients: CoefficientRing | None = None) -> HopfAlgebroid:
    """Return (A, Γ) with A = ℤ[a1, a2, a3, a4, a6]."""
    objects = GradedRing.create(
        WEIERSTRASS_NAMES, WEIERSTRASS_WEIGHTS, coefficients, name="A"
    )
    return _build("Gamma", objects, WeierstrassCurve.universal(objects), WEIERSTRASS_NAMES)


def gamma0_5_algebroid(coefficients: CoefficientRing | None = None) -> HopfAlgebroid:
    """Return (B¹, Λ¹) with B¹ = ℤ[1/5][a1, a2, a3] and Λ¹ presented over B¹[r, s, t]."""
    objects = homogeneous_tate_ring(coefficients)
    curve = homogeneous_tate_curve(*(objects.gen(n) for n in ("a1", "a2", "a3")))
    return _build("Lambda1", objects, curve, ("a1", "a2", "a3"))


def lambda1_relations(algebroid: HopfAlgebroid) -> dict[str, PolyElement]:
    """Return the three defining relations of Λ¹ as LHS − RHS."""
    ring = algebroid.morphisms
    a1, a2, a3, r, s, t = (ring.gen(n) for n in ("a1", "a2", "a3", "r", "s", "t"))
    first = 3 * r**2 - (2 * s * t + a1 * r * s + a3 * s + a1 * t - 2 * a2 * r)
    second = t**2 - (r**3 + a2 * r**2 - a1 * r * t - a3 * t)
    rhs = (
        -3 * a1 * s**5 + 9 * r * s**4 + 3 * a2 * s**4 - 3 * a1**2 * s**4
        + 4 * t * s**3 + 20 * a1 * r * s**3 + 6 * a1 * a2 * s**3 + 2 * a3 * s**3
        - a1**3 * s**3 + 6 * a1 * t * s**2 - 27 * r**2 * s**2 - 18 * a2 * r * s**2
        + 12 * a1**2 * r * s**2 - 3 * a2**2 * s**2 + 3 * a1**2 * a2 * s**2
        + 3 * a1 * a3 * s**2 - 12 * r * t * s - 4 * a2 * t * s + 2 * a1**2 * t * s
        - 33 * a1 * r**2 * s - 20 * a1 * a2 * r * s - 6 * a3 * r * s + a1**3 * r * s
        - 3 * a1 * a2**2 * s - 2 * a3 * a2 * s + a1**2 * a3 * s + 4 * t**2
        - 2 * a1 * r * t - 2 * a1 * a2 * t + 4 * a3 * t + 27 * r**3 + 27 * a2 * r**2
        - 2 * a1**2 * r**2 + 9 * a2**2 * r - a1**2 * a2 * r - a1 * a3 * r
    )
    third = s**6 - rhs
    return {"a4": first, "a6": second, "s6": third}


def _random_points(rng: Random, samples: int) -> list[dict[str, Fraction]]:
    """Return evaluations of (a1, a2, a3, r, s, t) at transformations preserving T¹."""
    ring = GradedRing.create(["c"], [0], CoefficientRing.rationals())
    points: list[dict[str, Fraction]] = []
    attempts = 0
    while len(points) < samples and attempts < 20 * samples:
        attempts += 1
        a1 = Fraction(rng.randint(-30, 30), rng.randint(1, 6))
        u = Fraction(rng.randint(-30, 30), rng.randint(1, 6))
        a2, a3 = u * (a1 - u), u**2 * (a1 - u)
        curve = homogeneous_tate_curve(*(ring.constant(v) for v in (a1, a2, a3)))
        if curve.discriminant.is_zero:
            continue
        origin = CurvePoint.affine(ring, 0, 0)
        k = rng.randint(1, 4)
        try:
            multiple = multiply_point(curve, k, origin)
        except AmbiguousCaseError:
            continue
        if multiple.is_infinity:
            continue
        r = multiple.x.to_element().constant_value()
        t = multiple.y.to_element().constant_value()
        denominator = 2 * t + a1 * r + a3
        if denominator == 0:
            continue
        s = (3 * r**2 - a1 * t + 2 * a2 * r) / denominator
        points.append({"a1": a1, "a2": a2, "a3": a3, "r": r, "s": s, "t": t})
    return points


def _reduce_mod(value: Fraction, field: FiniteField):
    """Return the image of a rational in 𝔽_p, None if p divides the denominator."""
    if value.denominator % field.mod == 0:
        return None
    return field(value.numerator) / field(value.denominator)


def evaluate_mod(relation: PolyElement, point: dict[str, Fraction], prime: int) -> int | None:
    """Evaluate a relation over 𝔽_p at the reduction of a rational point."""
    field = GF(prime)
    reduced = {name: _reduce_mod(Fraction(value), field) for name, value in point.items()}
    if any(v is None for v in reduced.values()):
        return None
    names = relation.ring.names
    total = field.zero
    for exponents, coefficient in relation.terms():
        term = _reduce_mod(Fraction(coefficient), field)
        if term is None:
            return None
        for name, e in zip(names, exponents):
            if e:
                term *= reduced[name] ** e
        total += term
    return int(total) % prime


def lambda1_relations_check(
    seed: int = DEFAULT_SEED, samples: int = DEFAULT_RELATION_SAMPLES, prime: int = DEFAULT_PRIME
) -> Report:
    """Check the Λ¹ relations against the transformed homogeneous Tate curve.

    The relations are compared as polynomials, then evaluated over 𝔽_p at the
    reductions of ``samples`` points of T¹ moved to the origin.
    """
    algebroid = gamma0_5_algebroid()
    relations = lambda1_relations(algebroid)
    transformed = algebroid.transformed
    report = Report("Lambda1 relations")
    report.add("a4' = 3r^2 - (2st + a1rs + a3s + a1t - 2a2r)", transformed.a4 == relations["a4"])
    report.add("a6' = r^3 + a2r^2 - a1rt - a3t - t^2", transformed.a6 == -relations["a6"])

    identity = {"r": 0, "s": 0, "t": 0, "a1": 1, "a2": 2, "a3": 3}
    report.add(
        "identity transformation",
        all(rel.evaluate(identity) == 0 for rel in relations.values()),
    )

    points = _random_points(Random(seed), samples)
    for key, relation in relations.items():
        values = [evaluate_mod(relation, p, prime) for p in points]
        evaluated = [v for v in values if v is not None]
        failures = [v for v in evaluated if v]
        report.add(
            f"F_{prime} points: {key}",
            not failures and bool(evaluated),
            f"{len(evaluated)} points, {len(failures)} failures",
        )
    _LOGGER.info("Checked Lambda1 relations at %s random points over F_%s", len(points), prime)
    return report


def right_unit(x: PolyElement, algebroid: HopfAlgebroid | None = None) -> PolyElement:
    """Return η_R(x) in (A, Γ) unless another algebroid is given."""
    return (algebroid or weierstrass_algebroid()).right_unit(x)


def cobar_d0(x: PolyElement, algebroid: HopfAlgebroid | None = None) -> PolyElement:
    """Return the degree-0 cobar differential in (A, Γ) unless another algebroid is given."""
    return (algebroid or weierstrass_algebroid()).cobar_d0(x)
