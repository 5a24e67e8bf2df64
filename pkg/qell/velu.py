"""Vélu's formulas for quotients by odd-degree kernels."""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import logging

from .exact_algebra import GradedRing, PolyElement, Scalar
from .exceptions import AlgebraError
from .weierstrass import Transformation, WeierstrassCurve, transform

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelPolynomial:
    """Monic ψ(x) = xⁿ − s1xⁿ⁻¹ + s2xⁿ⁻² − …, stored by descending coefficients."""

    coefficients: tuple[PolyElement, ...]

    def __post_init__(self) -> None:
        """Check the polynomial is monic."""
        if not self.coefficients or not self.coefficients[0] == 1:
            raise AlgebraError("Kernel polynomials must be monic")

    @classmethod
    def from_coefficients(
        cls, ring: GradedRing, coefficients: Sequence[Scalar | PolyElement]
    ) -> KernelPolynomial:
        """Build ψ from its coefficients, leading one first."""
        return cls(
            tuple(
                ring.embed(c) if isinstance(c, PolyElement) else ring.constant(c)
                for c in coefficients
            )
        )

    @property
    def ring(self) -> GradedRing:
        """Return the coefficient ring."""
        return self.coefficients[0].ring

    @property
    def degree(self) -> int:
        """Return n."""
        return len(self.coefficients) - 1

    def elementary(self, i: int) -> PolyElement:
        """Return s_i, zero beyond the degree."""
        if i > self.degree:
            return self.ring.zero()
        sign = -1 if i % 2 else 1
        return sign * self.coefficients[i]

    def power_sums(self) -> tuple[PolyElement, PolyElement, PolyElement]:
        """Return the first three power sums of the roots."""
        s1, s2, s3 = (self.elementary(i) for i in (1, 2, 3))
        return s1, s1**2 - 2 * s2, s1**3 - 3 * s1 * s2 + 3 * s3

    def __str__(self) -> str:
        """Return ψ as text."""
        n = self.degree
        pieces = []
        for i, c in enumerate(self.coefficients):
            if c.is_zero:
                continue
            power = n - i
            monomial = "" if power == 0 else ("x" if power == 1 else f"x^{power}")
            if not monomial:
                pieces.append(f"({c})")
            elif c == 1:
                pieces.append(monomial)
            else:
                pieces.append(f"({c})*{monomial}")
        return " + ".join(pieces)


def velu_quotient(curve: WeierstrassCurve, kernel: KernelPolynomial) -> WeierstrassCurve:
    """Return the Weierstrass equation of the quotient by the kernel of ψ."""
    if kernel.ring != curve.ring:
        kernel = KernelPolynomial.from_coefficients(curve.ring, kernel.coefficients)
    n = kernel.degree
    p1, p2, p3 = kernel.power_sums()
    b2, b4, b6 = curve.b2, curve.b4, curve.b6
    t = 6 * p2 + b2 * p1 + n * b4
    w = 10 * p3 + 2 * b2 * p2 + 3 * b4 * p1 + n * b6
    _LOGGER.debug("Velu sums for degree %s: t has %s terms, w has %s", n, len(t), len(w))
    return WeierstrassCurve(
        curve.a1,
        curve.a2,
        curve.a3,
        curve.a4 - 5 * t,
        curve.a6 - b2 * t - 7 * w,
    )


def three_torsion_curve(ring: GradedRing) -> WeierstrassCurve:
    """Return y² + a1xy + a3y = x³ with the 3-torsion point (0,0)."""
    zero = ring.zero()
    return WeierstrassCurve(ring.gen("a1"), zero, ring.gen("a3"), zero, zero)


def three_torsion_kernel(ring: GradedRing) -> KernelPolynomial:
    """Return ψ = x."""
    return KernelPolynomial.from_coefficients(ring, [1, 0])


def three_torsion_normalization(ring: GradedRing) -> Transformation:
    """Return the change (0,0,a3,1) that turns raw Vélu output into q*."""
    return Transformation(ring.zero(), ring.zero(), ring.gen("a3"), ring.one())


def three_torsion_quotient(ring: GradedRing) -> WeierstrassCurve:
    """Return the normalized quotient of y² + a1xy + a3y = x³ by ⟨(0,0)⟩."""
    raw = velu_quotient(three_torsion_curve(ring), three_torsion_kernel(ring))
    return transform(raw, three_torsion_normalization(ring))


def five_torsion_kernel(curve: WeierstrassCurve) -> KernelPolynomial:
    """Return ψ = x(x + a2) for the subgroup generated by (0,0) on T¹."""
    return KernelPolynomial.from_coefficients(curve.ring, [1, curve.a2, 0])
