"""Errors raised by qell."""


class QellError(Exception):
    """Base class for qell errors."""


class AlgebraError(QellError, ValueError):
    """An algebraic operation is not defined on its input."""


class NotInvertibleError(AlgebraError):
    """Division by, or negative power of, an element that is not a unit."""


class UnknownGeneratorError(AlgebraError):
    """A generator name is not part of the ring."""


class MixedWeightError(AlgebraError):
    """An inhomogeneous element was given where a weight is required."""


class AmbiguousCaseError(AlgebraError):
    """The group law case split cannot be decided by exact comparison."""


class IncompatibleTruncationError(AlgebraError):
    """Chromatic fractions were combined under different truncations."""


class VerificationError(QellError):
    """A mathematical identity that must hold failed."""
