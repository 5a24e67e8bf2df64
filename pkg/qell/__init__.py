"""Exact computations for the spectra Q(3) and Q(5).

Run ``python -m qell --help`` for the command line interface.
"""
from __future__ import annotations

import logging

from .exact_algebra import CoefficientRing, GradedRing, PolyElement, RingMap
from .exceptions import QellError

_LOGGER = logging.getLogger(__name__)

__all__ = ["CoefficientRing", "GradedRing", "PolyElement", "QellError", "RingMap"]
