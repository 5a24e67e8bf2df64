"""Shared verification reports and computation state."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import wraps
import logging
from threading import Lock
from typing import Any

_LOGGER = logging.getLogger(__name__)


@dataclass
class ComputeState:
    """Lazily computed value state."""

    needs_update: bool = True
    lock: Lock = field(default_factory=Lock)


def compute_once_lock(key: str):
    """Only compute if ``key`` needs update, return the stored value otherwise."""

    def wrapper(func):
        @wraps(func)
        def wrapped(self, *args, **kwargs):
            state = self._compute_states.setdefault(key, ComputeState())
            with state.lock:
                if state.needs_update:
                    setattr(self, f"_{key}", func(self, *args, **kwargs))
                    state.needs_update = False
                return getattr(self, f"_{key}", None)

        return wrapped

    return wrapper


@dataclass
class CheckResult:
    """Outcome of a single verification."""

    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict[str, Any]:
        """Return a JSON-ready dict."""
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class Report:
    """Collection of verification outcomes."""

    title: str
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> bool:
        """Record a check and return its outcome."""
        self.checks.append(CheckResult(name, bool(passed), detail))
        if not passed:
            _LOGGER.warning("%s: check %s failed %s", self.title, name, detail)
        return bool(passed)

    def extend(self, other: Report) -> None:
        """Append the checks of another report."""
        self.checks.extend(other.checks)

    @property
    def ok(self) -> bool:
        """Return True if every check passed."""
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        """Return the failed checks."""
        return [check for check in self.checks if not check.passed]

    def summary(self) -> str:
        """Return ``name: OK`` pairs joined by semicolons."""
        return "; ".join(
            f"{check.name}: {'OK' if check.passed else 'FAILED'}" for check in self.checks
        )

    def to_text(self) -> str:
        """Return one line per check."""
        lines = [self.title]
        for check in self.checks:
            status = "OK" if check.passed else "FAILED"
            lines.append(f"  {check.name}: {status}" + (f" ({check.detail})" if check.detail else ""))
        return "\n".join(lines)

    def to_json(self) -> dict[str, Any]:
        """Return a JSON-ready dict."""
        return {
            "title": self.title,
            "ok": self.ok,
            "checks": [check.to_json() for check in self.checks],
        }
