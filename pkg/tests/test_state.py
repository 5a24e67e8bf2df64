"""The test for verification reports and lazily computed values."""

import logging

from qell.state import Report, compute_once_lock

_LOGGER = logging.getLogger(__name__)


class Counter:
    """Object with a lazily computed value."""

    def __init__(self) -> None:
        """Initialize the counter."""
        self._compute_states = {}
        self.calls = 0

    @property
    @compute_once_lock("value")
    def value(self) -> int:
        """Return the number of computations so far."""
        self.calls += 1
        return self.calls


def test_compute_once():
    """Test if a locked property is computed only once."""
    counter = Counter()
    assert counter.value == 1
    assert counter.value == 1
    assert counter.calls == 1


def test_report():
    """Test if failed checks make a report fail."""
    report = Report("checks")
    assert report.add("first", True)
    assert report.ok
    assert not report.add("second", False, "off by one")
    assert not report.ok
    assert [check.name for check in report.failures] == ["second"]
    assert report.summary() == "first: OK; second: FAILED"
    assert "  second: FAILED (off by one)" in report.to_text()
    assert report.to_json()["ok"] is False


def test_extend():
    """Test if reports are merged."""
    report = Report("all")
    other = Report("part")
    other.add("inner", True)
    report.extend(other)
    assert len(report.checks) == 1
