"""Exception hierarchy shared by every module.

Everything a caller can fix by changing its input derives from
:class:`RssiMotionError` (itself a ``ValueError``); the CLI maps those to exit
code 1. Filesystem problems stay plain ``OSError`` and map to exit code 2.
"""

from __future__ import annotations


class RssiMotionError(ValueError):
    """Base class for input, validation and sequencing errors."""


class DomainError(RssiMotionError):
    """A numeric argument lies outside the domain of the operation."""


class ParseError(RssiMotionError):
    """Malformed text input.

    ``line`` and ``field`` are set when the error comes from a file.
    """

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)


class SequencingError(RssiMotionError):
    """Timestamps out of order for one BSSID."""

    def __init__(self, message: str, *, previous_ms: int | None = None, current_ms: int | None = None):
        self.previous_ms = previous_ms
        self.current_ms = current_ms
        super().__init__(message)


class DuplicateSampleError(SequencingError):
    """Two samples share the same (bssid, timestamp_ms)."""


class ValidationError(RssiMotionError):
    """A structured input violates one or more invariants.

    All violations found are collected in ``violations``.
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CalibrationError(RssiMotionError):
    """Not enough clean samples to estimate a baseline."""


class ArmingError(RssiMotionError):
    """The detector was fed samples before its baseline was armed."""


class SourceFailure(RuntimeError):
    """A live sample source stopped abnormally; ``reason`` says why."""

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)
