"""Exception types shared across the package."""

from __future__ import annotations


class TtdError(Exception):
    """Base class for all errors raised by this package."""


class GuestSyntaxError(TtdError):
    def __init__(self, message: str, script: str, line: int, col: int):
        super().__init__(f"{script}:{line}:{col}: {message}")
        self.script = script
        self.line = line
        self.col = col


class GuestRuntimeError(TtdError):
    """Uncaught guest-level error. Carries a stable `kind` for event outcomes."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class BudgetExceeded(GuestRuntimeError):
    def __init__(self, limit: int):
        super().__init__("budget-exceeded", f"statement budget exceeded ({limit})")


class ScenarioError(TtdError):
    """Scenario file failed validation."""


class TraceIntegrityError(TtdError):
    """Trace file is malformed, truncated, or fails its checksum."""


class TravelError(TtdError):
    """A time-travel target was never reached during replay of its event."""
