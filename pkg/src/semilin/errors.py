"""Shared exception types and resource caps (coset cap, wall-clock budget)."""

from __future__ import annotations

import time


class NotPointedError(ValueError):
    """Raised when an operation needs a pointed cone but the input has a line."""


class PatternTooLargeError(ValueError):
    def __init__(self, needed: int, cap: int):
        super().__init__(f"pattern too large: {needed} cosets exceed cap {cap}")
        self.needed = needed
        self.cap = cap


class ResourceCapError(RuntimeError):
    """Wall-clock budget exhausted."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class Caps:
    """Runaway guards: explicit coset cap and optional wall-clock budget."""

    def __init__(self, max_cosets: int = 100000, budget_seconds: float | None = None):
        self.max_cosets = max_cosets
        self.budget_seconds = budget_seconds
        self.started = time.monotonic()

    def check_budget(self):
        if self.budget_seconds is not None:
            if time.monotonic() - self.started > self.budget_seconds:
                raise ResourceCapError(
                    f"budget of {self.budget_seconds} seconds exceeded")

    def check_cosets(self, needed: int):
        if needed > self.max_cosets:
            raise PatternTooLargeError(needed, self.max_cosets)


_current = Caps()


def current_caps() -> Caps:
    return _current


def set_caps(caps: Caps) -> Caps:
    global _current
    previous = _current
    _current = caps
    return previous
