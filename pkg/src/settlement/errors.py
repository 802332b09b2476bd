"""Exception types shared across the package."""

from __future__ import annotations


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (bad lot, reused lot, malformed input)."""


class ResourceError(RuntimeError):
    """The requested computation exceeds a configured budget.

    ``budget`` names the limit that was hit so callers (and the CLI) can report it.
    """

    def __init__(self, message: str, *, budget: str, limit: int | float, requested: int | float):
        super().__init__(message)
        self.budget = budget
        self.limit = limit
        self.requested = requested
