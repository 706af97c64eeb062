"""Exception types shared across the package."""

from __future__ import annotations


class UsageError(ValueError):
    """Bad arguments, malformed specs, unknown families, invalid windows."""


class BudgetError(RuntimeError):
    """A node or enumeration budget was exhausted before the answer was exact."""


class NumericError(ArithmeticError):
    """Synthesized values would underflow or otherwise break float safety."""
