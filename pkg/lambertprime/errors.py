"""
Exception hierarchy for lambertprime.

Every failure a caller can act on is a LambertPrimeError. The CLI maps the
value-style errors to exit code 2 and the resource-style ones to exit code 3.
"""
from typing import Any


class LambertPrimeError(Exception):
    """Base class for all lambertprime errors."""


class DomainError(LambertPrimeError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ModelRangeError(LambertPrimeError, ValueError):
    """Input outside a correction model's valid range or slice table."""


class BracketError(LambertPrimeError, ArithmeticError):
    """No sign change inside the bracket handed to a root finder."""


class PrecisionError(LambertPrimeError, ArithmeticError):
    """Result cannot be decided at the working precision."""


class TableParseError(LambertPrimeError, ValueError):
    """Malformed line in a prime table or model file."""

    def __init__(self, line: int, reason: str, source: str = "<input>"):
        self.line = line
        self.reason = reason
        self.source = source
        super().__init__(f"{source}:{line}: {reason}")


class TableInvariantError(LambertPrimeError, ValueError):
    """Parsed rows violate a table invariant (ordering, consistency)."""


class DegenerateFitError(LambertPrimeError, ValueError):
    """Least-squares input with fewer than two distinct abscissae."""


class ResourceError(LambertPrimeError, RuntimeError):
    """Request exceeds a configured capacity."""


class TuningError(LambertPrimeError, RuntimeError):
    """Slice tuning produced a slice worse than its untuned curve."""


class BudgetExhausted(LambertPrimeError, RuntimeError):
    """Search budget spent before reaching the target; carries the best candidate."""

    def __init__(self, message: str, best: Any = None):
        self.best = best
        super().__init__(message)


USER_ERRORS = (DomainError, ModelRangeError, BracketError, PrecisionError,
               TableParseError, TableInvariantError, DegenerateFitError)
RESOURCE_ERRORS = (ResourceError, BudgetExhausted, TuningError)
