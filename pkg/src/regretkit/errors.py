"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RegretkitError(Exception):
    """Base class for all package errors."""


class SchemaError(RegretkitError):
    """Structural problem in attributes, factors, or declared outcomes."""


class ValidationError(RegretkitError):
    """One or more document violations; each carries a field path."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DegenerateFactorError(RegretkitError):
    """A factor is locally constant, so its local values are undefined."""


class InconsistentConstraintError(RegretkitError):
    """The asserted constraint empties the utility polytope."""

    def __init__(self, message: str, constraint=None):
        super().__init__(message)
        self.constraint = constraint


class EmptyFeasibleSetError(RegretkitError):
    """No configuration satisfies the hard constraints / catalog is empty."""


class IterationLimitError(RegretkitError):
    """Constraint generation exceeded its iteration cap; carries best-so-far."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class RejectionBudgetError(RegretkitError):
    """Rejection sampling failed to find a point inside the polytope."""
