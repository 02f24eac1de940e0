"""Exception hierarchy shared by the core modules.

Each error also subclasses the built-in exception a caller would naturally
catch, so ``except ValueError`` keeps working for precondition failures.
"""

from __future__ import annotations


class CfError(Exception):
    """Base class for all cfextremes errors."""


class DomainError(CfError, ValueError):
    """Raised when an operation is called outside its domain."""


class PrecisionError(CfError, ArithmeticError):
    """Raised when a digit or rounding cannot be certified at the working precision."""


class BudgetError(CfError, RuntimeError):
    """Raised when an exact-mode computation would exceed its node or bit budget."""


class SimulationError(CfError, RuntimeError):
    """Raised when too many Monte Carlo trials abort."""
