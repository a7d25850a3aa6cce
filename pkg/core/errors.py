"""Exceptions raised by the analysis modules.

The CLI maps them to exit codes: DomainError and BoundViolationError -> 1,
BudgetExceededError -> 2.
"""


class ExpCycleError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DomainError(ExpCycleError, ValueError):
    """Input outside the mathematical domain (non-prime p, g out of range, ...)."""

    exit_code = 1


class BudgetExceededError(ExpCycleError):
    """A computation would exceed a configured memory or step budget."""

    exit_code = 2

    def __init__(self, what: str, needed: int, budget: int):
        self.what = what
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what} needs {needed} but the budget is {budget}")


class BoundViolationError(ExpCycleError, AssertionError):
    """A rigorous bound that must always hold was violated."""

    exit_code = 1
