"""Exception hierarchy shared by every module."""


class ShrinkSureError(Exception):
    """Base class for all library errors."""


class InputError(ShrinkSureError, ValueError):
    """Malformed or non-finite input, or mismatched dimensions."""


class DegenerateDesignError(ShrinkSureError):
    """Design matrix has no singular value above the rank threshold."""


class DomainError(ShrinkSureError, ValueError):
    """Argument outside the mathematical domain of the function."""


class ConvergenceRegionError(DomainError):
    """Series requested outside its region of convergence."""


class BudgetExceededError(ShrinkSureError):
    """Series did not meet its stopping rule within the term budget."""


class IntegrationError(ShrinkSureError):
    """Adaptive quadrature stopped before meeting its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IterationBudgetError(ShrinkSureError):
    """Iterative solver hit its iteration cap; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class SearchFailure(ShrinkSureError):
    """Tuning search produced no finite objective value."""
