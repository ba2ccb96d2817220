"""
henondyn error types

Domain problems subclass ValueError, numerical failures subclass RuntimeError,
so the CLI can sort them into configuration and runtime errors.
"""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation"""


class UncertifiedDomainError(DomainError):
    """Hypotheses of a certified estimate do not hold for this input"""


class HypothesisError(DomainError):
    """Precondition gate of a geometric certificate failed"""


class BudgetExceededError(ValueError):
    """Requested work exceeds a declared budget"""

    def __init__(self, message, requested=None, budget=None):
        super().__init__(message)
        self.requested = requested
        self.budget = budget


class ConvergenceError(RuntimeError):
    """Iterative solver failed; carries the last residual"""

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class BranchTrackingError(ConvergenceError):
    """A Böttcher product factor left the principal-branch disk |θ| < 1"""
