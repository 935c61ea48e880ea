"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class NumericalFailureError(ArithmeticError):
    """Raised when a factorization fails even at the largest jitter.

    Attributes
    ----------
    diagnostics : dict
        Condition information about the offending matrix (size, trace,
        smallest/largest eigenvalue, condition number).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
