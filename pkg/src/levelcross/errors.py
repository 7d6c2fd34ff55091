"""Exception types shared across the package."""


class ModelError(ValueError):
    """Malformed model definition, model file, or parameter assignment."""


class ConvergenceError(ArithmeticError):
    """An iterative solver ran out of budget.

    Attributes:
        off_norm: the off-diagonal Frobenius norm when the solver gave up.
    """

    def __init__(self, message: str, off_norm=None):
        super().__init__(message)
        self.off_norm = off_norm
