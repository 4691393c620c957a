"""Exception types shared by every module of the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class CausalityError(ValidationError):
    """A feedback matrix has a nonzero entry on or above its diagonal.

    Attributes
    ----------
    receiver, row, col : int
        Zero-based location of the first offending entry.
    """

    def __init__(self, receiver, row, col, value):
        self.receiver = receiver
        self.row = row
        self.col = col
        self.value = value
        super().__init__(
            f"A[{receiver}][{row}][{col}] = {value!r} is on or above the "
            "diagonal; feedback matrices must be strictly lower triangular")


class ConfigError(ValidationError):
    """A protocol configuration violates one of its invariants."""


class SolverError(RuntimeError):
    """The rate-equalization root finder could not bracket a unique root.

    Attributes
    ----------
    trace : list of (float, float)
        The ``(alpha_1, beta_K)`` scan used to look for sign changes.
    brackets : list of (float, float)
        Every bracketing interval that was found (empty or more than one).
    """

    def __init__(self, message, trace=(), brackets=()):
        super().__init__(message)
        self.trace = list(trace)
        self.brackets = list(brackets)


class AccuracyError(SolverError):
    """The solver converged but the raw equations are violated beyond tol."""
