"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """A parameter or input lies outside the region where an operation is defined."""


class KinkError(DomainError):
    """Derivative requested at a non-differentiable point of a piecewise technology."""


class ConsistencyError(ArithmeticError):
    """An internal numerical identity failed (e.g. negative elasticity)."""


class NumericError(ArithmeticError):
    """An iterative method failed to converge."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NoCertificateError(NumericError):
    """A truncated present value could not be certified to the requested tolerance.

    ``partial`` carries the partial sum and ``tail_bound`` the best bound
    available when the search stopped.
    """

    def __init__(self, message, partial=None, tail_bound=None, horizon=None):
        super().__init__(message, last_iterate=partial)
        self.partial = partial
        self.tail_bound = tail_bound
        self.horizon = horizon
