"""Exception types shared across the package."""


class CreditDivergenceError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(CreditDivergenceError, ValueError):
    pass


class InvalidArgumentError(CreditDivergenceError, ValueError):
    pass


class BandInfeasibleError(CreditDivergenceError, ValueError):
    """Noise would push an off-diagonal entry outside its band."""

    def __init__(self, message, entry=None, value=None):
        super().__init__(message)
        self.entry = entry
        self.value = value


class NotPositiveDefiniteError(CreditDivergenceError, ValueError):
    """Cholesky factorization hit a nonpositive pivot."""

    def __init__(self, message, pivot):
        super().__init__(message)
        self.pivot = pivot


class DegenerateDistributionError(CreditDivergenceError, ValueError):
    pass


class BoundaryError(CreditDivergenceError, ValueError):
    """A probability sits on {0, 1} where a log would diverge."""


class DivergenceOverflowError(CreditDivergenceError, ArithmeticError):
    pass


class DegenerateSampleError(CreditDivergenceError, ValueError):
    pass


class MatrixGenerationError(CreditDivergenceError, RuntimeError):
    pass
