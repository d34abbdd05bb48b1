"""Exception hierarchy shared by all she_moments modules."""


class SheMomentsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SheMomentsError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class KernelOverflowError(SheMomentsError, OverflowError):
    """A kernel value exceeds the double-precision range.

    Carries the offending exponent so callers can see how far out of range
    the request was.
    """

    def __init__(self, message: str, exponent: float | None = None):
        super().__init__(message)
        self.exponent = exponent


class QuadratureError(SheMomentsError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None,
                 requested: float | None = None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class InadmissibleMeasureError(SheMomentsError, ValueError):
    """The initial measure is not heat-smoothable (fails the Gaussian
    integrability requirement) or violates a declared contract."""


class PoleError(SheMomentsError, ValueError):
    """A closed-form transform was evaluated at (or too close to) a pole."""


class ConfigError(SheMomentsError, ValueError):
    """A simulation configuration violates a stability or layout constraint."""


class DivergenceError(SheMomentsError, RuntimeError):
    """Too many Monte Carlo paths diverged for the estimate to be trusted."""

    def __init__(self, message: str, n_divergent: int = 0, n_total: int = 0):
        super().__init__(message)
        self.n_divergent = n_divergent
        self.n_total = n_total
