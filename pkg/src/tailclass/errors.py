"""Exception hierarchy shared by every tailclass module."""


class TailClassError(Exception):
    """Base class for all library errors."""


class InvalidParameter(TailClassError, ValueError):
    """A family parameter violates its constraint."""


class DomainError(TailClassError, ValueError):
    """A model was evaluated outside its support."""


class GridError(TailClassError, ValueError):
    """A grid reaches outside the representable domain of a function."""


class DegenerateRatio(TailClassError, ArithmeticError):
    """Ratio limits are saturated in a way no finite or infinite index explains."""


class FitFailed(TailClassError, ArithmeticError):
    """No grid threshold yields a positive finite Potter constant."""


class QuadratureFailure(TailClassError, ArithmeticError):
    """Adaptive quadrature ran out of bisection depth before reaching tolerance."""


class OverflowGuard(TailClassError, OverflowError):
    """An integrand exponent exceeded the representable range.

    ``log_value`` carries the (finite) logarithm of the integral so callers
    can still report how large it was.
    """

    def __init__(self, message, log_value=float("inf")):
        super().__init__(message)
        self.log_value = log_value


class UsageError(TailClassError):
    """Bad command-line usage; the CLI maps it to exit status 2."""
