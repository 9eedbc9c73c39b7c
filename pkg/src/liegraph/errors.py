"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Unsupported family/rank/space combination or malformed input."""


class OutOfRangeError(ValueError):
    """A parameter lies outside the range where the implemented formula holds."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its accuracy target."""


class ConvergenceError(NumericalError):
    """An iterative method did not converge within its budget."""


class AdvisoryError(RuntimeError):
    """The request is valid but the data cannot certify the answer."""
