"""Exception types raised across the package."""


class ModelError(ValueError):
    """Invalid model description or coefficient block.

    ``site`` carries the offending index n when one is known.
    """

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class ConditioningError(ArithmeticError):
    """A bracket that theory declares invertible is numerically singular."""


class MoebiusDomainError(ArithmeticError):
    """A Moebius or inverse Moebius transformation is undefined at the argument."""


class ConvergenceError(RuntimeError):
    """A truncated limit did not converge on the requested schedule."""


class DiscViolation(ValueError):
    """A candidate Green matrix lies outside the closed Weyl limit disc.

    ``report`` holds the diagnostic record that triggered the failure.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
