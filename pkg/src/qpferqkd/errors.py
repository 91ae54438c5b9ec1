"""Exception hierarchy shared by all modules."""


class QkdError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QkdError, ValueError):
    """An argument lies outside its legal range."""


class DegenerateInputError(QkdError, ZeroDivisionError):
    """A rate map was asked to renormalize by a zero survival probability."""


class PreconditionError(QkdError, ValueError):
    """A documented precondition of an operation does not hold."""


class NoSolutionError(QkdError, ValueError):
    """No admissible parameter satisfies the requested inequality."""


class InsufficientDataError(QkdError, RuntimeError):
    """A Monte Carlo stage ran out of bits.

    The ``stage`` attribute names the stage that starved.
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class NonMonotoneFeasibilityError(QkdError, RuntimeError):
    """The coarse feasibility pre-scan is not antitone in the channel parameter."""

    def __init__(self, message: str, scan):
        super().__init__(message)
        self.scan = scan


class ConfigError(QkdError, ValueError):
    """Invalid command-line or config-file parameter."""

    def __init__(self, field: str, constraint: str):
        super().__init__(f"invalid value for '{field}': {constraint}")
        self.field = field
        self.constraint = constraint
