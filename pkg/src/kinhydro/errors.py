"""Exception types shared across the package."""


class KinhydroError(Exception):
    """Base class for package errors."""


class ConfigError(KinhydroError):
    """Invalid configuration, sizes, or regime parameters (CLI exit 2)."""


class NumericalError(KinhydroError):
    """Numerical failure during a computation (CLI exit 3)."""


class DegenerateStateError(NumericalError):
    """A distribution with nonpositive discrete mass was passed to moments."""


class NegativeValueError(NumericalError):
    """Negative distribution entries beyond tolerance; carries the nodes."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes if nodes is not None else []


class IllConditionedGridError(NumericalError):
    """Invariant Gram matrix condition number above threshold."""


class CapacityError(ConfigError):
    """Requested dense operator exceeds the configured size cap."""


class SolvabilityError(NumericalError):
    """Fredholm alternative (b): source has nonzero invariant moments."""

    def __init__(self, message, moments=None):
        super().__init__(message)
        self.moments = moments


class IterationLimitError(NumericalError):
    """Iterative solver failed to converge; carries the final residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InstabilityError(NumericalError):
    """Time integration blew up; carries the last stable time."""

    def __init__(self, message, last_stable_time=None):
        super().__init__(message)
        self.last_stable_time = last_stable_time
