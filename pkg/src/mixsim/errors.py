"""Exception hierarchy shared by all modules."""


class MixsimError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(MixsimError, ValueError):
    """Invalid parameters, boundary data, or config-file content."""


class DomainError(MixsimError, ValueError):
    """A constitutive law was evaluated outside its domain."""


class StateError(MixsimError, ValueError):
    """A field state is inadmissible (wrong shape, non-positive, off the simplex)."""


class StepSizeError(MixsimError):
    """The time step violates the explicit stability limit."""


class PositivityError(MixsimError):
    """An update produced non-positive concentrations or internal energy."""


class IterationError(MixsimError):
    """An iterative linear or nonlinear solve did not converge."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
