"""Exception types shared across the package."""


class SmcError(Exception):
    """Base class for all package errors."""


class ParameterError(SmcError, ValueError):
    """A parameter violates its contract (sign, range, finiteness)."""


class DomainError(SmcError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class PreconditionError(SmcError, ValueError):
    """A stated precondition of a bound or theorem check is not met."""


class ControllabilityError(SmcError, RuntimeError):
    """The control channel gain g(x, t) vanished on the trajectory."""


class InsufficientDataError(SmcError, RuntimeError):
    """A log is too short for the requested metric or diagnostic."""


class ConfigError(SmcError, ValueError):
    """A scenario file failed validation; message carries the offending key."""


class SimulationDiverged(SmcError, RuntimeError):
    """The closed-loop state became non-finite during integration."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"state became non-finite at t = {time:.6g} s")


class TuningWarning(UserWarning):
    """Parameter choice is valid but outside the recommended tuning range."""
