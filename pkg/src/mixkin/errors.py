"""Exception hierarchy shared by the solver modules and the CLI."""


class MixkinError(Exception):
    """Base class for all package errors."""


class ConfigError(MixkinError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalError(MixkinError, ArithmeticError):
    """A solver produced or received a state it cannot continue from."""

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"{message} (at {index})"
        super().__init__(message)


class NonPositiveDensity(NumericalError):
    pass


class NonPositiveTemperature(NumericalError):
    pass


class NegativeTemperature(NumericalError):
    pass


class NegativeMixingTemperature(NumericalError):
    pass


class ZeroFrequencyDivision(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class HistoryMismatch(NumericalError):
    pass


class NonFiniteState(NumericalError):
    pass


class VacuumState(NumericalError):
    pass


class StepTooLarge(NumericalError):
    pass


class UnsupportedDegree(MixkinError, ValueError):
    pass


class LengthMismatch(MixkinError, ValueError):
    pass


class ZeroReference(MixkinError, ValueError):
    pass
