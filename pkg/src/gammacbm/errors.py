"""Exception types shared across the package."""


class GammaCbmError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GammaCbmError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericalError(GammaCbmError, ArithmeticError):
    """A numerical routine failed to converge or produced an unusable value."""


class TruncationError(NumericalError):
    """A series was cut off before reaching its target mass.

    The achieved mass is attached so callers can report how far the
    expansion got before hitting the term cap.
    """

    def __init__(self, message: str, achieved_mass: float):
        super().__init__(message)
        self.achieved_mass = achieved_mass


class UnsupportedModelError(GammaCbmError, ValueError):
    """A model variant required by an operation is not the one supplied."""


class InfeasibleError(GammaCbmError, RuntimeError):
    """A constrained optimisation has an empty feasible region."""


class ConfigError(GammaCbmError, ValueError):
    """A scenario file is malformed or fails validation."""
