"""Exception and warning types raised by the library."""


class ERTError(Exception):
    """Base class for all library errors."""


class ConfigurationError(ERTError, ValueError):
    """Grids, ranges or options that cannot be used together."""


class DomainError(ERTError, ValueError):
    """Argument outside the domain of a function."""


class SizeError(ConfigurationError):
    """Grid too small for the requested operation."""


class AliasingError(ConfigurationError):
    """Angular sampling too coarse for the requested harmonic range."""


class UnsupportedAttenuationError(ERTError, TypeError):
    """The operation does not accept this attenuation model."""


class DegeneratePointError(DomainError):
    """Evaluation exactly on the singular set |s| = r."""


class AccuracyError(ERTError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(ERTError, ValueError):
    """Malformed input file."""


class AliasingWarning(UserWarning):
    """Harmonic content near the angular Nyquist limit is not negligible."""


class ConditioningWarning(UserWarning):
    """Result is known to be poorly conditioned for these parameters."""


class TruncationWarning(UserWarning):
    """An integration range was cut at the edge of the detector grid."""
