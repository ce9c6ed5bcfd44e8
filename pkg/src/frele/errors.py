"""Exception types raised across the package."""


class FreLEError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(FreLEError, ValueError):
    pass


class ShapeMismatch(FreLEError, ValueError):
    pass


class InvalidSpectrum(FreLEError, ValueError):
    pass


class TooFewBins(FreLEError, ValueError):
    pass


class InvalidIndex(FreLEError, ValueError):
    pass


class SplitTooSmall(FreLEError, ValueError):
    pass


class DegenerateChannel(FreLEError, ValueError):
    pass


class SeriesTooShort(FreLEError, ValueError):
    pass


class NoData(FreLEError, ValueError):
    pass


class InvalidFrequency(FreLEError, ValueError):
    pass


class NonIntegerFrequency(FreLEError, ValueError):
    pass


class ParseError(FreLEError, ValueError):
    """Malformed CSV content; ``row`` is the 1-based line number in the file."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class ConfigError(FreLEError, ValueError):
    pass
