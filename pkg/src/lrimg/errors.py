"""Exception hierarchy shared across the toolkit."""


class LrimgError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(LrimgError, ValueError):
    """Input violates a precondition (bad dimensions, non-finite data, ...)."""


class InvalidRankError(InvalidInputError):
    """Requested truncation rank is out of range."""


class ConvergenceError(LrimgError):
    """The SVD iteration did not converge within the sweep cap."""


class UnsupportedFormatError(LrimgError):
    """Image file format or bit depth is not supported."""

    def __init__(self, format_name, message=None):
        self.format_name = format_name
        super().__init__(message or f"unsupported format: {format_name}")


class LrifError(LrimgError):
    """Base class for LRIF container errors."""


class LrifFormatError(LrifError):
    """Bytes do not start with the LRIF magic or are not LRIF at all."""


class LrifVersionError(LrifError):
    """LRIF version is not supported by this decoder."""


class LrifCorruptError(LrifError):
    """LRIF stream is truncated or internally inconsistent."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class CodecUnavailableError(LrimgError):
    """Requested external codec backend is not available."""


class CodecBridgeError(LrimgError):
    """External encoder or decoder failed."""


class EmptyCorpusError(LrimgError):
    """Benchmark corpus directory contains no supported images."""


class ConfigError(LrimgError):
    """Benchmark run configuration is invalid."""


class PlotError(LrimgError):
    """Curve data cannot be plotted."""
