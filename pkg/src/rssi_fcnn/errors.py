"""Exception hierarchy shared by every module.

Each category maps to a distinct CLI exit code (see :mod:`rssi_fcnn.cli`).
"""


class RssiError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ShapeError(RssiError, ValueError):
    exit_code = 5


class ConfigError(RssiError, ValueError):
    exit_code = 7


class ParameterError(ConfigError):
    """Invalid physical parameter (distance, sigma, ...)."""


class DataError(RssiError, ValueError):
    """Data that parsed fine but cannot be used (empty, too short, ...)."""

    exit_code = 8


class LoadError(DataError):
    """Malformed file content; the message carries the path and line."""

    exit_code = 4


class FileAccessError(RssiError, OSError):
    """A file that is missing or cannot be read or written."""

    exit_code = 3


class NumericError(RssiError, ArithmeticError):
    exit_code = 6
