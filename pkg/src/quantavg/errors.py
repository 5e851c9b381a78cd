"""Exception hierarchy; the CLI maps these onto exit codes."""


class QuantAvgError(Exception):
    """Base class for package errors."""


class ConfigError(QuantAvgError):
    """Invalid configuration or usage (CLI exit code 1)."""


class DataError(QuantAvgError):
    """Unreadable or invalid input data (CLI exit code 2)."""


class NumericalError(QuantAvgError):
    """Degenerate or failed numerical computation (CLI exit code 3)."""
