"""Exception hierarchy shared by the library and the CLI."""


class FirefrontError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(FirefrontError, ValueError):
    """Invalid or unreadable run configuration."""

    exit_code = 2


class DataError(FirefrontError, ValueError):
    """Input data that cannot be used (bad geometry, grid mismatch, ...)."""

    exit_code = 3


class NumericalError(FirefrontError, ArithmeticError):
    """A numerical kernel failed, e.g. a Cholesky factorization."""

    exit_code = 4
