"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures with 3, I/O failures with 4.
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ToolkitError, ValueError):
    """An input violates a documented precondition or invariant."""


class PositivityError(ValidationError):
    """A density matrix has an eigenvalue below the allowed round-off floor."""


class NumericalError(ToolkitError, RuntimeError):
    """A numerical routine failed (e.g. an eigensolver did not converge)."""


class ConfigError(ToolkitError, ValueError):
    """A run configuration file is malformed or inconsistent."""
