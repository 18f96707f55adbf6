"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: validation problems exit
with 1, I/O problems (plain ``OSError``) with 2, numerical failures with 3.
"""


class CountconfError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(CountconfError):
    """Invalid input data, configuration, or violated preconditions."""


class NumericalError(CountconfError):
    """A computation is degenerate or numerically impossible."""
