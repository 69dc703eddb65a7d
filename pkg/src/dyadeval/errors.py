"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``InputError`` -> 1,
``NumericalIntegrityError`` -> 2.
"""


class DyadevalError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DyadevalError):
    """Malformed or inconsistent user input (files, flags, tables)."""


class UndefinedRowError(InputError):
    """A transition-matrix row with no observed pre-state mass was required."""


class NumericalIntegrityError(DyadevalError):
    """A probability mass function failed its normalization check."""
