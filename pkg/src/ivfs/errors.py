"""Exception types shared across the package."""


class IvfsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(IvfsError):
    """Malformed input file; carries 1-based row (and column) of the offender."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class EmptyInput(IvfsError):
    """Input file contains no data rows."""


class InvalidSelection(IvfsError):
    """Row or feature selection violates its contract (empty, duplicate, out of range)."""


class ShapeError(IvfsError):
    """Operands have incompatible dimensions."""


class InvalidParameter(IvfsError):
    """Parameter outside its legal range."""


class OracleTooLarge(IvfsError):
    """Brute-force oracle invoked on an instance beyond its size guard."""


class MissingLabels(IvfsError):
    """Supervised score requested without a label vector."""


class FoldError(IvfsError):
    """A train/test fold lost a class even after one resample."""
