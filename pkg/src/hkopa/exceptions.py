"""Exception hierarchy shared by the fitting routines, file readers and CLI."""


class HKopaError(Exception):
    """Base class for all errors raised by :mod:`hkopa`."""


class ShapeError(HKopaError, ValueError):
    """Matrix or configuration shapes are incompatible."""


class FormatError(HKopaError, ValueError):
    """A file could not be parsed (bad header, magic, or truncated payload)."""


class NumericalError(HKopaError, ArithmeticError):
    """A numerical routine hit a degenerate input (zero matrix, non-finite entries...)."""
