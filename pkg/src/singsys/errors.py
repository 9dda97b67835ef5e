"""Exception hierarchy shared by every stage of the pipeline."""


class SingsysError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SingsysError, ValueError):
    """Malformed expression text.

    ``line`` and ``column`` are 1-based and point at the offending token.
    """

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class ZeroDenominatorError(SingsysError, ZeroDivisionError):
    """A denominator is identically zero, or vanishes at an evaluation point."""


class NotQuadraticError(SingsysError, ValueError):
    """The Lagrangian is not of the form (1/2) v.W(q).v + a(q).v - V(q)."""


class InputError(SingsysError, ValueError):
    """Problem description is structurally invalid."""


class InconsistentDynamics(SingsysError):
    """A constraint reduced to a nonzero constant: the surface is empty."""


class IndeterminateError(SingsysError):
    """Weak vanishing could not be decided (no surface samples available)."""
