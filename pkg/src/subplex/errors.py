"""Exception types shared across the package."""


class SubplexError(ValueError):
    """Base class for all errors raised by subplex."""


class ParseError(SubplexError):
    """Malformed tabular input (non-numeric cell, ragged row, bad header)."""


class ValidationError(SubplexError):
    """Input violates a documented invariant or precondition."""


class RangeError(SubplexError):
    """A numeric argument or index is outside its permitted range."""
