"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: validation problems exit with 2, an
exceeded enumeration cap with 3 and a violated internal invariant with 4.
"""


class TightSpanError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(TightSpanError, ValueError):
    """Malformed arguments: mismatched dimensions, unknown kinds, ..."""


class PreconditionError(TightSpanError, ValueError):
    """An operation was called on an input outside its domain."""


class ValidationError(TightSpanError, ValueError):
    """Input data violates the axioms of its declared kind."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ParseError(ValidationError):
    """Input text could not be parsed."""


class EnumerationCapError(TightSpanError):
    """Full vertex enumeration was requested above the dimension cap."""


class InvariantError(TightSpanError, AssertionError):
    """A guaranteed identity failed; this indicates a bug, not bad input."""
