"""Exception types shared by the library and the CLI."""

from __future__ import annotations


class RlctkitError(Exception):
    """Base class for library errors."""


class ParseError(RlctkitError, ValueError):
    """Malformed polynomial, outer monomial or model spec."""


class NodeCapExceeded(RlctkitError):
    """A blow-up tree grew past its node cap.

    ``partial`` holds the tree built so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PivotLimitExceeded(RlctkitError):
    """The simplex solver hit its pivot cap."""


class InvariantViolation(RlctkitError):
    """An internal consistency check failed."""


class TermCapExceeded(RlctkitError):
    """A model polynomial would exceed the configured monomial cap."""
