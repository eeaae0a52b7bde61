"""Exception hierarchy shared by all pfml modules."""

from __future__ import annotations


class PfmlError(Exception):
    """Base class for every error raised by pfml."""


class ModelError(PfmlError):
    """A model file or raw model mapping is malformed."""

    def __init__(self, message: str, violations: list | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


class RowSumInvalid(ModelError):
    pass


class ValueOutOfRange(ModelError):
    pass


class UnknownTarget(ModelError):
    pass


class UnknownState(PfmlError):
    pass


class UnknownRole(PfmlError):
    pass


class UnknownAtom(PfmlError):
    pass


class UnboundVariable(PfmlError):
    pass


class ParseError(PfmlError):
    """Raised for malformed concept/formula text and malformed JSON input.

    ``position`` is a 0-based character offset (or ``None`` when unknown).
    """

    def __init__(self, message: str, position: int | None = None, expected: str | None = None):
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)
        self.position = position
        self.expected = expected


class LengthMismatch(PfmlError):
    pass


class MarginalInvalid(PfmlError):
    pass


class SupportTooLarge(PfmlError):
    pass


class NotNonexpansive(PfmlError):
    pass


class IncompleteStrategy(PfmlError):
    pass
