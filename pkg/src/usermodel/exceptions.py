"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (a ``ValueError``) so
callers can catch a single type; model-state problems derive from
``sklearn.exceptions.NotFittedError`` where that is what they mean.
"""

from sklearn.exceptions import NotFittedError


class ValidationError(ValueError):
    """Raised when input data violates a schema or model precondition."""


class MissingColumn(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class UnknownCategory(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class UnknownPoint(ValidationError):
    pass


class NonMonotonicTime(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class DegenerateAttribute(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


class MissingBinning(ValidationError):
    pass


class AllPointsPositive(ValidationError):
    pass


class NoVisualizedAttributes(ValidationError):
    pass


class TooManyAttributes(ValidationError):
    pass


class ZeroExpectedCell(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class EmptyHistory(ValidationError):
    pass


class EmptyRecords(ValidationError):
    pass


class UnknownAttribute(ValidationError):
    pass


class EmptyFocus(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NotObserved(NotFittedError):
    """A query needs at least one observed interaction."""


class MemberNotReady(RuntimeError):
    pass


class MemberError(RuntimeError):
    """Wraps an exception raised by one ensemble member."""

    def __init__(self, member, error):
        super().__init__(f"ensemble member {member!r} failed: {error}")
        self.member = member
        self.error = error


class ReplayError(RuntimeError):
    """Wraps a model failure with the (session, t) where it happened."""

    def __init__(self, session_id, t, error):
        super().__init__(f"session {session_id!r} at t={t}: {error}")
        self.session_id = session_id
        self.t = t
        self.error = error
