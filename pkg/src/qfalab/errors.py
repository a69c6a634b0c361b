"""Exception types raised across qfalab."""


class QfaLabError(ValueError):
    """Base class for invalid inputs to qfalab operations."""


class NotHermitian(QfaLabError):
    pass


class TraceNotOne(QfaLabError):
    pass


class NotPSD(QfaLabError):
    pass


class NotADistribution(QfaLabError):
    pass


class DimensionMismatch(QfaLabError):
    pass


class NotUnitary(QfaLabError):
    pass


class NotProjective(QfaLabError):
    """A projector family fails idempotence, orthogonality or completeness."""


class NotOrthogonalFamily(QfaLabError):
    pass


class NotReversible(QfaLabError):
    pass


class TooLarge(QfaLabError):
    pass


class IncompleteObservableTable(QfaLabError):
    pass


class BadConfig(QfaLabError):
    pass


class BoundViolated(QfaLabError):
    """A checked inequality failed; ``report`` holds the experiment report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
