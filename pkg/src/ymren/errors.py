"""Exception hierarchy shared by every layer of the package."""


class YMRenError(Exception):
    """Base class for all package errors."""


class DomainError(YMRenError, ValueError):
    """A point lies outside the domain of a field or primitive."""


class OrderError(YMRenError, ValueError):
    """A computation needs more derivatives than the engine provides."""


class SlotError(YMRenError, ValueError):
    """Index slots of a tensor do not fit the requested operation."""


class SingularMetricError(YMRenError, ValueError):
    """A metric is degenerate or not positive definite."""


class NotClosedError(YMRenError, ValueError):
    """A two-form expected to be closed fails the Bianchi test."""


class ZeroCurvatureError(YMRenError, ValueError):
    """|F| vanishes where a division by it is required."""


class FitError(YMRenError, RuntimeError):
    """A least-squares fit is rank deficient or ill behaved."""


class ToleranceError(YMRenError, RuntimeError):
    """An internal refinement check disagrees beyond tolerance."""
