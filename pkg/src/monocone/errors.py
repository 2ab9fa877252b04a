"""Exception hierarchy shared by every monocone module."""


class MonoconeError(Exception):
    """Base class for all errors raised by monocone."""


class SpecFormatError(MonoconeError, ValueError):
    """Malformed operator or function description."""


class DimensionMismatch(MonoconeError, ValueError):
    pass


class DimensionTooLarge(MonoconeError, ValueError):
    pass


class NotMember(MonoconeError, ValueError):
    """A point is not in the polyhedron (or union) it was queried against."""


class NotOnGraph(MonoconeError, ValueError):
    pass


class NotInDomain(MonoconeError, ValueError):
    pass


class EmptySet(MonoconeError, ValueError):
    pass


class EmptySample(MonoconeError, ValueError):
    pass


class NotCompilable(MonoconeError):
    """The operator has no exact polyhedral graph representation."""


class UnsupportedVariant(MonoconeError):
    pass


class TooFewSamples(MonoconeError, ValueError):
    pass


class ShiftTooSmall(MonoconeError, ValueError):
    pass


class SegmentLeavesDomain(MonoconeError):
    def __init__(self, message, t=None, point=None):
        super().__init__(message)
        self.t = t
        self.point = point


class WindowNotFound(MonoconeError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class RoutesDisagree(MonoconeError, AssertionError):
    """Direct and shifted strong-convexity routes gave different answers.

    Both routes compute the same mathematical object, so this signals an
    engine bug rather than a property of the input.
    """
