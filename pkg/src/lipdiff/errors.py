"""Exception hierarchy shared by all lipdiff modules."""


class LipdiffError(Exception):
    """Base class for every error raised by lipdiff."""


class DomainViolation(LipdiffError):
    """A point fell outside (or on the boundary of) an open domain."""

    def __init__(self, message, point=None, t=None):
        super().__init__(message)
        self.point = point
        self.t = t


class UnknownScenario(LipdiffError, KeyError):
    pass


class DegenerateDirection(LipdiffError, ValueError):
    pass


class NotDirectionallyDifferentiable(LipdiffError):
    pass


class HypothesisFailure(LipdiffError):
    """A precondition of one of the checks (Lipschitz f, differentiable g) failed."""

    def __init__(self, reason, message=""):
        super().__init__(f"{reason}: {message}" if message else reason)
        self.reason = reason


class NotSpd(LipdiffError, ValueError):
    pass


class AsymmetricInput(LipdiffError, ValueError):
    pass


class NoConvergence(LipdiffError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConeViolation(DomainViolation):
    pass


class ParseError(LipdiffError, ValueError):
    def __init__(self, message, field=None, line=None):
        loc = []
        if field is not None:
            loc.append(f"field {field!r}")
        if line is not None:
            loc.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.field = field
        self.line = line
