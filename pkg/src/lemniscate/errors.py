"""Exception hierarchy.

Every failure raised by the package derives from :class:`LemniscateError`, so
callers (notably the CLI) can separate domain failures from programming errors.
"""


class LemniscateError(Exception):
    """Base class for all package errors."""


class InvalidSpec(LemniscateError, ValueError):
    """Braid or field parameters violate their invariants."""


class AlgebraError(LemniscateError):
    """An exact computation produced something the construction forbids."""


class OrderMismatch(AlgebraError):
    pass


class NotGaussian(AlgebraError):
    """A cyclotomic value that should lie in Q(i) does not."""


class NonIntegerExponent(AlgebraError):
    """A surviving power of exp(ih) is fractional, so v cannot be substituted."""


class StrandCollision(LemniscateError):
    pass


class WrongPeriod(LemniscateError, ValueError):
    pass


class MultiComponent(LemniscateError):
    """The braid closes to a link; a knot invariant was requested."""


class OddRepeats(LemniscateError, ValueError):
    pass


class VerificationError(LemniscateError):
    """Numerical certification could not be completed."""


class DegenerateLeading(VerificationError):
    pass


class CollisionDetected(VerificationError):
    pass


class AmbiguousCrossing(VerificationError):
    pass


class NotTransverse(VerificationError):
    pass


class WrongRootCount(VerificationError):
    pass


class NoValidLambda(VerificationError):
    pass


class OpenCurve(VerificationError):
    pass


class CurvesTooClose(VerificationError):
    pass
