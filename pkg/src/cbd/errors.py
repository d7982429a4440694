"""Exception hierarchy shared by all modules."""


class CbdError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CbdError, ValueError):
    pass


class NonUnitMass(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


class UnknownContent(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyFormat(ValidationError):
    pass


class DuplicateAtom(ValidationError):
    pass


class NotMeasured(ValidationError):
    pass


class AlreadyMeasured(ValidationError):
    pass


class NotSurjective(ValidationError):
    pass


class GroundNotLinked(CbdError):
    pass


class NotCategorical(CbdError):
    pass


class NotOrdered(CbdError):
    pass


class PlanIncomplete(CbdError):
    pass


class NotDetermining(CbdError):
    pass


class OutOfRange(CbdError, ValueError):
    pass


class NotACoupling(CbdError):
    pass


class NotAligned(CbdError):
    pass


class NotBinary(CbdError):
    pass


class InconsistentlyConnected(CbdError):
    pass


class MismatchedSupport(CbdError, ValueError):
    pass


class LPTooLarge(CbdError):
    pass


class ParseError(CbdError):
    pass
