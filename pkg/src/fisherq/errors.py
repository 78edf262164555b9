"""Exception and warning classes shared across the package."""


class FisherQError(Exception):
    """Base class for all package errors."""


class NormalizationError(FisherQError, ValueError):
    pass


class RepresentationError(FisherQError, ValueError):
    pass


class TruncationError(FisherQError, ValueError):
    """The grid is too small for the requested state or operation."""


class DegenerateStateError(FisherQError, ValueError):
    pass


class DiscretizationError(FisherQError, ArithmeticError):
    """An exact identity failed beyond its numerical tolerance."""


class MaskDominatedError(FisherQError, ArithmeticError):
    """Too much probability sits on masked (near-node) grid points."""


class PreconditionError(FisherQError, ValueError):
    pass


class InstabilityError(FisherQError, ArithmeticError):
    pass


class SpecError(FisherQError, ValueError):
    """Malformed state specification file."""


class TruncationWarning(UserWarning):
    pass


class WraparoundWarning(UserWarning):
    pass


class SupportWarning(UserWarning):
    pass
