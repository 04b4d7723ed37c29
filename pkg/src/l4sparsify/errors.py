"""Exception types raised across the package."""


class L4Error(Exception):
    """Base class for all package errors."""


class InvalidDimension(L4Error, ValueError):
    pass


class InvalidInput(L4Error, ValueError):
    pass


class InvalidArguments(L4Error, ValueError):
    pass


class NotUnitary(L4Error, ValueError):
    pass


class DegenerateProjection(L4Error, ArithmeticError):
    """Raised when the polar factor UV^H is not unique (rank-deficient input)."""


class FormatError(L4Error, ValueError):
    pass


class InvalidFraction(L4Error, ValueError):
    pass


class InfeasibleScene(L4Error, RuntimeError):
    pass


class DetectionError(L4Error, ArithmeticError):
    pass
