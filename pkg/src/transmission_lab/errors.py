"""Exception types raised across the package."""


class TransmissionLabError(Exception):
    """Base class for all package errors."""


class InvalidGeometry(TransmissionLabError, ValueError):
    pass


class TagEmpty(TransmissionLabError, ValueError):
    pass


class NotBoundaryEdge(TransmissionLabError, ValueError):
    pass


class NotSpd(TransmissionLabError, ValueError):
    pass


class SingularSystem(TransmissionLabError, ArithmeticError):
    pass


class IncompatibleData(TransmissionLabError, ValueError):
    """Neumann data violate the solvability (compatibility) condition."""


class GuardError(TransmissionLabError, ValueError):
    """An input lies in an excluded subspace (e.g. the constants)."""


class SingularNormalEquations(TransmissionLabError, ArithmeticError):
    pass


class OnBoundary(TransmissionLabError, ValueError):
    pass


class SupportNotInside(TransmissionLabError, ValueError):
    pass


class NotH20(TransmissionLabError, ValueError):
    pass


class AlphaIZero(TransmissionLabError, ValueError):
    pass


class NotPositive(TransmissionLabError, ValueError):
    pass


class ModeUnsupported(TransmissionLabError, ValueError):
    pass


class NotElliptic(TransmissionLabError, ValueError):
    pass


class AtSingularity(TransmissionLabError, ValueError):
    pass


class DegenerateReduction(TransmissionLabError, ValueError):
    pass


class UnstableStep(TransmissionLabError, ValueError):
    pass


class NonPositiveTime(TransmissionLabError, ValueError):
    pass


class ConfigError(TransmissionLabError, ValueError):
    pass
