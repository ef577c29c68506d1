"""Exception hierarchy shared by all modules."""


class SpuridiumError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgument(SpuridiumError, ValueError):
    pass


class IndexOutOfRange(SpuridiumError, IndexError):
    pass


class DimensionMismatch(SpuridiumError, ValueError):
    pass


class SingularPotential(SpuridiumError, FloatingPointError):
    """The potential is not finite at a quadrature node."""


class SupercriticalCoupling(InvalidArgument):
    """Z/c >= |kappa|: the point-nucleus Dirac spectrum is not real."""


class NoSuchBoundState(SpuridiumError, ValueError):
    pass


class NotSymmetric(SpuridiumError, ValueError):
    pass


class NoConvergence(SpuridiumError, ArithmeticError):
    pass


class NotApplicable(SpuridiumError, TypeError):
    """The requested diagnostic has no meaning for this kind of problem."""


class ConfigError(SpuridiumError, ValueError):
    """Malformed run configuration or report file."""
