"""Exception hierarchy. CLI exit codes hang off ``exit_code``."""


class FrozenEdgeError(Exception):
    exit_code = 3


class DomainError(FrozenEdgeError, ValueError):
    """Parameters or arguments outside their admissible range."""

    exit_code = 2


class DimensionMismatchError(DomainError):
    pass


class ConvergenceFailure(FrozenEdgeError, ArithmeticError):
    """An iteration (QL sweeps, Newton, bisection, quadrature) hit its cap."""


class BracketingError(ConvergenceFailure):
    pass


class QuadratureError(ConvergenceFailure):
    pass


class PositivityError(FrozenEdgeError, ArithmeticError):
    """A quantity that is positive by theory came out non-positive."""


class ConsistencyError(FrozenEdgeError, ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


class DegenerateSpacingError(FrozenEdgeError, ArithmeticError):
    pass


class NotPositiveDefiniteError(FrozenEdgeError, ArithmeticError):
    pass


class TuningError(FrozenEdgeError, RuntimeError):
    """Metropolis acceptance rate outside the usable window."""

    exit_code = 4
