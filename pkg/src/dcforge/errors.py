"""Exception types raised across the package."""


class DCForgeError(Exception):
    """Base class for all package errors."""


class NonSymmetricInput(DCForgeError, ValueError):
    pass


class NotPSD(DCForgeError, ValueError):
    pass


class DimensionTooLarge(DCForgeError, ValueError):
    pass


class HasConstraints(DCForgeError, ValueError):
    pass


class MixedCurvature(DCForgeError, ValueError):
    pass


class UnboundedDomain(DCForgeError, ValueError):
    pass


class InfeasiblePoint(DCForgeError, ValueError):
    pass


class Unbounded(DCForgeError, ArithmeticError):
    """A convex subproblem has no finite minimizer."""


class InfeasibleSubproblem(DCForgeError, ArithmeticError):
    """A (linearized) constraint set turned out to be empty."""


class MaxIters(DCForgeError, RuntimeError):
    pass


class NoSolution(DCForgeError, ArithmeticError):
    pass


class ConfigError(DCForgeError, ValueError):
    pass
