"""Exception hierarchy shared by all modules."""


class HolonomyLabError(Exception):
    """Base class for errors raised by this package."""


class StructureError(HolonomyLabError, ValueError):
    """Array shapes or index sets do not match what an operation expects."""


class DomainError(HolonomyLabError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NumericError(HolonomyLabError, ArithmeticError):
    """A numerical procedure failed to converge or would overflow."""


class NotGraphicalError(HolonomyLabError, ValueError):
    """A tangent plane is not a positively oriented graph over the horizontal space."""


class FlowError(HolonomyLabError, RuntimeError):
    """The mean curvature flow could not be advanced (CFL, degeneracy, graphicality)."""

    def __init__(self, message, monitors=None):
        super().__init__(message)
        self.monitors = monitors
