"""Exception hierarchy shared by the solver and the benchmark harness."""


class MembraneError(Exception):
    """Base class for all errors raised by :mod:`membrane_wrinkle`."""


class GeometryError(MembraneError):
    """Degenerate reference or current geometry (zero or negative area)."""


class DomainError(MembraneError, ValueError):
    """Argument outside the domain of a basis function or analytic formula."""


class ConfigError(MembraneError, ValueError):
    """Invalid model, constraint or benchmark configuration."""


class SolverError(MembraneError):
    """Linear solve failed, e.g. a singular tangent matrix."""

    def __init__(self, message, step=None, iteration=None):
        super().__init__(message)
        self.step = step
        self.iteration = iteration


class ConvergenceError(SolverError):
    """Newton iterations did not reach the tolerance within ``max_iter``."""

    def __init__(self, message, trace=None, step=None, iteration=None):
        super().__init__(message, step=step, iteration=iteration)
        self.trace = trace
