"""Exception types raised across the package."""


class PathSpinError(Exception):
    """Base class for all package errors."""


class ParameterError(PathSpinError, ValueError):
    """A device, axis or sampling parameter is outside its valid range."""


class BasisError(PathSpinError, ValueError):
    """Path basis tags are missing or do not match."""


class StateError(PathSpinError, ValueError):
    """A state is not normalized (or otherwise malformed) where it must be."""


class DecompositionError(PathSpinError, ValueError):
    """Pauli decomposition requested for a non-Hermitian operator."""


class UndefinedStatisticError(PathSpinError, ArithmeticError):
    """A conditional statistic was requested for an empty subensemble."""


class CapacityError(PathSpinError):
    """A strategy enumeration would exceed the supported size."""


class SolverError(PathSpinError, RuntimeError):
    """The LP solver failed to converge; carries the solver diagnostics."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or {}
