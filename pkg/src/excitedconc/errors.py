"""Exception hierarchy shared by all modules."""


class ExcitedConcError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(ExcitedConcError, ValueError):
    """Invalid model or run configuration."""


class ContractViolation(ExcitedConcError, ValueError):
    """An argument breaks an operation's precondition."""


class SolverError(ExcitedConcError, RuntimeError):
    """Eigensolver failed to converge within its iteration cap."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class MultipletOverflowError(SolverError):
    """A degenerate level extends past the allowed number of extra states."""


class DataError(ExcitedConcError, ValueError):
    """Input data violates a physical invariant (e.g. a non-PSD density matrix)."""


class ClassificationError(ExcitedConcError, ValueError):
    """A state cannot be assigned a definite total spin."""


class InsufficientLevelsError(ExcitedConcError, ValueError):
    """The eigen-solution does not contain the levels an analysis needs."""


class FitError(ExcitedConcError, RuntimeError):
    """A least-squares fit failed or had too few points."""


class DomainError(FitError, ValueError):
    """A data point lies outside the domain of the fitted transform."""
