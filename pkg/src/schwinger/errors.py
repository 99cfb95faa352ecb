"""Exception types shared across the package.

``ValueError`` is used for invalid inputs everywhere; the classes below mark
numerical failures, which the CLI maps to a distinct exit code.
"""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure on valid input."""


class FitError(NumericalError):
    pass


class OptimizationError(NumericalError):
    """VQE could not reach the requested fidelity after all restarts."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateGroundStateError(NumericalError):
    pass


class EmptySelectionError(NumericalError):
    """Post-selection discarded every shot."""
