"""Exception types raised across the package."""


class GridMismatchError(ValueError):
    """Two fields or data sets live on different spatial grids."""


class SolverError(RuntimeError):
    """Base class for failures inside the time integrators.

    ``history`` is filled in when the failure happens inside a reconstruction.
    """

    history = None


class SingularSystemError(SolverError):
    """The Crank-Nicolson system matrix could not be factored."""


class DivergenceError(SolverError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ReconstructionError(RuntimeError):
    """Fatal condition inside the Landweber loop.

    The partial history is attached so it can still be written to disk.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class InconsistencyError(ReconstructionError):
    """The forward map annihilated a nonzero descent direction."""


class DescentViolationError(ReconstructionError):
    """The cost increased between iterates."""
