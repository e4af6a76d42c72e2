"""Entry points reserved for the test suite.

The public solvers always start from zero data.  Conservation checks need a
nonzero initial slice with no source, which is provided here.
"""

from __future__ import annotations

import numpy as np

from .errors import GridMismatchError
from .forward import SemidiscreteOperator, integrate
from .grid import ComplexField, TimeGrid, Trajectory

__all__ = ["evolve_source_free"]


def evolve_source_free(initial: ComplexField, op: SemidiscreteOperator, tg: TimeGrid,
                       sign: int = 1) -> Trajectory:
    """Source-free CN evolution from ``initial``; ``sign=-1`` runs the reversed-time system."""
    if initial.grid != op.grid:
        raise GridMismatchError("initial slice lives on a different grid")
    states = integrate(op, tg, np.array(initial.values), None, sign=sign, store=True)
    return Trajectory(states, op.grid, tg)
