"""Backward solve of the adjoint system ``i phi_t + phi_xx = 0``.

The adjoint uses the same stencils and dynamic boundary rows as the forward
problem and is integrated from ``t = T`` down to ``t = 0`` with
Crank-Nicolson in reversed time.

Boundary nodes hold a single unknown that stands for both the trace and the
endpoint value of the interior field.  Two ways of mapping the terminal
residual onto that node are supported:

``"consistent"`` (default)
    ``phi_0(T) = i [(y_0 - u^0) + (h/2)(y_0 - u_0)]``, i.e. the trace residual
    plus the trapezoid end weight of the interior residual.  The semidiscrete
    operator is symmetric for the node weights ``(1, h, ..., h, 1)``, so with
    this closure the adjoint reproduces the exact derivative of the discrete
    cost.
``"pointwise"``
    ``phi_0(T) = i (y_0 - u^0)``, the trace condition taken literally.  It
    converges to the same limit but carries an O(h) error at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .forward import SemidiscreteOperator, SolverConfig, integrate, _resolve_time_grid
from .grid import ComplexField, TerminalData, TimeGrid, Trajectory

__all__ = ["TerminalResidual", "terminal_residual", "solve_adjoint", "terminal_slice",
           "ADJOINT_MODES"]

ADJOINT_MODES = ("consistent", "pointwise")


@dataclass(frozen=True)
class TerminalResidual:
    """``i (Y(., T; f) - U_T)`` stored componentwise."""

    data: TerminalData

    @property
    def grid(self):
        return self.data.grid


def terminal_residual(computed: TerminalData, measured: TerminalData) -> TerminalResidual:
    if computed.grid != measured.grid:
        raise GridMismatchError(f"grid mismatch: {computed.grid} vs {measured.grid}")
    return TerminalResidual(1j * (computed - measured))


def terminal_slice(res: TerminalResidual, mode: str = "consistent") -> np.ndarray:
    """Nodal adjoint state at ``t = T``."""
    if mode not in ADJOINT_MODES:
        raise ValueError(f"unknown adjoint mode {mode!r}; expected one of {ADJOINT_MODES}")
    d = res.data
    phi = np.array(d.interior.values)
    if mode == "consistent":
        half_h = 0.5 * d.grid.h
        phi[0] = d.trace_left + half_h * phi[0]
        phi[-1] = d.trace_right + half_h * phi[-1]
    else:
        phi[0] = d.trace_left
        phi[-1] = d.trace_right
    return phi


def solve_adjoint(res: TerminalResidual, op: SemidiscreteOperator, tg: TimeGrid,
                  cfg: SolverConfig | None = None, mode: str = "consistent") -> Trajectory:
    """Adjoint trajectory indexed by forward time: ``slices[m] ~ phi(., t_m)``."""
    if res.grid != op.grid:
        raise GridMismatchError(f"residual grid {res.grid} does not match operator grid {op.grid}")
    tg = _resolve_time_grid(tg, cfg)
    # tau = T - t turns phi_t = iA phi into dphi/dtau = -iA phi
    states = integrate(op, tg, terminal_slice(res, mode), None, sign=-1, store=True)
    return Trajectory(states[::-1], op.grid, tg)


def adjoint_initial_field(res: TerminalResidual, mode: str = "consistent") -> ComplexField:
    return ComplexField(terminal_slice(res, mode), res.grid)
