"""Terminal-misfit functional, its adjoint-state gradient and numerical probes."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np

from .adjoint import ADJOINT_MODES, solve_adjoint, terminal_residual
from .errors import GridMismatchError
from .forward import (ModulatingFunction, SemidiscreteOperator, forward_terminal,
                      solve_forward)
from .grid import (ComplexField, SpatialGrid, TerminalData, TimeGrid, Trajectory,
                   composite_norm_sq, l2_inner, l2_norm)

__all__ = [
    "Problem",
    "evaluate_cost",
    "evaluate_gradient",
    "fd_gradient_check",
    "lipschitz_ratios",
    "lipschitz_probe",
    "convexity_probe",
    "ProbeReport",
]


@dataclass
class Problem:
    """Everything needed to evaluate ``J`` and ``J'`` for one data set.

    Parameters
    ----------
    grid, time_grid : SpatialGrid, TimeGrid
        Discretization of ``[0, ell] x [0, T]``.
    g : ModulatingFunction
        Known factor of the source term.
    measured : TerminalData, optional
        Terminal measurement ``U_T``; defaults to zero data.
    adjoint_mode : {"consistent", "pointwise"}
        Boundary treatment of the adjoint, see :mod:`schrodinger_isp.adjoint`.
    """

    grid: SpatialGrid
    time_grid: TimeGrid
    g: ModulatingFunction = field(default_factory=ModulatingFunction.constant)
    measured: TerminalData | None = None
    adjoint_mode: str = "consistent"

    def __post_init__(self):
        if self.adjoint_mode not in ADJOINT_MODES:
            raise ValueError(f"unknown adjoint mode {self.adjoint_mode!r}")
        if self.measured is None:
            self.measured = TerminalData.zeros(self.grid)
        elif self.measured.grid != self.grid:
            raise GridMismatchError("measured data lives on a different grid")

    @functools.cached_property
    def op(self) -> SemidiscreteOperator:
        return SemidiscreteOperator(self.grid)

    @functools.cached_property
    def g_table(self) -> np.ndarray:
        return self.g.table(self.grid, self.time_grid)

    def with_measured(self, measured: TerminalData) -> "Problem":
        return Problem(self.grid, self.time_grid, self.g, measured, self.adjoint_mode)

    def forward(self, f: ComplexField) -> TerminalData:
        return forward_terminal(f, self.g_table, self.op, self.time_grid)

    def trajectory(self, f: ComplexField) -> Trajectory:
        return solve_forward(f, self.g_table, self.op, self.time_grid)

    def cost(self, f: ComplexField) -> float:
        return evaluate_cost(self.forward(f), self.measured)

    def adjoint(self, f: ComplexField, computed: TerminalData | None = None) -> Trajectory:
        if computed is None:
            computed = self.forward(f)
        res = terminal_residual(computed, self.measured)
        return solve_adjoint(res, self.op, self.time_grid, mode=self.adjoint_mode)

    def gradient(self, f: ComplexField, computed: TerminalData | None = None) -> ComplexField:
        phi = self.adjoint(f, computed)
        return evaluate_gradient(phi, self.g_table, self._support)

    @property
    def _support(self) -> str:
        return "source" if self.adjoint_mode == "consistent" else "all"


def evaluate_cost(computed: TerminalData, measured: TerminalData) -> float:
    """``J = 1/2 ||computed - measured||^2`` in ``L^2(0, ell) x C^2``."""
    if computed.grid != measured.grid:
        raise GridMismatchError("computed and measured data live on different grids")
    return 0.5 * composite_norm_sq(computed - measured)


def evaluate_gradient(adjoint_traj: Trajectory, g, support: str = "source") -> ComplexField:
    """Time-trapezoid approximation of ``int_0^T phi(x, t) g(x, t) dt``.

    With ``support="source"`` the result is zeroed on the two boundary nodes,
    whose equations carry no source: the cost does not depend on ``f`` there,
    so the Riesz representative of the derivative vanishes.  ``support="all"``
    evaluates the integral at every node.
    """
    grid, tg = adjoint_traj.grid, adjoint_traj.time_grid
    if len(adjoint_traj) != tg.n_t + 1:
        raise ValueError("adjoint trajectory is missing time slices")
    table = g.table(grid, tg) if isinstance(g, ModulatingFunction) else np.asarray(g, dtype=float)
    if table.shape != adjoint_traj.values.shape:
        raise GridMismatchError(f"g table {table.shape} vs trajectory {adjoint_traj.values.shape}")
    grad = tg.weights @ (adjoint_traj.values * table)
    if support == "source":
        grad[0] = grad[-1] = 0.0
    elif support != "all":
        raise ValueError(f"unknown support {support!r}")
    return ComplexField(grad, grid)


def directional_derivative(problem: Problem, f: ComplexField, direction: ComplexField) -> float:
    return l2_inner(direction, problem.gradient(f)).real


def fd_gradient_check(f: ComplexField, direction: ComplexField, eps: float,
                      problem: Problem) -> float:
    """Central-difference check of the adjoint gradient along ``direction``.

    Returns ``|fd - <d, J'(f)>| / max(1, |fd|)``.
    """
    if not 1e-6 <= eps <= 1e-2:
        raise ValueError(f"eps must lie in [1e-6, 1e-2], got {eps}")
    if not np.any(direction.values):
        raise ValueError("direction must be nonzero")
    fd = (problem.cost(f + eps * direction) - problem.cost(f - eps * direction)) / (2 * eps)
    adj = directional_derivative(problem, f, direction)
    return abs(fd - adj) / max(1.0, abs(fd))


def lipschitz_ratios(samples, problem: Problem) -> np.ndarray:
    """``||J'(f + df) - J'(f)|| / ||df||`` for each ``(f, df)`` pair."""
    out = []
    for f, df in samples:
        norm_df = l2_norm(df)
        if norm_df == 0:
            raise ValueError("perturbation df must be nonzero")
        diff = problem.gradient(f + df) - problem.gradient(f)
        out.append(l2_norm(diff) / norm_df)
    return np.array(out)


def lipschitz_probe(samples, problem: Problem) -> float:
    """Largest sampled Lipschitz ratio of the gradient."""
    return float(np.max(lipschitz_ratios(samples, problem)))


def convexity_probe(f1: ComplexField, f2: ComplexField, problem: Problem) -> float:
    """Midpoint convexity gap ``J(f1)/2 + J(f2)/2 - J((f1 + f2)/2)``."""
    if f1.grid != f2.grid:
        raise GridMismatchError("f1 and f2 live on different grids")
    return 0.5 * problem.cost(f1) + 0.5 * problem.cost(f2) - problem.cost(0.5 * (f1 + f2))


@dataclass
class ProbeReport:
    check: str
    value: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {"check": self.check, "value": float(self.value),
                "tolerance": float(self.tolerance), "pass": bool(self.passed)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())
