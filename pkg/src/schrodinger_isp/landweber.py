"""Landweber reconstruction of the source with the exact line-search step."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DescentViolationError, InconsistencyError, SolverError
from .grid import ComplexField, composite_norm_sq, l2_inner, l2_norm
from .objective import Problem, evaluate_cost

__all__ = [
    "LandweberConfig",
    "IterationRecord",
    "ReconstructionHistory",
    "Termination",
    "landweber_run",
    "relative_l2_error",
    "STAGNATION_GRAD_NORM",
    "DESCENT_SLACK",
]

log = logging.getLogger(__name__)

STAGNATION_GRAD_NORM = 1e-14
DESCENT_SLACK = 1e-10


class Termination(str, enum.Enum):
    COST_BELOW_TOLERANCE = "cost_below_tolerance"
    MAX_ITER_REACHED = "max_iter_reached"
    STAGNATION = "stagnation"


@dataclass
class LandweberConfig:
    e_j: float = 1e-6
    max_iter: int = 2000
    f0: ComplexField | None = None

    def __post_init__(self):
        if not self.e_j > 0:
            raise ValueError("e_j must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterationRecord:
    """One row of the history.

    ``step`` and ``grad_norm`` are ``None`` on the final row, where the loop
    stopped before computing a new direction.
    """

    k: int
    cost: float
    step: float | None = None
    grad_norm: float | None = None

    def to_dict(self):
        return {"k": self.k, "J": self.cost, "alpha": self.step, "grad_norm": self.grad_norm}


@dataclass
class ReconstructionHistory:
    records: list[IterationRecord] = field(default_factory=list)
    final_iterate: ComplexField | None = None
    termination: Termination | None = None

    @property
    def iterations(self) -> int:
        """Number of updates ``f_k -> f_{k+1}`` performed."""
        return self.records[-1].k if self.records else 0

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    @property
    def final_cost(self) -> float:
        return self.records[-1].cost if self.records else float("nan")

    def to_json(self, **kwargs) -> str:
        return json.dumps([r.to_dict() for r in self.records], **kwargs)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(indent=1))
        return path


def landweber_run(cfg: LandweberConfig, problem: Problem) -> ReconstructionHistory:
    """Run the Landweber iteration on ``problem.measured``.

    Each pass solves the forward problem for ``f_k``, the adjoint problem from
    the terminal residual, and the forward problem for ``p_k = J'(f_k)``; the
    step ``alpha_k = ||p_k||^2 / ||Psi p_k||^2`` uses the plain ``L^2`` norm
    on top and the composite norm below.  Stops once ``J(f_{k+1}) < e_j``,
    after ``max_iter`` updates, or when ``||p_k||`` drops below
    ``STAGNATION_GRAD_NORM``.

    Raises
    ------
    InconsistencyError
        ``Psi p_k = 0`` for a nonzero ``p_k``.
    DescentViolationError
        ``J`` grew by more than ``DESCENT_SLACK`` relative.
    """
    grid = problem.grid
    f = cfg.f0 if cfg.f0 is not None else ComplexField.zeros(grid)
    if f.grid != grid:
        raise ValueError("initial guess lives on a different grid")
    hist = ReconstructionHistory(final_iterate=f)
    try:
        return _iterate(cfg, problem, f, hist)
    except SolverError as exc:
        # keep what was computed before the solver failed
        exc.history = hist
        raise


def _iterate(cfg, problem, f, hist):
    k = 0
    computed = problem.forward(f)
    cost = evaluate_cost(computed, problem.measured)
    while True:
        if cost < cfg.e_j:
            hist.termination = Termination.COST_BELOW_TOLERANCE
            break
        if k >= cfg.max_iter:
            hist.termination = Termination.MAX_ITER_REACHED
            break
        p = problem.gradient(f, computed)
        grad_norm = l2_norm(p)
        if grad_norm < STAGNATION_GRAD_NORM:
            hist.termination = Termination.STAGNATION
            hist.records.append(IterationRecord(k, cost, None, grad_norm))
            hist.final_iterate = f
            return hist
        psi_p = problem.forward(p)
        denom = composite_norm_sq(psi_p)
        if denom == 0.0:
            hist.final_iterate = f
            raise InconsistencyError(
                f"forward map annihilated a descent direction with norm {grad_norm:.3e}"
                f" at k={k}", history=hist)
        step = l2_inner(p, p).real / denom
        hist.records.append(IterationRecord(k, cost, step, grad_norm))
        f = f - step * p
        hist.final_iterate = f
        k += 1
        computed = problem.forward(f)
        new_cost = evaluate_cost(computed, problem.measured)
        if new_cost > cost * (1.0 + DESCENT_SLACK):
            hist.records.append(IterationRecord(k, new_cost))
            hist.final_iterate = f
            raise DescentViolationError(
                f"cost increased from {cost:.6e} to {new_cost:.6e} at k={k}", history=hist)
        cost = new_cost
        log.debug("k=%d J=%.3e alpha=%.3e |p|=%.3e", k, cost, step, grad_norm)
    hist.records.append(IterationRecord(k, cost))
    hist.final_iterate = f
    return hist


def relative_l2_error(recovered: ComplexField, exact: ComplexField) -> float:
    denom = l2_inner(exact, exact).real
    if denom == 0.0:
        raise ZeroDivisionError("exact field is identically zero")
    diff = recovered - exact
    return float(np.sqrt(l2_inner(diff, diff).real / denom))
