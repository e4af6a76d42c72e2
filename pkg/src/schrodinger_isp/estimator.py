"""Scikit-learn style wrapper around the Landweber reconstruction.

``fit`` takes one terminal measurement, either a :class:`TerminalData` or a
complex vector laid out as ``(u_0, ..., u_N, u^0, u^ell)``, and stores the
recovered source.  ``predict`` maps sources to terminal data; ``transform``
maps measurements to reconstructed sources.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .adjoint import ADJOINT_MODES
from .forward import ModulatingFunction
from .grid import ComplexField, SpatialGrid, TerminalData, TimeGrid
from .landweber import LandweberConfig, landweber_run
from .objective import Problem, evaluate_cost

__all__ = ["LandweberSourceEstimator", "check_complex_vector", "check_terminal_data",
           "check_source"]


def check_complex_vector(x, size: int, name: str = "X") -> np.ndarray:
    """Validate a finite one-dimensional numeric array of length ``size``.

    ``sklearn.utils.check_array`` refuses complex input, hence this helper.
    """
    arr = np.asarray(x)
    if arr.dtype == object or not np.issubdtype(arr.dtype, np.number):
        raise TypeError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = np.squeeze(arr.astype(complex))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {np.shape(x)}")
    if arr.size != size:
        raise ValueError(f"{name} has {arr.size} entries, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return arr


def check_terminal_data(u, grid: SpatialGrid) -> TerminalData:
    if isinstance(u, TerminalData):
        if u.grid != grid:
            raise ValueError("terminal data lives on a different grid")
        return u
    return TerminalData.from_vector(check_complex_vector(u, grid.size + 2, "U"), grid)


def check_source(f, grid: SpatialGrid) -> ComplexField:
    if isinstance(f, ComplexField):
        if f.grid != grid:
            raise ValueError("source lives on a different grid")
        return f
    return ComplexField(check_complex_vector(f, grid.size, "f"), grid)


def _check_positive(value, name, integral=False):
    kind = numbers.Integral if integral else numbers.Real
    if not isinstance(value, kind) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive {'integer' if integral else 'number'}, "
                         f"got {value!r}")


class LandweberSourceEstimator(BaseEstimator):
    """Recover ``f`` from final-time data by Landweber iteration.

    Parameters
    ----------
    ell, t_final : float
        Length of the interval and the time horizon.
    n_x, n_t : int
        Number of spatial subintervals and time steps.
    g : ModulatingFunction, optional
        Known factor of the source; ``None`` means ``g = 1``.
    e_j : float
        Stopping tolerance on the cost.
    max_iter : int
        Iteration cap.
    adjoint_mode : {"consistent", "pointwise"}
        Boundary treatment of the adjoint problem.

    Attributes
    ----------
    source_ : ComplexField
        Reconstructed source.
    history_ : ReconstructionHistory
    n_iter_ : int
    termination_ : str
    """

    def __init__(self, ell=1.0, t_final=1.0, n_x=25, n_t=200, g=None, e_j=1e-6,
                 max_iter=2000, adjoint_mode="consistent"):
        self.ell = ell
        self.t_final = t_final
        self.n_x = n_x
        self.n_t = n_t
        self.g = g
        self.e_j = e_j
        self.max_iter = max_iter
        self.adjoint_mode = adjoint_mode

    def _validate_params(self):
        _check_positive(self.ell, "ell")
        _check_positive(self.t_final, "t_final")
        _check_positive(self.n_x, "n_x", integral=True)
        _check_positive(self.n_t, "n_t", integral=True)
        _check_positive(self.e_j, "e_j")
        _check_positive(self.max_iter, "max_iter", integral=True)
        if self.n_x < 2:
            raise ValueError("n_x must be >= 2")
        if self.adjoint_mode not in ADJOINT_MODES:
            raise ValueError(f"adjoint_mode must be one of {ADJOINT_MODES}")
        if self.g is not None and not isinstance(self.g, ModulatingFunction):
            raise TypeError("g must be a ModulatingFunction or None")

    def _problem(self) -> Problem:
        self._validate_params()
        g = self.g if self.g is not None else ModulatingFunction.constant(1.0)
        return Problem(SpatialGrid(self.ell, self.n_x), TimeGrid(self.t_final, self.n_t), g,
                       adjoint_mode=self.adjoint_mode)

    def fit(self, U, y=None, f0=None):
        """Reconstruct the source from the measurement ``U``."""
        problem = self._problem()
        measured = check_terminal_data(U, problem.grid)
        start = None if f0 is None else check_source(f0, problem.grid)
        hist = landweber_run(LandweberConfig(self.e_j, self.max_iter, start),
                             problem.with_measured(measured))
        self.problem_ = problem.with_measured(measured)
        self.history_ = hist
        self.source_ = hist.final_iterate
        self.n_iter_ = hist.iterations
        self.termination_ = hist.termination.value
        return self

    def transform(self, U):
        """Nodal values of the source reconstructed from ``U`` (refits)."""
        return self.fit(U).source_.values.copy()

    def fit_transform(self, U, y=None):
        return self.transform(U)

    def predict(self, f=None):
        """Terminal data vector ``Psi f``; ``f`` defaults to the fitted source."""
        check_is_fitted(self, "source_")
        src = self.source_ if f is None else check_source(f, self.problem_.grid)
        return self.problem_.forward(src).as_vector()

    def score(self, U, y=None):
        """Negative cost of the fitted source against ``U``."""
        check_is_fitted(self, "source_")
        measured = check_terminal_data(U, self.problem_.grid)
        return -evaluate_cost(self.problem_.forward(self.source_), measured)
