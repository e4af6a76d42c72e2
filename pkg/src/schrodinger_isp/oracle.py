"""Dense-matrix forward map for small grids.

The matrix is assembled column by column from unit sources and its rows are
scaled by the square roots of the composite-norm weights, so that Euclidean
algebra on the matrix reproduces the ``L^2(0, ell) x C^2`` geometry.  It is a
verification tool: assembly is refused above ``MAX_NX`` / ``MAX_NT``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError
from .forward import ModulatingFunction, SemidiscreteOperator, _source_steps, integrate
from .grid import ComplexField, SpatialGrid, TerminalData, TimeGrid

__all__ = ["DenseForwardMap", "assemble_forward_map", "oracle_gradient",
           "spectral_lipschitz_bound", "MAX_NX", "MAX_NT"]

MAX_NX = 32
MAX_NT = 256


def composite_row_weights(grid: SpatialGrid) -> np.ndarray:
    return np.concatenate([grid.weights, [1.0, 1.0]])


@dataclass(frozen=True, eq=False)
class DenseForwardMap:
    """``(n_x+3) x (n_x+1)`` matrix ``M`` with ``M f = W^{1/2} Psi f``."""

    matrix: np.ndarray
    grid: SpatialGrid
    time_grid: TimeGrid

    @property
    def row_sqrt_weights(self) -> np.ndarray:
        return np.sqrt(composite_row_weights(self.grid))

    def weigh(self, d: TerminalData) -> np.ndarray:
        if d.grid != self.grid:
            raise GridMismatchError("terminal data lives on a different grid")
        return self.row_sqrt_weights * d.as_vector()

    def unweigh(self, vec) -> TerminalData:
        return TerminalData.from_vector(np.asarray(vec) / self.row_sqrt_weights, self.grid)

    def apply(self, f: ComplexField) -> np.ndarray:
        if f.grid != self.grid:
            raise GridMismatchError("source lives on a different grid")
        return self.matrix @ f.values

    def l2_operator(self) -> np.ndarray:
        """Matrix of ``Psi`` between the trapezoid ``L^2`` and composite norms."""
        return self.matrix / np.sqrt(self.grid.weights)[None, :]

    def singular_values(self, identifiable_only=False) -> np.ndarray:
        """Singular values of :meth:`l2_operator`.

        With ``identifiable_only`` the structurally zero columns (nodes whose
        equation carries no source) are dropped first.
        """
        mat = self.l2_operator()
        if identifiable_only:
            mat = mat[:, np.any(self.matrix != 0, axis=0)]
        return np.linalg.svd(mat, compute_uv=False)

    def save_csv(self, path) -> Path:
        """Row-major dump with columns ``row, col, re, im``."""
        path = Path(path)
        rows, cols = np.indices(self.matrix.shape)
        m = self.matrix.ravel()
        np.savetxt(path, np.column_stack([rows.ravel(), cols.ravel(), m.real, m.imag]),
                   delimiter=",", header="row,col,re,im", comments="",
                   fmt=["%d", "%d", "%.17g", "%.17g"])
        return path


def assemble_forward_map(g: ModulatingFunction, grid: SpatialGrid,
                         time_grid: TimeGrid) -> DenseForwardMap:
    if grid.n_x > MAX_NX or time_grid.n_t > MAX_NT:
        raise ValueError(f"dense assembly limited to n_x <= {MAX_NX}, n_t <= {MAX_NT};"
                         f" got n_x={grid.n_x}, n_t={time_grid.n_t}")
    op = SemidiscreteOperator(grid)
    n = grid.size
    table = g.table(grid, time_grid) if isinstance(g, ModulatingFunction) else np.asarray(g)
    # every unit source at once, one column each
    src = _source_steps(np.eye(n, dtype=complex), table, op.source_mask)
    y_final = integrate(op, time_grid, np.zeros((n, n), dtype=complex), src, store=False)
    terminal = np.vstack([y_final, y_final[:1], y_final[-1:]])
    matrix = np.sqrt(composite_row_weights(grid))[:, None] * terminal
    return DenseForwardMap(matrix, grid, time_grid)


def oracle_gradient(f: ComplexField, measured: TerminalData, fmap: DenseForwardMap) -> ComplexField:
    """Exact gradient of ``1/2 |M f - W^{1/2} u|^2`` as nodal values.

    ``M^H r`` is the Euclidean gradient; dividing by the trapezoid weights
    gives the representative with respect to ``Re l2_inner``.
    """
    if f.grid != fmap.grid or measured.grid != fmap.grid:
        raise GridMismatchError("dimension mismatch between source, data and map")
    residual = fmap.apply(f) - fmap.weigh(measured)
    return ComplexField(fmap.matrix.conj().T @ residual / fmap.grid.weights, fmap.grid)


def oracle_cost(f: ComplexField, measured: TerminalData, fmap: DenseForwardMap) -> float:
    r = fmap.apply(f) - fmap.weigh(measured)
    return 0.5 * float(np.vdot(r, r).real)


def spectral_lipschitz_bound(fmap: DenseForwardMap) -> float:
    """Largest eigenvalue of the normal operator, ``sigma_max^2``."""
    if not np.any(fmap.matrix):
        return 0.0
    return float(fmap.singular_values()[0] ** 2)
