"""Method-of-lines forward solver.

Semidiscrete system on the nodes of a :class:`SpatialGrid`::

    dy_j/dt = i (y_{j-1} - 2 y_j + y_{j+1}) / h^2 - i f_j g(x_j, t)   1 <= j <= n_x-1
    dy_0/dt = i (y_1 - y_0) / h
    dy_N/dt = -i (y_N - y_{N-1}) / h

The boundary rows are the dynamic conditions ``i y_t(0) + y_x(0) = 0`` and
``i y_t(ell) - y_x(ell) = 0`` with one-sided differences; they carry no
source.  Time stepping is Crank-Nicolson with the source averaged over the
step, and the tridiagonal system matrix is factored once per ``(grid, dt)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import lapack

from .errors import DivergenceError, GridMismatchError, SingularSystemError
from .grid import ComplexField, SpatialGrid, TerminalData, TimeGrid, Trajectory

__all__ = [
    "ModulatingFunction",
    "SemidiscreteOperator",
    "SolverConfig",
    "assemble_ode_rhs",
    "solve_forward",
    "forward_terminal",
    "terminal_of",
    "save_trajectory_csv",
]


class ModulatingFunction:
    """Known real factor ``g(x, t)`` multiplying the unknown source.

    Use :meth:`constant`, :meth:`from_callable` or :meth:`from_table` to build
    one; :meth:`table` samples it on a space-time grid.
    """

    def __init__(self, sampler, name="custom"):
        self._sampler = sampler
        self.name = name

    @classmethod
    def constant(cls, value=1.0):
        value = float(value)
        return cls(lambda x, t: np.full((t.size, x.size), value), name=f"const({value:g})")

    @classmethod
    def from_callable(cls, func, name="callable"):
        """``func(x, t)`` is called with broadcastable arrays (t as a column)."""
        def sampler(x, t):
            out = np.asarray(func(x[None, :], t[:, None]))
            return np.broadcast_to(out, (t.size, x.size))
        return cls(sampler, name=name)

    @classmethod
    def from_table(cls, table, name="table"):
        table = np.asarray(table)

        def sampler(x, t):
            if table.shape != (t.size, x.size):
                raise GridMismatchError(
                    f"tabulated g has shape {table.shape}, grid needs {(t.size, x.size)}")
            return table
        return cls(sampler, name=name)

    def sample(self, j, m, grid: SpatialGrid, time_grid: TimeGrid) -> float:
        return float(self.table(grid, time_grid)[m, j])

    def table(self, grid: SpatialGrid, time_grid: TimeGrid) -> np.ndarray:
        """Values ``g(x_j, t_m)`` as an ``(n_t+1, n_x+1)`` array."""
        vals = np.asarray(self._sampler(grid.nodes, time_grid.nodes))
        if np.iscomplexobj(vals):
            if np.any(vals.imag != 0):
                raise ValueError("g must be real-valued")
            vals = vals.real
        vals = np.array(vals, dtype=float)
        if vals.shape != (time_grid.n_t + 1, grid.size):
            raise GridMismatchError(f"g sampled to shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("g has non-finite samples")
        return vals

    def scaled(self, factor):
        base = self._sampler
        return ModulatingFunction(lambda x, t: factor * np.asarray(base(x, t)),
                                  name=f"{factor:g}*{self.name}")

    def __repr__(self):
        return f"ModulatingFunction({self.name})"


@dataclass(frozen=True)
class SemidiscreteOperator:
    """Tridiagonal linear part ``A`` of the semidiscrete system (``dy/dt = iAy + ...``)."""

    grid: SpatialGrid

    @functools.cached_property
    def bands(self):
        h = self.grid.h
        n = self.grid.size
        lower = np.full(n - 1, 1.0 / h**2)
        diag = np.full(n, -2.0 / h**2)
        upper = np.full(n - 1, 1.0 / h**2)
        diag[0] = -1.0 / h
        upper[0] = 1.0 / h
        diag[-1] = -1.0 / h
        lower[-1] = 1.0 / h
        return lower, diag, upper

    @functools.cached_property
    def source_mask(self) -> np.ndarray:
        """1 on nodes whose equation carries the source, 0 on the boundary rows."""
        mask = np.ones(self.grid.size)
        mask[0] = mask[-1] = 0.0
        return mask

    def apply(self, y: np.ndarray) -> np.ndarray:
        """``A @ y`` for a vector or a stack of column vectors."""
        lower, diag, upper = self.bands
        if y.ndim == 2:
            lower, diag, upper = lower[:, None], diag[:, None], upper[:, None]
        out = diag * y
        out[:-1] += upper * y[1:]
        out[1:] += lower * y[:-1]
        return out

    def dense(self) -> np.ndarray:
        lower, diag, upper = self.bands
        return np.diag(diag) + np.diag(upper, 1) + np.diag(lower, -1)


@dataclass(frozen=True)
class SolverConfig:
    n_t: int = 200
    store_trajectory: bool = True

    def __post_init__(self):
        if self.n_t < 1:
            raise ValueError("n_t must be >= 1")

    def time_grid(self, t_final=1.0) -> TimeGrid:
        return TimeGrid(t_final, self.n_t)


def _check_field(fld: ComplexField, op: SemidiscreteOperator, what="field"):
    if fld.grid != op.grid:
        raise GridMismatchError(f"{what} grid {fld.grid} does not match operator grid {op.grid}")


def assemble_ode_rhs(state: ComplexField, source: ComplexField, g_value_at_t,
                     op: SemidiscreteOperator) -> ComplexField:
    """Right-hand side ``dy/dt`` of the semidiscrete forward system."""
    _check_field(state, op, "state")
    _check_field(source, op, "source")
    g_t = np.broadcast_to(np.asarray(g_value_at_t, dtype=float), (op.grid.size,))
    rhs = 1j * op.apply(state.values) - 1j * op.source_mask * source.values * g_t
    return ComplexField(rhs, op.grid)


class CrankNicolson:
    """Factored CN stepper for ``dy/ds = sign * i A y + src``.

    ``sign=+1`` is forward time; ``sign=-1`` integrates the same system in
    reversed time ``tau = T - t``.
    """

    def __init__(self, op: SemidiscreteOperator, dt: float, sign: int = 1):
        self.op = op
        self.dt = dt
        self.sign = sign
        lower, diag, upper = op.bands
        c = -0.5 * dt * sign * 1j
        dl, d, du, du2, ipiv, info = lapack.zgttrf(c * lower, 1.0 + c * diag, c * upper)
        if info != 0:
            raise SingularSystemError(f"Crank-Nicolson matrix is singular (info={info})")
        self._lu = (dl, d, du, du2, ipiv)

    def step(self, y: np.ndarray, src: np.ndarray | None = None) -> np.ndarray:
        rhs = y + (0.5 * self.dt * self.sign * 1j) * self.op.apply(y)
        if src is not None:
            rhs = rhs + self.dt * src
        out, info = lapack.zgttrs(*self._lu, rhs)
        if info != 0:
            raise SingularSystemError(f"tridiagonal solve failed (info={info})")
        return out


@functools.lru_cache(maxsize=64)
def _stepper(grid: SpatialGrid, dt: float, sign: int) -> CrankNicolson:
    return CrankNicolson(SemidiscreteOperator(grid), dt, sign)


def integrate(op: SemidiscreteOperator, tg: TimeGrid, y0: np.ndarray, sources=None,
              sign: int = 1, store: bool = True):
    """Run CN from ``y0``.

    ``sources`` is either ``None`` or a callable ``m -> src`` giving the
    averaged source over step ``m``.  Returns the stacked states when
    ``store`` is true, else the final state.  ``y0`` may carry extra columns
    (batched right-hand sides).
    """
    cn = _stepper(op.grid, tg.dt, sign)
    y = np.array(y0, dtype=complex)
    states = [y] if store else None
    for m in range(tg.n_t):
        y = cn.step(y, None if sources is None else sources(m))
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"non-finite state after time step {m + 1}", step=m + 1)
        if store:
            states.append(y)
    return np.stack(states) if store else y


def _source_steps(f_vals: np.ndarray, g_table: np.ndarray, mask: np.ndarray):
    """Callable ``m -> -i * mask * f * (g^m + g^{m+1}) / 2``."""
    g_half = 0.5 * (g_table[:-1] + g_table[1:])
    masked = -1j * mask * f_vals if f_vals.ndim == 1 else -1j * mask[:, None] * f_vals
    if f_vals.ndim == 1:
        return lambda m: masked * g_half[m]
    return lambda m: masked * g_half[m][:, None]


def _g_table(g, op: SemidiscreteOperator, tg: TimeGrid) -> np.ndarray:
    if isinstance(g, ModulatingFunction):
        return g.table(op.grid, tg)
    table = np.asarray(g, dtype=float)
    if table.shape != (tg.n_t + 1, op.grid.size):
        raise GridMismatchError(f"g table has shape {table.shape}")
    return table


def _resolve_time_grid(tg: TimeGrid, cfg: SolverConfig | None) -> TimeGrid:
    if cfg is not None and cfg.n_t != tg.n_t:
        raise ValueError(f"SolverConfig.n_t={cfg.n_t} disagrees with TimeGrid.n_t={tg.n_t}")
    return tg


def solve_forward(f: ComplexField, g, op: SemidiscreteOperator, tg: TimeGrid,
                  cfg: SolverConfig | None = None) -> Trajectory:
    """Full trajectory ``y(., t_m)`` for source ``f`` from zero initial data."""
    _check_field(f, op, "source")
    tg = _resolve_time_grid(tg, cfg)
    src = _source_steps(f.values, _g_table(g, op, tg), op.source_mask)
    states = integrate(op, tg, np.zeros(op.grid.size, dtype=complex), src, store=True)
    return Trajectory(states, op.grid, tg)


def forward_terminal(f: ComplexField, g, op: SemidiscreteOperator, tg: TimeGrid) -> TerminalData:
    """``Psi f`` without storing the trajectory."""
    _check_field(f, op, "source")
    src = _source_steps(f.values, _g_table(g, op, tg), op.source_mask)
    y = integrate(op, tg, np.zeros(op.grid.size, dtype=complex), src, store=False)
    return TerminalData.from_state(ComplexField(y, op.grid))


def terminal_of(traj: Trajectory) -> TerminalData:
    return TerminalData.from_state(traj.final)


def save_trajectory_csv(traj: Trajectory, path) -> Path:
    """Long-format CSV with columns ``t, x, re, im``."""
    path = Path(path)
    t = np.repeat(traj.time_grid.nodes, traj.grid.size)
    x = np.tile(traj.grid.nodes, len(traj))
    v = traj.values.ravel()
    np.savetxt(path, np.column_stack([t, x, v.real, v.imag]), delimiter=",",
               header="t,x,re,im", comments="", fmt="%.17g")
    return path
