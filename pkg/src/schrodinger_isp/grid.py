"""Uniform grids, complex field containers and the discrete inner products.

The source and state spaces are discretized on the nodes ``x_j = j*h`` of
``[0, ell]``.  The interior component of ``L^2(0, ell) x C^2`` is integrated
with the composite trapezoid rule; the two boundary traces are carried as
separate complex scalars, so a boundary node contributes both ``h/2`` (through
the trapezoid sum) and ``1`` (through its trace) to the composite norm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridMismatchError

__all__ = [
    "SpatialGrid",
    "TimeGrid",
    "ComplexField",
    "Trajectory",
    "TerminalData",
    "l2_inner",
    "l2_norm",
    "composite_inner",
    "composite_norm_sq",
    "field_axpy",
    "save_field_csv",
    "load_field_csv",
    "save_terminal",
    "load_terminal",
]


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on ``[0, ell]`` with ``n_x`` subintervals."""

    ell: float = 1.0
    n_x: int = 25

    def __post_init__(self):
        if not (np.isfinite(self.ell) and self.ell > 0):
            raise ValueError(f"ell must be positive, got {self.ell}")
        if int(self.n_x) != self.n_x or self.n_x < 2:
            raise ValueError(f"n_x must be an integer >= 2, got {self.n_x}")
        object.__setattr__(self, "ell", float(self.ell))
        object.__setattr__(self, "n_x", int(self.n_x))

    @property
    def h(self) -> float:
        return self.ell / self.n_x

    @property
    def size(self) -> int:
        return self.n_x + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.ell, self.n_x + 1)

    @property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights."""
        w = np.full(self.n_x + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on ``[0, t_final]`` with ``n_t`` steps."""

    t_final: float = 1.0
    n_t: int = 200

    def __post_init__(self):
        if not (np.isfinite(self.t_final) and self.t_final > 0):
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if int(self.n_t) != self.n_t or self.n_t < 1:
            raise ValueError(f"n_t must be an integer >= 1, got {self.n_t}")
        object.__setattr__(self, "t_final", float(self.t_final))
        object.__setattr__(self, "n_t", int(self.n_t))

    @property
    def dt(self) -> float:
        return self.t_final / self.n_t

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_t + 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_t + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


def _frozen_complex(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != shape:
        raise GridMismatchError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex nodal values on a :class:`SpatialGrid`."""

    values: np.ndarray
    grid: SpatialGrid

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_complex(self.values, (self.grid.size,)))

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "ComplexField":
        return cls(np.zeros(grid.size, dtype=complex), grid)

    @classmethod
    def from_function(cls, func, grid: SpatialGrid) -> "ComplexField":
        return cls(np.asarray(func(grid.nodes), dtype=complex) * np.ones(grid.size), grid)

    def _check(self, other: "ComplexField"):
        if not isinstance(other, ComplexField):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexField(self.values + other.values, self.grid)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexField(self.values - other.values, self.grid)

    def __neg__(self):
        return ComplexField(-self.values, self.grid)

    def __mul__(self, scalar):
        if isinstance(scalar, ComplexField) or np.ndim(scalar) != 0:
            return NotImplemented
        return ComplexField(complex(scalar) * self.values, self.grid)

    __rmul__ = __mul__

    def conj(self) -> "ComplexField":
        return ComplexField(np.conj(self.values), self.grid)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def __len__(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"ComplexField(n_x={self.grid.n_x}, ell={self.grid.ell})"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Space-time field; row ``m`` is the slice at ``t_m``."""

    values: np.ndarray
    grid: SpatialGrid
    time_grid: TimeGrid

    def __post_init__(self):
        shape = (self.time_grid.n_t + 1, self.grid.size)
        object.__setattr__(self, "values", _frozen_complex(self.values, shape))

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, m) -> ComplexField:
        return ComplexField(self.values[m], self.grid)

    @property
    def slices(self) -> list[ComplexField]:
        return [self[m] for m in range(len(self))]

    @property
    def final(self) -> ComplexField:
        return self[-1]


@dataclass(frozen=True, eq=False)
class TerminalData:
    """Element ``(u, u^0, u^ell)`` of ``L^2(0, ell) x C^2``."""

    interior: ComplexField
    trace_left: complex = 0j
    trace_right: complex = 0j

    def __post_init__(self):
        for name in ("trace_left", "trace_right"):
            val = complex(getattr(self, name))
            if not np.isfinite(val):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, val)

    @property
    def grid(self) -> SpatialGrid:
        return self.interior.grid

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> "TerminalData":
        return cls(ComplexField.zeros(grid))

    @classmethod
    def from_state(cls, state: ComplexField) -> "TerminalData":
        """Terminal data whose traces are the endpoint values of ``state``."""
        return cls(state, state.values[0], state.values[-1])

    def as_vector(self) -> np.ndarray:
        """Interior nodes followed by the two traces."""
        return np.concatenate([self.interior.values, [self.trace_left, self.trace_right]])

    @classmethod
    def from_vector(cls, vec, grid: SpatialGrid) -> "TerminalData":
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (grid.size + 2,):
            raise GridMismatchError(f"expected {grid.size + 2} entries, got {vec.shape}")
        return cls(ComplexField(vec[:-2], grid), vec[-2], vec[-1])

    def __add__(self, other):
        if not isinstance(other, TerminalData):
            return NotImplemented
        return TerminalData(self.interior + other.interior,
                            self.trace_left + other.trace_left,
                            self.trace_right + other.trace_right)

    def __sub__(self, other):
        if not isinstance(other, TerminalData):
            return NotImplemented
        return TerminalData(self.interior - other.interior,
                            self.trace_left - other.trace_left,
                            self.trace_right - other.trace_right)

    def __mul__(self, scalar):
        if np.ndim(scalar) != 0 or isinstance(scalar, (ComplexField, TerminalData)):
            return NotImplemented
        c = complex(scalar)
        return TerminalData(c * self.interior, c * self.trace_left, c * self.trace_right)

    __rmul__ = __mul__


def _same_grid(a: SpatialGrid, b: SpatialGrid):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def l2_inner(u: ComplexField, v: ComplexField) -> complex:
    """Trapezoid approximation of ``int_0^ell u conj(v) dx``."""
    _same_grid(u.grid, v.grid)
    if u is v or u.values is v.values:
        return complex(np.sum(u.grid.weights * (u.values.real**2 + u.values.imag**2)))
    return complex(np.sum(u.grid.weights * u.values * np.conj(v.values)))


def l2_norm(u: ComplexField) -> float:
    return float(np.sqrt(max(l2_inner(u, u).real, 0.0)))


def composite_inner(a: TerminalData, b: TerminalData) -> complex:
    """Inner product of ``L^2(0, ell) x C^2``."""
    return (l2_inner(a.interior, b.interior)
            + a.trace_left * np.conj(b.trace_left)
            + a.trace_right * np.conj(b.trace_right))


def composite_norm_sq(d: TerminalData) -> float:
    return (l2_inner(d.interior, d.interior).real
            + abs(d.trace_left) ** 2 + abs(d.trace_right) ** 2)


def field_axpy(a: complex, x: ComplexField, y: ComplexField) -> ComplexField:
    """Return ``a*x + y``."""
    _same_grid(x.grid, y.grid)
    return ComplexField(complex(a) * x.values + y.values, x.grid)


# --- serialization -----------------------------------------------------------

def save_field_csv(fld: ComplexField, path) -> Path:
    path = Path(path)
    data = np.column_stack([fld.grid.nodes, fld.real, fld.imag])
    np.savetxt(path, data, delimiter=",", header="x,re,im", comments="", fmt="%.17g")
    return path


def load_field_csv(path) -> ComplexField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected columns x,re,im")
    x = data[:, 0]
    grid = SpatialGrid(ell=float(x[-1]), n_x=len(x) - 1)
    if not np.allclose(x, grid.nodes, rtol=0, atol=1e-12 * grid.ell):
        raise ValueError(f"{path}: nodes are not a uniform grid starting at 0")
    return ComplexField(data[:, 1] + 1j * data[:, 2], grid)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_terminal(d: TerminalData, path, metadata: dict | None = None) -> Path:
    """Write ``d`` as CSV plus a JSON sidecar holding the traces."""
    path = save_field_csv(d.interior, path)
    side = {
        "trace_left": [d.trace_left.real, d.trace_left.imag],
        "trace_right": [d.trace_right.real, d.trace_right.imag],
    }
    side.update(metadata or {})
    sidecar_path(path).write_text(json.dumps(side, indent=2))
    return path


def load_terminal(path) -> tuple[TerminalData, dict]:
    """Read terminal data; returns the data and the remaining sidecar metadata."""
    interior = load_field_csv(path)
    side = json.loads(sidecar_path(path).read_text())
    tl = side.pop("trace_left")
    tr = side.pop("trace_right")
    return TerminalData(interior, complex(tl[0], tl[1]), complex(tr[0], tr[1])), side
