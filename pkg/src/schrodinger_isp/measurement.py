"""Synthetic terminal measurements.

Noisy data follow ``U_T = Y_T + p * ||Y_T|| * xi``.  Two readings of the
random factor ``xi`` are available:

* ``"shared"`` (default): one real number drawn uniformly from ``[-1, 1]``
  and added to every interior node and both traces.
* ``"iid"``: an independent complex number per component, with real and
  imaginary parts uniform on ``[-1, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .forward import ModulatingFunction
from .grid import (ComplexField, TerminalData, composite_norm_sq, load_terminal,
                   save_terminal)
from .objective import Problem

__all__ = ["NoiseSpec", "NOISE_MODELS", "synthesize_exact", "add_noise",
           "save_measurement", "load_measurement"]

NOISE_MODELS = ("shared", "iid")


@dataclass(frozen=True)
class NoiseSpec:
    level: float = 0.0
    seed: int = 0
    model: str = "shared"

    def __post_init__(self):
        if not (np.isfinite(self.level) and self.level >= 0):
            raise ValueError(f"noise level must be >= 0, got {self.level}")
        if self.model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}; expected one of {NOISE_MODELS}")


def synthesize_exact(f_exact: ComplexField, problem: Problem,
                     g: ModulatingFunction | None = None) -> TerminalData:
    """Noise-free terminal data ``Psi f_exact``; ``g`` overrides ``problem.g``."""
    if g is not None and g is not problem.g:
        problem = Problem(problem.grid, problem.time_grid, g, None, problem.adjoint_mode)
    return problem.forward(f_exact)


def _draw(spec: NoiseSpec, size: int) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    if spec.model == "shared":
        return np.full(size, rng.uniform(-1.0, 1.0), dtype=complex)
    return rng.uniform(-1.0, 1.0, size) + 1j * rng.uniform(-1.0, 1.0, size)


def add_noise(exact: TerminalData, spec: NoiseSpec) -> TerminalData:
    if spec.level == 0:
        return TerminalData(exact.interior, exact.trace_left, exact.trace_right)
    scale = spec.level * np.sqrt(composite_norm_sq(exact))
    xi = _draw(spec, exact.grid.size + 2)
    return TerminalData.from_vector(exact.as_vector() + scale * xi, exact.grid)


def save_measurement(data: TerminalData, path, *, noise: NoiseSpec | None = None,
                     exact_source: str | None = None, **extra) -> Path:
    meta = {"noise_level": noise.level if noise else 0.0,
            "seed": noise.seed if noise else None,
            "noise_model": noise.model if noise else None,
            "exact_source": exact_source}
    meta.update(extra)
    return save_terminal(data, path, meta)


def load_measurement(path) -> tuple[TerminalData, dict]:
    return load_terminal(path)
