"""Experiment configurations and the end-to-end reconstruction driver."""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ReconstructionError, SolverError
from .forward import ModulatingFunction
from .grid import (ComplexField, SpatialGrid, TerminalData, TimeGrid, load_field_csv)
from .landweber import LandweberConfig, Termination, landweber_run, relative_l2_error
from .measurement import NoiseSpec, add_noise, load_measurement, save_measurement, synthesize_exact
from .objective import Problem

__all__ = ["ExperimentConfig", "EXAMPLES", "BUILTIN_SOURCES", "RunResult",
           "resolve_source", "resolve_g", "run_level", "run_experiment", "synthesize",
           "level_tag"]

BUILTIN_SOURCES = {
    "sin_pi_x": lambda x: np.sin(np.pi * x),
    "i_x_one_minus_x": lambda x: 1j * x * (1 - x),
    "exp_i_pi_x": lambda x: np.exp(1j * np.pi * x),
}

EXAMPLES = {
    "example1": {"f_exact": "sin_pi_x", "e_j": 1e-6, "error_bound": 0.15},
    "example2": {"f_exact": "i_x_one_minus_x", "e_j": 1e-8, "error_bound": 0.15},
    "example3": {"f_exact": "exp_i_pi_x", "e_j": 1e-8, "error_bound": 0.20},
}


@dataclass
class ExperimentConfig:
    example: str = "example1"
    ell: float = 1.0
    t_final: float = 1.0
    n_x: int = 25
    n_t: int = 200
    g: str = "one"
    f_exact: str = "sin_pi_x"
    noise_levels: list = field(default_factory=lambda: [0.01, 0.03, 0.05])
    seed: int = 0
    e_j: float = 1e-6
    max_iter: int = 2000
    output_dir: str = "out"
    noise_model: str = "shared"
    adjoint_mode: str = "consistent"
    error_bound: float | None = None

    @classmethod
    def for_example(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in EXAMPLES and name != "custom":
            raise ValueError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)} or custom")
        params = dict(EXAMPLES.get(name, {}))
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(example=name, **params)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        name = data.get("example", "custom")
        rest = {k: v for k, v in data.items() if k != "example"}
        return cls.for_example(name, **rest)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid(self.ell, self.n_x)

    @property
    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.t_final, self.n_t)

    def problem(self) -> Problem:
        return Problem(self.grid, self.time_grid, resolve_g(self.g, self.grid, self.time_grid),
                       adjoint_mode=self.adjoint_mode)


def resolve_source(name: str, grid: SpatialGrid) -> ComplexField:
    """Builtin analytic source sampled on ``grid``, or a tabulated CSV file."""
    if name in BUILTIN_SOURCES:
        return ComplexField.from_function(BUILTIN_SOURCES[name], grid)
    fld = load_field_csv(name)
    if fld.grid != grid:
        raise ValueError(f"tabulated source {name} is on {fld.grid}, expected {grid}")
    return fld


def resolve_g(name: str, grid: SpatialGrid, time_grid: TimeGrid) -> ModulatingFunction:
    """``"one"`` or a long-format CSV with columns ``t, x, g``."""
    if name == "one":
        return ModulatingFunction.constant(1.0)
    data = np.loadtxt(name, delimiter=",", skiprows=1, ndmin=2)
    shape = (time_grid.n_t + 1, grid.size)
    if data.shape != (shape[0] * shape[1], 3):
        raise ValueError(f"tabulated g {name} does not match grid {shape}")
    return ModulatingFunction.from_table(data[:, 2].reshape(shape), name=str(name))


def level_tag(level: float) -> str:
    return f"p{level:g}"


@dataclass
class RunResult:
    noise_level: float
    iterations: int
    final_cost: float
    relative_l2_error: float
    relative_l2_error_re: float | None
    relative_l2_error_im: float | None
    termination: str
    runtime_s: float
    costs: list
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.termination == Termination.COST_BELOW_TOLERANCE.value

    def summary(self, config: ExperimentConfig) -> dict:
        out = {k: v for k, v in dataclasses.asdict(self).items() if k != "costs"}
        out["config"] = config.to_dict()
        return out


def _part_error(recovered: np.ndarray, exact: np.ndarray, grid: SpatialGrid):
    if not np.any(exact):
        return None
    return relative_l2_error(ComplexField(recovered, grid), ComplexField(exact, grid))


def _measurement(config: ExperimentConfig, level: float, problem: Problem,
                 f_exact: ComplexField, measured_dir=None) -> TerminalData:
    if measured_dir is not None:
        data, _ = load_measurement(Path(measured_dir) / f"noisy_{level_tag(level)}.csv")
        return data
    exact = synthesize_exact(f_exact, problem)
    return add_noise(exact, NoiseSpec(level, config.seed, config.noise_model))


def run_level(config: ExperimentConfig, level: float, measured_dir=None, write=True) -> RunResult:
    """Reconstruct the source for one noise level and write its artifacts."""
    problem = config.problem()
    grid = problem.grid
    f_exact = resolve_source(config.f_exact, grid)
    measured = _measurement(config, level, problem, f_exact, measured_dir)
    start = time.perf_counter()
    err_msg = None
    try:
        hist = landweber_run(LandweberConfig(config.e_j, config.max_iter),
                             problem.with_measured(measured))
        termination = hist.termination.value
    except (ReconstructionError, SolverError) as exc:
        hist = exc.history
        termination = "error"
        err_msg = str(exc)
    runtime = time.perf_counter() - start
    rec = hist.final_iterate
    result = RunResult(
        noise_level=level,
        iterations=hist.iterations,
        final_cost=hist.final_cost,
        relative_l2_error=relative_l2_error(rec, f_exact),
        relative_l2_error_re=_part_error(rec.real, f_exact.real, grid),
        relative_l2_error_im=_part_error(rec.imag, f_exact.imag, grid),
        termination=termination,
        runtime_s=runtime,
        costs=[float(c) for c in hist.costs],
        error=err_msg,
    )
    if write:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        tag = level_tag(level)
        table = np.column_stack([grid.nodes, f_exact.real, f_exact.imag, rec.real, rec.imag])
        np.savetxt(out / f"{tag}_recovered.csv", table, delimiter=",", comments="",
                   header="x,re_exact,im_exact,re_recovered,im_recovered", fmt="%.17g")
        hist.save(out / f"{tag}_history.json")
        (out / f"{tag}_summary.json").write_text(json.dumps(result.summary(config), indent=2))
    return result


def run_experiment(config: ExperimentConfig, measured_dir=None, jobs: int = 1,
                   write=True) -> list[RunResult]:
    levels = list(config.noise_levels)
    if jobs > 1 and len(levels) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(levels))) as pool:
            futures = [pool.submit(run_level, config, lv, measured_dir, write) for lv in levels]
            return [fut.result() for fut in futures]
    return [run_level(config, lv, measured_dir, write) for lv in levels]


def synthesize(config: ExperimentConfig) -> list[Path]:
    """Write ``exact.csv`` and one ``noisy_p*.csv`` per noise level."""
    problem = config.problem()
    f_exact = resolve_source(config.f_exact, problem.grid)
    exact = synthesize_exact(f_exact, problem)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [save_measurement(exact, out / "exact.csv", exact_source=config.f_exact)]
    for level in config.noise_levels:
        spec = NoiseSpec(level, config.seed, config.noise_model)
        paths.append(save_measurement(add_noise(exact, spec), out / f"noisy_{level_tag(level)}.csv",
                                      noise=spec, exact_source=config.f_exact))
    return paths
