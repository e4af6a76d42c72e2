"""Inverse source problem for the 1D Schrodinger equation with dynamic boundary conditions.

Forward and adjoint Crank-Nicolson solvers, the terminal-misfit functional
with its adjoint-state gradient, Landweber reconstruction, a dense oracle for
small grids and a command-line driver.
"""

from .adjoint import solve_adjoint, terminal_residual
from .errors import (DescentViolationError, DivergenceError, GridMismatchError,
                     InconsistencyError, ReconstructionError, SingularSystemError, SolverError)
from .estimator import LandweberSourceEstimator
from .experiments import EXAMPLES, ExperimentConfig, run_experiment, run_level, synthesize
from .forward import (ModulatingFunction, SemidiscreteOperator, SolverConfig, assemble_ode_rhs,
                      forward_terminal, solve_forward, terminal_of)
from .grid import (ComplexField, SpatialGrid, TerminalData, TimeGrid, Trajectory, composite_inner,
                   composite_norm_sq, field_axpy, l2_inner, l2_norm)
from .landweber import LandweberConfig, ReconstructionHistory, Termination, landweber_run, relative_l2_error
from .measurement import NoiseSpec, add_noise, synthesize_exact
from .objective import (ProbeReport, Problem, convexity_probe, evaluate_cost, evaluate_gradient,
                        fd_gradient_check, lipschitz_probe)
from .oracle import (DenseForwardMap, assemble_forward_map, oracle_gradient,
                     spectral_lipschitz_bound)

__version__ = "0.1.0"
