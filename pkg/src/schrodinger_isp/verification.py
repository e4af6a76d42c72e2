"""Property checks aggregated by ``schrodinger-isp verify``.

Each check returns a :class:`ProbeReport`.  ``fast`` runs on ``n_x = 8``;
``full`` adds refinement studies over three levels.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .forward import ModulatingFunction, SemidiscreteOperator, assemble_ode_rhs
from .grid import (ComplexField, SpatialGrid, TerminalData, TimeGrid, composite_inner,
                   composite_norm_sq, l2_inner, l2_norm)
from .landweber import LandweberConfig, landweber_run
from .objective import (ProbeReport, Problem, convexity_probe, fd_gradient_check,
                        lipschitz_ratios)
from .oracle import assemble_forward_map, oracle_cost, oracle_gradient, spectral_lipschitz_bound
from .testing import evolve_source_free

__all__ = ["run_suite", "TIME_VARYING_G"]

TIME_VARYING_G = ModulatingFunction.from_callable(
    lambda x, t: 1.0 + 0.5 * np.sin(2 * np.pi * t) * np.cos(np.pi * x), name="1+sin(2pi t)cos(pi x)/2")


def _random_field(rng, grid):
    return ComplexField(rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size), grid)


def _sin_data(problem: Problem) -> Problem:
    f = ComplexField.from_function(lambda x: np.sin(np.pi * x), problem.grid)
    return problem.with_measured(problem.forward(f))


def adjoint_identity_residual(problem: Problem, f: ComplexField, df: ComplexField) -> float:
    """``|Re<Psi df, r> - Re<df, J'(f)>|`` scaled by ``||Psi df|| ||r||``."""
    computed = problem.forward(f)
    r = computed - problem.measured
    d_psi = problem.forward(df)
    lhs = composite_inner(d_psi, r).real
    rhs = l2_inner(df, problem.gradient(f, computed)).real
    scale = np.sqrt(composite_norm_sq(d_psi) * composite_norm_sq(r))
    return abs(lhs - rhs) / scale


def _identity_check(rng, levels, n_samples=10):
    worst = []
    for n_x, n_t in levels:
        p = _sin_data(Problem(SpatialGrid(1.0, n_x), TimeGrid(1.0, n_t), TIME_VARYING_G))
        worst.append(max(adjoint_identity_residual(p, _random_field(rng, p.grid),
                                                   _random_field(rng, p.grid))
                         for _ in range(n_samples)))
    return worst


def check_oracle_fd(rng) -> ProbeReport:
    grid, tg = SpatialGrid(1.0, 8), TimeGrid(1.0, 16)
    p = _sin_data(Problem(grid, tg))
    fmap = assemble_forward_map(p.g, grid, tg)
    worst = 0.0
    eps = 1e-4
    for _ in range(10):
        f, d = _random_field(rng, grid), _random_field(rng, grid)
        fd = (oracle_cost(f + eps * d, p.measured, fmap)
              - oracle_cost(f - eps * d, p.measured, fmap)) / (2 * eps)
        dd = l2_inner(d, oracle_gradient(f, p.measured, fmap)).real
        worst = max(worst, abs(fd - dd) / max(abs(fd), 1e-300))
    return ProbeReport("oracle_central_difference", worst, 1e-9, worst <= 1e-9)


def check_adjoint_fd(rng, n_x=8, n_t=16, n_samples=10) -> ProbeReport:
    p = _sin_data(Problem(SpatialGrid(1.0, n_x), TimeGrid(1.0, n_t)))
    worst = max(fd_gradient_check(_random_field(rng, p.grid), _random_field(rng, p.grid), 1e-4, p)
                for _ in range(n_samples))
    return ProbeReport(f"adjoint_fd_gradient_nx{n_x}", worst, 1e-2, worst <= 1e-2)


def check_adjoint_identity(rng) -> ProbeReport:
    (worst,) = _identity_check(rng, [(8, 16)])
    return ProbeReport("adjoint_identity_nx8", worst, 1e-2, worst <= 1e-2)


def check_identity_refinement(rng) -> ProbeReport:
    worst = _identity_check(rng, [(8, 16), (16, 32), (32, 64)])
    ok = worst[0] <= 1e-2 and worst[0] > worst[1] > worst[2]
    return ProbeReport("adjoint_identity_refinement", worst[-1], 1e-2, ok)


def check_oracle_gap_refinement(rng) -> ProbeReport:
    gaps = []
    for n_x in (8, 16, 32):
        p = _sin_data(Problem(SpatialGrid(1.0, n_x), TimeGrid(1.0, 2 * n_x), TIME_VARYING_G))
        fmap = assemble_forward_map(p.g, p.grid, p.time_grid)
        f = _random_field(rng, p.grid)
        exact = oracle_gradient(f, p.measured, fmap)
        gaps.append(l2_norm(exact - p.gradient(f)) / l2_norm(exact))
    ok = gaps[0] <= 1e-1 and gaps[0] > gaps[1] > gaps[2]
    return ProbeReport("oracle_gradient_gap_refinement", gaps[0], 1e-1, ok)


def check_lipschitz(rng, n_dirs=10, per_dir=10) -> list[ProbeReport]:
    grid, tg = SpatialGrid(1.0, 8), TimeGrid(1.0, 16)
    p = _sin_data(Problem(grid, tg))
    bound = spectral_lipschitz_bound(assemble_forward_map(p.g, grid, tg))
    spreads, ratios = [], []
    for _ in range(n_dirs):
        d = _random_field(rng, grid)
        samples = [(_random_field(rng, grid), float(rng.uniform(0.1, 10.0)) * d)
                   for _ in range(per_dir)]
        r = lipschitz_ratios(samples, p)
        ratios.extend(r)
        spreads.append((r.max() - r.min()) / r.max())
    return [
        ProbeReport("lipschitz_below_spectral_bound", max(ratios) / bound, 1.0,
                    max(ratios) <= bound * (1 + 1e-12)),
        ProbeReport("lipschitz_ratio_spread", max(spreads), 1e-6, max(spreads) <= 1e-6),
    ]


def check_convexity(rng, n=20) -> ProbeReport:
    p = _sin_data(Problem(SpatialGrid(1.0, 8), TimeGrid(1.0, 16)))
    worst = np.inf
    for _ in range(n):
        f1, f2 = _random_field(rng, p.grid), _random_field(rng, p.grid)
        gap = convexity_probe(f1, f2, p)
        worst = min(worst, gap / max(p.cost(f1), p.cost(f2)))
    return ProbeReport("convexity_gap", worst, -1e-10, worst >= -1e-10)


def conservation_defect(n_x: int, n_t: int = 200) -> float:
    grid, tg = SpatialGrid(1.0, n_x), TimeGrid(1.0, n_t)
    x = grid.nodes
    y0 = 0.3 + np.cos(np.pi * x) + 0.5j * np.sin(2 * np.pi * x)
    states = evolve_source_free(ComplexField(y0, grid), SemidiscreteOperator(grid), tg).values
    norms = np.sqrt([composite_norm_sq(TerminalData.from_state(ComplexField(y, grid)))
                     for y in states])
    return float(np.max(np.abs(norms - norms[0])) / norms[0])


def check_conservation(levels) -> ProbeReport:
    defects = [conservation_defect(n) for n in levels]
    within = all(d <= 5.0 / n for d, n in zip(defects, levels))
    decreasing = all(a > b for a, b in zip(defects, defects[1:]))
    return ProbeReport(f"conservation_nx{'-'.join(map(str, levels))}", defects[-1],
                       5.0 / levels[-1], within and decreasing)


def _reference_terminal(problem: Problem, f: ComplexField) -> np.ndarray:
    """Terminal state of the semidiscrete ODE from an adaptive high-order integrator."""
    op = problem.op
    g = problem.g

    def rhs(t, y):
        g_t = g.table(problem.grid, TimeGrid(max(t, 1e-300), 1))[-1]
        return assemble_ode_rhs(ComplexField(y, problem.grid), f, g_t, op).values

    sol = solve_ivp(rhs, (0.0, problem.time_grid.t_final), np.zeros(problem.grid.size, complex),
                    method="DOP853", rtol=1e-10, atol=1e-12)
    return sol.y[:, -1]


def check_time_order() -> ProbeReport:
    grid = SpatialGrid(1.0, 25)
    f = ComplexField.from_function(lambda x: np.sin(np.pi * x), grid)
    ref = None
    errs = []
    for n_t in (25, 50, 100):
        p = Problem(grid, TimeGrid(1.0, n_t), TIME_VARYING_G)
        if ref is None:
            ref = TerminalData.from_state(ComplexField(_reference_terminal(p, f), grid))
        errs.append(np.sqrt(composite_norm_sq(p.forward(f) - ref)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    return ProbeReport("crank_nicolson_order", min(ratios), 3.5, ok)


def check_noise_free_example1() -> ProbeReport:
    grid, tg = SpatialGrid(1.0, 25), TimeGrid(1.0, 200)
    p = Problem(grid, tg)
    f = ComplexField.from_function(lambda x: np.sin(np.pi * x), grid)
    p = p.with_measured(p.forward(f))
    hist = landweber_run(LandweberConfig(1e-6, 50), p)
    costs = hist.costs
    monotone = bool(np.all(costs[1:] <= costs[:-1] * (1 + 1e-12)))
    return ProbeReport("example1_noise_free_iterations", hist.iterations, 2,
                       hist.iterations <= 2 and monotone)


def run_suite(level: str = "fast", seed: int = 0) -> list[ProbeReport]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    rng = np.random.default_rng(seed)
    reports = [
        check_oracle_fd(rng),
        check_adjoint_fd(rng),
        check_adjoint_identity(rng),
        *check_lipschitz(rng),
        check_convexity(rng),
        check_conservation([8, 16, 32]),
    ]
    if level == "full":
        reports += [
            check_adjoint_fd(rng, 25, 200, n_samples=5),
            check_identity_refinement(rng),
            check_oracle_gap_refinement(rng),
            check_conservation([25, 50, 100]),
            check_time_order(),
            check_noise_free_example1(),
        ]
    return reports
