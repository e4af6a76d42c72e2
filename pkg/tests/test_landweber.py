import json

import numpy as np
import pytest

from schrodinger_isp import (ComplexField, DescentViolationError, DivergenceError,
                             InconsistencyError, LandweberConfig, ModulatingFunction, Problem,
                             SpatialGrid, TerminalData, Termination, TimeGrid, landweber_run,
                             relative_l2_error)
from schrodinger_isp.measurement import NoiseSpec, add_noise

from conftest import random_field, sin_source


def example1(p, level=0.01):
    exact = p.forward(sin_source(p.grid))
    return p.with_measured(add_noise(exact, NoiseSpec(level, 0)))


class TestConfig:
    @pytest.mark.parametrize("kw", [{"e_j": 0}, {"e_j": -1}, {"max_iter": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            LandweberConfig(**kw)


class TestRun:
    def test_warm_start_at_solution(self, ref_problem):
        f = sin_source(ref_problem.grid)
        p = ref_problem.with_measured(ref_problem.forward(f))
        hist = landweber_run(LandweberConfig(1e-6, 10, f0=f), p)
        assert hist.iterations == 0
        assert hist.termination is Termination.COST_BELOW_TOLERANCE
        assert hist.final_cost <= 1e-20
        assert np.array_equal(hist.final_iterate.values, f.values)

    def test_zero_data(self, small_problem):
        g = ModulatingFunction.constant(3.0)
        p = Problem(small_problem.grid, small_problem.time_grid, g)
        hist = landweber_run(LandweberConfig(), p)
        assert hist.iterations == 0 and hist.final_cost == 0

    def test_example1_one_percent(self, ref_problem):
        p = example1(ref_problem)
        hist = landweber_run(LandweberConfig(1e-6, 2000), p)
        assert hist.termination is Termination.COST_BELOW_TOLERANCE
        assert hist.iterations <= 10
        assert relative_l2_error(hist.final_iterate, sin_source(p.grid)) <= 0.10

    def test_history_contents(self, ref_problem):
        p = example1(ref_problem)
        hist = landweber_run(LandweberConfig(1e-6, 2000), p)
        assert hist.records[0].k == 0
        assert hist.records[0].cost == pytest.approx(p.cost(ComplexField.zeros(p.grid)))
        for rec in hist.records[:-1]:
            assert rec.step > 0 and rec.grad_norm > 0 and rec.cost >= 0
        assert hist.records[-1].step is None
        costs = hist.costs
        assert np.all(costs[1:] <= costs[:-1] * (1 + 1e-12))
        rows = json.loads(hist.to_json())
        assert set(rows[0]) == {"k", "J", "alpha", "grad_norm"}

    def test_step_is_line_minimizer(self, rng, small_problem):
        p = small_problem.with_measured(small_problem.forward(random_field(rng, small_problem.grid)))
        hist = landweber_run(LandweberConfig(1e-30, 1), p)
        rec = hist.records[0]
        grad = p.gradient(ComplexField.zeros(p.grid))
        costs = [p.cost(-(rec.step * s) * grad) for s in (0.9, 1.0, 1.1)]
        assert costs[1] <= min(costs[0], costs[2])

    def test_max_iter(self, ref_problem):
        hist = landweber_run(LandweberConfig(1e-30, 3), example1(ref_problem))
        assert hist.termination is Termination.MAX_ITER_REACHED
        assert hist.iterations == 3

    def test_stagnation(self, small_problem, monkeypatch):
        import schrodinger_isp.landweber as lw
        p = example1(small_problem)
        monkeypatch.setattr(lw, "STAGNATION_GRAD_NORM", 1e300)
        hist = landweber_run(LandweberConfig(1e-30, 5), p)
        assert hist.termination is Termination.STAGNATION

    def test_deterministic(self, ref_problem):
        a = landweber_run(LandweberConfig(1e-8, 50), example1(ref_problem, 0.03))
        b = landweber_run(LandweberConfig(1e-8, 50), example1(ref_problem, 0.03))
        assert a.to_json() == b.to_json()
        assert np.array_equal(a.final_iterate.values, b.final_iterate.values)

    def test_grid_mismatch_guess(self, small_problem):
        with pytest.raises(ValueError):
            landweber_run(LandweberConfig(f0=ComplexField.zeros(SpatialGrid(1.0, 3))),
                          small_problem)


class _Ascent(Problem):
    def gradient(self, f, computed=None):
        return -super().gradient(f, computed)


class _BoundaryOnly(Problem):
    def gradient(self, f, computed=None):
        v = np.zeros(self.grid.size)
        v[0] = 1.0
        return ComplexField(v, self.grid)


class TestErrors:
    def test_inconsistency(self, ref_problem):
        base = example1(ref_problem)
        p = _BoundaryOnly(base.grid, base.time_grid, measured=base.measured)
        with pytest.raises(InconsistencyError) as info:
            landweber_run(LandweberConfig(1e-30, 5), p)
        assert info.value.history is not None

    def test_descent_violation(self, ref_problem):
        base = example1(ref_problem)
        p = _Ascent(base.grid, base.time_grid, measured=base.measured)
        with pytest.raises(DescentViolationError) as info:
            landweber_run(LandweberConfig(1e-30, 5), p)
        hist = info.value.history
        assert hist.records[-1].cost > hist.records[-2].cost

    def test_solver_error_keeps_history(self, ref_problem, monkeypatch):
        p = example1(ref_problem)
        calls = {"n": 0}
        orig = Problem.forward

        def failing(self, f):
            calls["n"] += 1
            if calls["n"] > 4:
                raise DivergenceError("boom", step=1)
            return orig(self, f)

        monkeypatch.setattr(Problem, "forward", failing)
        with pytest.raises(DivergenceError) as info:
            landweber_run(LandweberConfig(1e-30, 50), p)
        assert len(info.value.history.records) >= 1


class TestRelativeError:
    def test_cases(self, rng):
        grid = SpatialGrid(1.0, 6)
        e = random_field(rng, grid)
        assert relative_l2_error(e, e) == 0
        assert relative_l2_error(2 * e, e) == pytest.approx(1.0)
        with pytest.raises(ZeroDivisionError):
            relative_l2_error(e, ComplexField.zeros(grid))
