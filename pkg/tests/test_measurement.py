import json

import numpy as np
import pytest

from schrodinger_isp import (ComplexField, NoiseSpec, SpatialGrid, TerminalData,
                             composite_norm_sq, add_noise, synthesize_exact)
from schrodinger_isp.measurement import load_measurement, save_measurement
from schrodinger_isp.forward import ModulatingFunction

from conftest import sin_source


@pytest.fixture(scope="module")
def exact():
    from schrodinger_isp import Problem, TimeGrid
    p = Problem(SpatialGrid(1.0, 25), TimeGrid(1.0, 200))
    return synthesize_exact(sin_source(p.grid), p)


class TestSynthesize:
    def test_zero_source(self, ref_problem):
        d = synthesize_exact(ComplexField.zeros(ref_problem.grid), ref_problem)
        assert composite_norm_sq(d) == 0

    def test_matches_forward(self, ref_problem):
        f = ComplexField.from_function(lambda x: 1j * x * (1 - x), ref_problem.grid)
        assert np.array_equal(synthesize_exact(f, ref_problem).as_vector(),
                              ref_problem.forward(f).as_vector())

    def test_g_override(self, ref_problem):
        f = sin_source(ref_problem.grid)
        a = synthesize_exact(f, ref_problem, ModulatingFunction.constant(2.0))
        b = synthesize_exact(f, ref_problem)
        assert np.allclose(a.as_vector(), 2 * b.as_vector(), rtol=1e-13)


class TestNoise:
    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            NoiseSpec(-0.1)
        with pytest.raises(ValueError):
            NoiseSpec(0.1, model="gauss")

    @pytest.mark.parametrize("model", ["shared", "iid"])
    def test_zero_level_identity(self, exact, model):
        out = add_noise(exact, NoiseSpec(0.0, 5, model))
        assert np.array_equal(out.as_vector(), exact.as_vector())

    @pytest.mark.parametrize("model", ["shared", "iid"])
    def test_deterministic_and_seed_dependent(self, exact, model):
        a = add_noise(exact, NoiseSpec(0.03, 7, model)).as_vector()
        b = add_noise(exact, NoiseSpec(0.03, 7, model)).as_vector()
        c = add_noise(exact, NoiseSpec(0.03, 8, model)).as_vector()
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    @pytest.mark.parametrize("model,per_component", [("iid", np.sqrt(2)), ("shared", 1.0)])
    def test_bound_over_1000_seeds(self, exact, model, per_component):
        p = 0.01
        norm = np.sqrt(composite_norm_sq(exact))
        bound = p * norm * per_component * np.sqrt(exact.grid.ell + 2)
        worst = max(np.sqrt(composite_norm_sq(add_noise(exact, NoiseSpec(p, s, model)) - exact))
                    for s in range(1000))
        assert worst <= bound
        assert bound <= p * norm * np.sqrt(2 * (exact.grid.ell + 2))

    @pytest.mark.parametrize("model", ["shared", "iid"])
    def test_zero_mean_over_1e4_seeds(self, exact, model):
        p = 0.01
        acc = np.zeros(exact.grid.size + 2, dtype=complex)
        n = 10_000
        for s in range(n):
            acc += add_noise(exact, NoiseSpec(p, s, model)).as_vector() - exact.as_vector()
        mean = TerminalData.from_vector(acc / n, exact.grid)
        assert np.sqrt(composite_norm_sq(mean)) <= 0.05 * p * np.sqrt(composite_norm_sq(exact))

    def test_shared_model_is_one_real_number(self, exact):
        diff = add_noise(exact, NoiseSpec(0.02, 3, "shared")).as_vector() - exact.as_vector()
        assert np.allclose(diff, diff[0].real, rtol=1e-12)

    def test_iid_traces_independent_of_endpoints(self, exact):
        noisy = add_noise(exact, NoiseSpec(0.02, 3, "iid"))
        assert noisy.trace_left != noisy.interior.values[0]


class TestFiles:
    def test_roundtrip_with_provenance(self, exact, tmp_path):
        spec = NoiseSpec(0.05, 11)
        noisy = add_noise(exact, spec)
        path = save_measurement(noisy, tmp_path / "u.csv", noise=spec, exact_source="sin_pi_x")
        data, meta = load_measurement(path)
        assert np.array_equal(data.as_vector(), noisy.as_vector())
        assert meta == {"noise_level": 0.05, "seed": 11, "noise_model": "shared",
                        "exact_source": "sin_pi_x"}
        assert "trace_left" in json.loads((tmp_path / "u.json").read_text())
