import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from schrodinger_isp import ComplexField, Problem, SpatialGrid, TerminalData, TimeGrid

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)


def random_field(rng, grid):
    return ComplexField(rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size), grid)


def random_terminal(rng, grid):
    v = rng.standard_normal(grid.size + 2) + 1j * rng.standard_normal(grid.size + 2)
    return TerminalData.from_vector(v, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_problem():
    return Problem(SpatialGrid(1.0, 8), TimeGrid(1.0, 16))


@pytest.fixture
def ref_problem():
    return Problem(SpatialGrid(1.0, 25), TimeGrid(1.0, 200))


def sin_source(grid):
    return ComplexField.from_function(lambda x: np.sin(np.pi * x), grid)
