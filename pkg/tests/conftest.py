import numpy as np
import pytest
from hypothesis import settings

from obstaclelab.geometry import Grid2, Paraboloid
from obstaclelab.potential import ParaboloidSolution, PotentialConfig
from obstaclelab.solver import SolverConfig, solve_obstacle

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def paraboloid_run():
    """Solver run on [-6,6]x[-2,10], h = 0.05, with unit-paraboloid boundary data."""
    grid = Grid2.from_spacing(-6, 6, -2, 10, 0.05)
    cfg = SolverConfig(omega=1.95, tol=1e-9)
    bnd = ParaboloidSolution(Paraboloid(1.0), PotentialConfig(abs_tol=1e-10))
    u, report = solve_obstacle(grid, bnd, cfg)
    return grid, u, report, cfg


@pytest.fixture
def rng():
    return np.random.default_rng(0)
