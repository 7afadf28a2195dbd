import numpy as np
import pytest

from cglvortex import GridFunction, enforce_solvability, make_grid, project_mean


def random_trig(grid, rng, kmax=6):
    """Random complex trigonometric polynomial on the grid."""
    x = grid.nodes
    vals = np.zeros(len(x), dtype=complex)
    for k in range(1, kmax + 1):
        a = rng.standard_normal() + 1j * rng.standard_normal()
        b = rng.standard_normal() + 1j * rng.standard_normal()
        vals += a * np.cos(k * x) + b * np.sin(k * x)
    return GridFunction(grid, vals)


def random_admissible(grid, rng, kmax=6):
    """Random trig polynomial orthogonal to the cosine mode."""
    return enforce_solvability(random_trig(grid, rng, kmax))


def random_mean_free_ball(grid, rng, sigma, kmax=5):
    """Random mean-free correction with sup norm at most sigma."""
    f = random_trig(grid, rng, kmax)
    vals = f.values - complex(project_mean(f))
    w = GridFunction(grid, vals)
    scale = sigma * rng.uniform(0.2, 1.0) / max(w.sup_norm, 1e-300)
    return GridFunction(grid, vals * scale)


@pytest.fixture
def grid257():
    return make_grid(257)


@pytest.fixture
def grid513():
    return make_grid(513)
