import numpy as np
import pytest

from ntdball import fields, sphere


@pytest.fixture(scope="session")
def grid16():
    return sphere.build_grid(16)


@pytest.fixture(scope="session")
def spectrum16():
    return sphere.ntd_spectrum(16)


@pytest.fixture(scope="session")
def lam0():
    return (np.e**2 - 1.0) / 2.0


def make_solution_pair(grid, spectrum, seed, scale=1.0):
    """Random homogeneous-equation pair: band-limited Neumann data and
    its Neumann-to-Dirichlet trace."""
    h = fields.BoundaryField.random(grid, seed, scale=scale)
    trace = fields.BoundaryField.from_coeffs(
        grid, h.coeffs.scaled_by_degree(spectrum.lam))
    return trace, h


@pytest.fixture(scope="session")
def random_pair(grid16, spectrum16):
    return make_solution_pair(grid16, spectrum16, seed=42)
