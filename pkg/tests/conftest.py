import numpy as np
import pytest

from uclab import create_lab


@pytest.fixture
def lab():
    """Create test lab"""
    return create_lab('testing')


@pytest.fixture
def output_dir(tmp_path):
    """Scratch report directory"""
    return tmp_path / 'out'


@pytest.fixture
def run_config(lab, output_dir):
    """Testing run configuration writing into the scratch directory"""
    return lab.load_run_config(overrides={'run': {'output_dir': str(output_dir)}})


def central_difference(f, x, h, order=1):
    """Finite-difference oracle for the first or second derivative of f at x."""
    if order == 1:
        return (f(x + h) - f(x - h)) / (2 * h)
    if order == 2:
        return (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    raise ValueError(order)


@pytest.fixture
def fd():
    """Finite-difference oracle"""
    return central_difference


@pytest.fixture
def polar_grid():
    """A few base points away from the origin"""
    r = np.array([0.7, 1.5, 3.0])
    phi = np.array([0.1, 1.2, 4.0])
    return r, phi
