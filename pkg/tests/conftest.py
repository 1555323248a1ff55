import numpy as np
import pytest

from ellgsim.config import MeshSpec
from ellgsim.fem import build_matrices
from ellgsim.simulator import build_mesh


@pytest.fixture(scope="session")
def unit_cell_mesh():
    """One cube cell split into six tets, all of it magnetic."""
    spec = MeshSpec(omega_box=(0.0, 1.0, 0.0, 1.0, 0.0, 1.0), cell=(1.0, 1.0, 1.0))
    return build_mesh(spec)


@pytest.fixture(scope="session")
def cube2_mesh():
    """2 x 2 x 2 cube mesh, all magnetic."""
    spec = MeshSpec(omega_box=(0.0, 1.0, 0.0, 1.0, 0.0, 1.0), cell=(0.5, 0.5, 0.5))
    return build_mesh(spec)


@pytest.fixture(scope="session")
def cube2_matrices(cube2_mesh):
    return build_matrices(cube2_mesh)


@pytest.fixture(scope="session")
def padded_mesh():
    """Small magnetic box inside a graded conductor shell."""
    spec = MeshSpec(
        omega_box=(0.0, 0.4, 0.0, 0.4, 0.0, 0.2),
        cell=(0.2, 0.2, 0.1),
        pad_x=0.2,
        pad_y=0.2,
        pad_z_lo=0.1,
        pad_z_hi=0.1,
        layers=1,
    )
    return build_mesh(spec)


@pytest.fixture(scope="session")
def padded_matrices(padded_mesh):
    return build_matrices(padded_mesh)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
