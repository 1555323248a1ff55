import numpy as np
import pytest

from ellgsim.config import MeshSpec
from ellgsim.errors import InvariantViolation
from ellgsim.fem import build_matrices, quadratic_form
from ellgsim.fields import (
    CompositeContribution,
    UniaxialAnisotropy,
    UniformField,
    ZeroContribution,
    applied_field,
    build_initial_data,
    check_contribution_bound,
    uniaxial_anisotropy,
)
from ellgsim.simulator import build_mesh


def test_uniaxial_anisotropy_values(rng):
    m = rng.standard_normal((10, 3))
    axis = np.array([0.0, 0.0, 1.0])
    out = uniaxial_anisotropy(m, 2.5, axis)
    for z in range(10):
        expected = 2.5 * m[z].dot(axis) * axis
        assert np.allclose(out[z], expected, atol=1e-14)


def test_applied_field_tile():
    out = applied_field(np.array([1.0, 2.0, 3.0]), 4)
    assert out.shape == (4, 3)
    assert np.all(out == np.array([1.0, 2.0, 3.0]))


def test_uniform_field_bound_is_sharp(padded_matrices, rng):
    contrib = UniformField([0.0, 0.0, 2.0], padded_matrices.omega_volume)
    worst = check_contribution_bound(contrib, padded_matrices.mass, rng)
    assert worst == pytest.approx(1.0, abs=1e-10)


def test_anisotropy_bound_holds(padded_matrices, rng):
    contrib = UniaxialAnisotropy(3.0, [1.0, 1.0, 0.0], padded_matrices.omega_volume)
    worst = check_contribution_bound(contrib, padded_matrices.mass, rng)
    assert worst <= 1.0 + 1e-12


def test_composite_bound_holds(padded_matrices, rng):
    contrib = CompositeContribution(
        [
            UniaxialAnisotropy(1.5, [0.0, 0.0, 1.0], padded_matrices.omega_volume),
            UniformField([0.5, 0.0, 0.0], padded_matrices.omega_volume),
        ]
    )
    worst = check_contribution_bound(contrib, padded_matrices.mass, rng)
    assert worst <= 1.0 + 1e-12


def test_zero_contribution(padded_matrices, rng):
    worst = check_contribution_bound(ZeroContribution(), padded_matrices.mass, rng)
    assert worst == 0.0


def test_initial_data_rejects_non_unit_m0(padded_mesh, padded_matrices):
    with pytest.raises(InvariantViolation):
        build_initial_data(np.array([1.0, 1.0, 0.0]), np.zeros(3), padded_mesh, padded_matrices)


def test_initial_field_exact_inside_magnet(padded_mesh, padded_matrices):
    """Every magnet tet has all its edges in the closed magnetic box, so the
    subtracted interpolant reproduces H0* - m0 there exactly."""
    from ellgsim.fem import evaluate_edge_field

    mesh = padded_mesh
    init = build_initial_data(
        np.array([1.0, 0.0, 0.0]), np.array([0.25, -0.5, 1.0]), mesh, padded_matrices
    )
    lam = np.array([[0.25, 0.25, 0.25, 0.25], [0.7, 0.1, 0.1, 0.1]])
    vals = evaluate_edge_field(mesh, init.h0, lam)
    expected = np.array([0.25, -0.5, 1.0]) - np.array([1.0, 0.0, 0.0])
    inside = vals[mesh.omega_tets]
    assert np.abs(inside - expected).max() <= 1e-13


def test_initial_field_norm_identity(padded_mesh, padded_matrices):
    """With H0* = 0 the interface band is the only mismatch region, giving
    ||H0||^2 = |omega| + mismatch^2 exactly."""
    mats = padded_matrices
    init = build_initial_data(np.array([1.0, 0.0, 0.0]), np.zeros(3), padded_mesh, mats)
    norm_sq = quadratic_form(mats.edge_mass, init.h0)
    assert norm_sq == pytest.approx(mats.omega_volume + init.mismatch_l2**2, rel=1e-10)


def test_initial_mismatch_shrinks_under_refinement():
    vals = []
    for cell in ((0.2, 0.2, 0.1), (0.1, 0.1, 0.05)):
        spec = MeshSpec(
            omega_box=(0.0, 0.4, 0.0, 0.4, 0.0, 0.2),
            cell=cell,
            pad_x=0.2,
            pad_y=0.2,
            pad_z_lo=0.1,
            pad_z_hi=0.1,
            layers=1,
        )
        mesh = build_mesh(spec)
        mats = build_matrices(mesh)
        init = build_initial_data(np.array([1.0, 0.0, 0.0]), np.zeros(3), mesh, mats)
        vals.append(init.mismatch_l2)
    assert vals[1] < vals[0]


def test_matched_initial_data_gives_zero_field(cube2_mesh):
    """When the source equals the magnetization on a fully magnetic box the
    initial field coefficients cancel to exact zeros."""
    mats = build_matrices(cube2_mesh)
    m0 = np.array([0.0, 0.0, 1.0])
    init = build_initial_data(m0, m0, cube2_mesh, mats)
    assert np.all(init.h0 == 0.0)
    assert init.mismatch_l2 <= 1e-13


def test_initial_data_callable_m0(padded_mesh, padded_matrices):
    def m0(x):
        out = np.zeros_like(x)
        out[:, 0] = np.cos(x[:, 1])
        out[:, 2] = np.sin(x[:, 1])
        return out

    init = build_initial_data(m0, np.zeros(3), padded_mesh, padded_matrices)
    norms = np.linalg.norm(init.m0, axis=1)
    assert np.abs(norms - 1.0).max() <= 1e-12
