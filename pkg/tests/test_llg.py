import numpy as np
import pytest

from ellgsim.config import MeshSpec
from ellgsim.errors import ConfigError, InvariantViolation
from ellgsim.fem import build_matrices, quadratic_form
from ellgsim.llg import (
    LlgParams,
    assemble_llg_system,
    expand_vector,
    normalize_update,
    reduce_vector,
    solve_v,
    tangent_frame,
)
from ellgsim.simulator import build_mesh


def unit_vectors(rng, n):
    m = rng.standard_normal((n, 3))
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def test_params_validation():
    LlgParams(alpha=0.5, c_exch=1.0, theta=1.0, k=0.1)
    with pytest.raises(ConfigError):
        LlgParams(alpha=0.0, c_exch=1.0, theta=1.0, k=0.1)
    with pytest.raises(ConfigError):
        LlgParams(alpha=0.5, c_exch=-1.0, theta=1.0, k=0.1)
    with pytest.raises(ConfigError):
        LlgParams(alpha=0.5, c_exch=1.0, theta=1.5, k=0.1)
    with pytest.raises(ConfigError):
        LlgParams(alpha=0.5, c_exch=1.0, theta=0.5, k=0.0)


def test_tangent_frame_orthonormal(rng):
    m = unit_vectors(rng, 200)
    frame = tangent_frame(m)
    assert np.abs((frame.t1 * m).sum(axis=1)).max() <= 1e-13
    assert np.abs((frame.t2 * m).sum(axis=1)).max() <= 1e-13
    assert np.abs((frame.t1 * frame.t2).sum(axis=1)).max() <= 1e-13
    assert np.abs(np.linalg.norm(frame.t1, axis=1) - 1).max() <= 1e-13
    assert np.abs(np.linalg.norm(frame.t2, axis=1) - 1).max() <= 1e-13


def test_tangent_frame_axis_aligned_is_exact():
    m = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    frame = tangent_frame(m)
    assert np.array_equal(frame.t1[0], np.array([0.0, 1.0, 0.0]))
    assert np.array_equal(frame.t2[0], np.array([0.0, 0.0, 1.0]))
    assert np.array_equal(frame.t1[1], np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(frame.t2[1], np.array([0.0, 1.0, 0.0]))


def test_tangent_frame_rejects_non_unit(rng):
    m = rng.standard_normal((5, 3)) * 3.0
    with pytest.raises(InvariantViolation):
        tangent_frame(m)


def test_reduce_expand_round_trip(rng):
    m = unit_vectors(rng, 50)
    frame = tangent_frame(m)
    v = rng.standard_normal((50, 3))
    v -= (v * m).sum(axis=1, keepdims=True) * m  # project to tangent planes
    red = reduce_vector(frame, v)
    back = expand_vector(frame, red)
    assert np.allclose(back, v, atol=1e-13)


def test_uniform_precession_solution(cube2_mesh):
    """Uniform m = x, applied field z, damping 1/2, no exchange: the update
    solves alpha v + m x v = H_tan nodewise, giving v = (0, 0.8, 0.4)."""
    mats = build_matrices(cube2_mesh)
    n = cube2_mesh.omega_node_count
    m = np.tile([1.0, 0.0, 0.0], (n, 1))
    contribution = np.tile([0.0, 0.0, 1.0], (n, 1))
    params = LlgParams(alpha=0.5, c_exch=0.0, theta=1.0, k=0.01)
    system = assemble_llg_system(m, np.zeros(2 * cube2_mesh.edge_count), contribution, params, mats)
    v, rep = solve_v(system, tol=1e-12)
    assert rep.converged
    assert np.abs(v - np.array([0.0, 0.8, 0.4])).max() <= 1e-9


def test_solve_matches_dense_reduction(unit_cell_mesh, rng):
    """Full cross-check of system assembly, reduction, and solve against a
    dense path built from the component matrices."""
    mesh = unit_cell_mesh
    mats = build_matrices(mesh)
    n = mesh.omega_node_count
    m = unit_vectors(rng, n)
    h = rng.standard_normal(2 * mesh.edge_count)
    contribution = rng.standard_normal((n, 3))
    params = LlgParams(alpha=0.7, c_exch=2.0, theta=0.8, k=0.05)

    system = assemble_llg_system(m, h, contribution, params, mats)
    v, rep = solve_v(system, tol=1e-12)

    mass = mats.mass.toarray()
    stiff = mats.stiffness.toarray()
    cross = mats.cross_term(m).toarray()
    coup_t = mats.coupling_t.toarray()
    eye3 = np.eye(3)
    a_full = (
        np.kron(params.alpha * mass + params.c_exch * params.theta * params.k * stiff, eye3)
        + cross
    )
    rhs_full = (
        -params.c_exch * np.kron(stiff, eye3) @ m.ravel()
        + coup_t @ h
        + np.kron(mass, eye3) @ contribution.ravel()
    )
    frame = tangent_frame(m)
    f = np.zeros((3 * n, 2 * n))
    for a in range(n):
        f[3 * a : 3 * a + 3, 2 * a] = frame.t1[a]
        f[3 * a : 3 * a + 3, 2 * a + 1] = frame.t2[a]
    y = np.linalg.solve(f.T @ a_full @ f, f.T @ rhs_full)
    v_ref = (f @ y).reshape(n, 3)
    assert np.allclose(v, v_ref, atol=1e-9)


def test_aligned_easy_axis_is_exactly_stationary(cube2_mesh):
    """m parallel to an axis-aligned easy axis with zero field: the reduced
    right-hand side cancels bitwise and the update is exactly zero."""
    mats = build_matrices(cube2_mesh)
    n = cube2_mesh.omega_node_count
    p = np.array([0.0, 0.0, 1.0])
    m = np.tile(p, (n, 1))
    contribution = np.tile(2.0 * p, (n, 1))  # anisotropy field ca <m,p> p
    params = LlgParams(alpha=0.5, c_exch=30.0, theta=1.0, k=0.01)
    system = assemble_llg_system(m, np.zeros(2 * cube2_mesh.edge_count), contribution, params, mats)
    assert np.all(system.rhs == 0.0)
    v, rep = solve_v(system)
    assert rep.iterations == 0
    assert np.all(v == 0.0)
    m_next = normalize_update(m, v, params.k)
    assert np.array_equal(m_next, m)


def test_normalize_update_properties(rng):
    m = unit_vectors(rng, 80)
    v = rng.standard_normal((80, 3)) * 5.0
    v -= (v * m).sum(axis=1, keepdims=True) * m
    k = 0.02
    m_next = normalize_update(m, v, k)
    assert np.abs(np.linalg.norm(m_next, axis=1) - 1.0).max() <= 1e-14
    # the denominator identity |m + k v|^2 = 1 + k^2 |v|^2
    w = m + k * v
    d = (w * w).sum(axis=1)
    expected = 1.0 + k * k * (v * v).sum(axis=1)
    assert np.abs(d - expected).max() <= 1e-12 * expected.max()


def test_normalize_update_rejects_non_tangent(rng):
    m = unit_vectors(rng, 10)
    v = m * 2.0  # fully radial
    with pytest.raises(InvariantViolation):
        normalize_update(m, v, 0.1)


def test_pure_exchange_energy_decays(cube2_mesh, rng):
    """Damped exchange flow with theta = 1: the Dirichlet energy of m must
    fall monotonically when no field terms drive the dynamics."""
    mats = build_matrices(cube2_mesh)
    n = cube2_mesh.omega_node_count
    coords = cube2_mesh.nodes[cube2_mesh.omega_nodes]
    raw = np.stack(
        [
            1.0 + 0.0 * coords[:, 0],
            0.8 * np.sin(2.0 * coords[:, 0]) + 0.1 * coords[:, 1],
            0.7 * np.cos(2.0 * coords[:, 2]),
        ],
        axis=-1,
    )
    m = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    params = LlgParams(alpha=1.0, c_exch=1.0, theta=1.0, k=0.02)
    h = np.zeros(2 * cube2_mesh.edge_count)
    zero_contrib = np.zeros((n, 3))

    def exch_energy(field):
        return sum(quadratic_form(mats.stiffness, field[:, c]) for c in range(3))

    energies = [exch_energy(m)]
    for _ in range(30):
        system = assemble_llg_system(m, h, zero_contrib, params, mats)
        v, _ = solve_v(system, tol=1e-12)
        m = normalize_update(m, v, params.k)
        energies.append(exch_energy(m))
    energies = np.array(energies)
    assert np.all(np.diff(energies) <= 1e-12 * energies[0])
    assert energies[-1] < 0.9 * energies[0]
