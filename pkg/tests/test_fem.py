import numpy as np
import pytest

import oracles
from ellgsim.errors import InvariantViolation
from ellgsim.fem import (
    _edge_basis_at,
    _edge_dof_ids,
    assemble_cross_term,
    assemble_curl_curl,
    assemble_edge_mass,
    assemble_node_edge_coupling,
    assemble_nodal_mass,
    assemble_nodal_stiffness,
    build_matrices,
    discrete_gradient,
    evaluate_edge_field,
    interpolate_edge,
    interpolate_nodal,
    quadratic_form,
    tet_geometry,
)
from ellgsim.config import MeshSpec
from ellgsim.simulator import build_mesh


def test_nodal_mass_matches_reference(padded_mesh):
    m = assemble_nodal_mass(padded_mesh).toarray()
    ref = oracles.dense_nodal_mass(
        padded_mesh.nodes, padded_mesh.tets[padded_mesh.omega_tets], padded_mesh.omega_nodes
    )
    assert np.allclose(m, ref, atol=1e-14)


def test_nodal_stiffness_matches_reference(padded_mesh):
    k = assemble_nodal_stiffness(padded_mesh).toarray()
    ref = oracles.dense_nodal_stiffness(
        padded_mesh.nodes, padded_mesh.tets[padded_mesh.omega_tets], padded_mesh.omega_nodes
    )
    assert np.allclose(k, ref, atol=1e-12)


def test_edge_basis_moments_are_dual(padded_mesh):
    """Line moments of the closed-form basis must form the identity."""
    mesh = padded_mesh
    geom = tet_geometry(mesh)
    s, w = np.polynomial.legendre.leggauss(5)
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    for t in (0, 7, len(mesh.tets) // 2, len(mesh.tets) - 1):
        moments = np.zeros((12, 12))
        for l in range(6):
            eid = mesh.tet_edges[t, l]
            lo, hi = mesh.edges[eid]
            a_lo = int(np.where(mesh.tets[t] == lo)[0][0])
            a_hi = int(np.where(mesh.tets[t] == hi)[0][0])
            delta = mesh.nodes[hi] - mesh.nodes[lo]
            lam = np.zeros((len(s), 4))
            lam[:, a_lo] = 1.0 - s
            lam[:, a_hi] = s
            vals = _edge_basis_at(lam, geom.grads[t : t + 1], mesh.tet_edge_signs[t : t + 1])[0]
            tang = vals @ delta  # (Q,12)
            moments[2 * l] = (w[:, None] * tang).sum(axis=0)
            moments[2 * l + 1] = (w[:, None] * tang * (2 * s - 1)[:, None]).sum(axis=0)
        assert np.allclose(moments, np.eye(12), atol=1e-13)


def test_edge_basis_matches_inverted_moment_system(padded_mesh):
    """Closed-form basis equals the numerically recovered dual basis."""
    mesh = padded_mesh
    geom = tet_geometry(mesh)
    rng = np.random.default_rng(5)
    lam = rng.dirichlet(np.ones(4), size=6)
    for t in (0, 13, len(mesh.tets) - 1):
        coeffs = oracles.dual_edge_basis_coeffs(
            mesh.nodes[mesh.tets[t]], mesh.tets[t], mesh.edges, mesh.tet_edges[t]
        )
        ref = oracles.eval_dual_basis(coeffs, mesh.nodes[mesh.tets[t]], lam)
        mine = _edge_basis_at(lam, geom.grads[t : t + 1], mesh.tet_edge_signs[t : t + 1])[0]
        mine = np.transpose(mine, (0, 1, 2))  # (Q,12,3) already
        assert np.allclose(mine, ref, atol=1e-11)


def test_edge_mass_matches_reference(unit_cell_mesh):
    mesh = unit_cell_mesh
    mat = assemble_edge_mass(mesh).toarray()
    n = 2 * mesh.edge_count
    ref = np.zeros((n, n))
    pts, wts = oracles.tet_quadrature(4)
    for t in range(mesh.tet_count):
        verts = mesh.nodes[mesh.tets[t]]
        coeffs = oracles.dual_edge_basis_coeffs(verts, mesh.tets[t], mesh.edges, mesh.tet_edges[t])
        vals = oracles.eval_dual_basis(coeffs, verts, pts)  # (Q,12,3)
        vol = oracles.tet_volume(verts)
        elem = np.einsum("q,qix,qjx->ij", wts, vals, vals) * 6.0 * vol
        ids = np.empty(12, dtype=int)
        ids[0::2] = 2 * mesh.tet_edges[t]
        ids[1::2] = 2 * mesh.tet_edges[t] + 1
        ref[np.ix_(ids, ids)] += elem
    assert np.allclose(mat, ref, atol=1e-12)


def test_curl_curl_matches_reference(unit_cell_mesh):
    mesh = unit_cell_mesh
    mat = assemble_curl_curl(mesh).toarray()
    n = 2 * mesh.edge_count
    ref = np.zeros((n, n))
    for t in range(mesh.tet_count):
        verts = mesh.nodes[mesh.tets[t]]
        coeffs = oracles.dual_edge_basis_coeffs(verts, mesh.tets[t], mesh.edges, mesh.tet_edges[t])
        curls = oracles.dual_basis_curls(coeffs, verts)  # (12,3)
        vol = oracles.tet_volume(verts)
        elem = curls @ curls.T * vol
        ids = np.empty(12, dtype=int)
        ids[0::2] = 2 * mesh.tet_edges[t]
        ids[1::2] = 2 * mesh.tet_edges[t] + 1
        ref[np.ix_(ids, ids)] += elem
    assert np.allclose(mat, ref, atol=1e-11)


def test_coupling_matches_reference(padded_mesh):
    mesh = padded_mesh
    mat = assemble_node_edge_coupling(mesh).toarray()
    ref = np.zeros_like(mat)
    pts, wts = oracles.tet_quadrature(4)
    for t in mesh.omega_tets:
        verts = mesh.nodes[mesh.tets[t]]
        coeffs = oracles.dual_edge_basis_coeffs(verts, mesh.tets[t], mesh.edges, mesh.tet_edges[t])
        vals = oracles.eval_dual_basis(coeffs, verts, pts)  # (Q,12,3)
        vol = oracles.tet_volume(verts)
        ids = np.empty(12, dtype=int)
        ids[0::2] = 2 * mesh.tet_edges[t]
        ids[1::2] = 2 * mesh.tet_edges[t] + 1
        loc = mesh.node_to_omega[mesh.tets[t]]
        for z in range(4):
            elem = np.einsum("q,q,qic->ic", wts, pts[:, z], vals) * 6.0 * vol
            for c in range(3):
                ref[ids, 3 * loc[z] + c] += elem[:, c]
    assert np.allclose(mat, ref, atol=1e-12)


def test_cross_term_matches_reference(padded_mesh, rng):
    mesh = padded_mesh
    nv = mesh.omega_node_count
    m = rng.standard_normal((nv, 3))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    mat = assemble_cross_term(mesh, m).toarray()

    ref = np.zeros((3 * nv, 3 * nv))
    pts, wts = oracles.tet_quadrature(4)
    eye = np.eye(3)
    for t in mesh.omega_tets:
        verts = mesh.nodes[mesh.tets[t]]
        vol = oracles.tet_volume(verts)
        loc = mesh.node_to_omega[mesh.tets[t]]
        mq = pts @ m[loc]  # (Q,3) interpolated magnetization
        cross = np.stack([np.cross(mq, eye[c]) for c in range(3)], axis=-1)  # (Q,3,3) [q,r,c]
        for a in range(4):
            for b in range(4):
                block = np.einsum("q,q,q,qrc->rc", wts, pts[:, a], pts[:, b], cross) * 6.0 * vol
                ref[3 * loc[a] : 3 * loc[a] + 3, 3 * loc[b] : 3 * loc[b] + 3] += block
    assert np.allclose(mat, ref, atol=1e-12)


def test_cross_term_is_skew(padded_mesh, rng):
    mesh = padded_mesh
    m = rng.standard_normal((mesh.omega_node_count, 3))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    s = assemble_cross_term(mesh, m)
    x = rng.standard_normal(s.nrows)
    assert abs(float(x @ s.matvec(x))) <= 1e-12 * np.abs(s.data).max() * s.nrows


def test_linear_fields_interpolate_exactly(padded_mesh):
    """The edge space contains all linear vector fields, so interpolating
    one reproduces it to rounding."""
    mesh = padded_mesh

    def F(x):
        out = np.zeros_like(x)
        out[:, 1] = x[:, 0]  # a rigid rotation-like shear with unit curl
        return out

    coeffs = interpolate_edge(F, mesh)
    pts, wts = oracles.tet_quadrature(3)
    vals = evaluate_edge_field(mesh, coeffs, pts)
    phys = np.einsum("qa,tac->tqc", pts, mesh.nodes[mesh.tets])
    exact = np.zeros_like(vals)
    exact[:, :, 1] = phys[:, :, 0]
    assert np.abs(vals - exact).max() <= 1e-14


def test_constant_interpolation_short_form(padded_mesh):
    mesh = padded_mesh
    c1 = interpolate_edge(np.array([0.3, -1.2, 0.7]), mesh)
    c2 = interpolate_edge(lambda x: np.tile([0.3, -1.2, 0.7], (len(x), 1)), mesh)
    assert np.allclose(c1, c2, atol=1e-14)


def test_discrete_gradient_commutes_for_linear_scalars(padded_mesh):
    mesh = padded_mesh
    grad = np.array([0.4, -1.1, 2.2])
    s = mesh.nodes @ grad + 0.37
    g1 = discrete_gradient(s, mesh)
    g2 = interpolate_edge(grad, mesh)
    assert np.allclose(g1, g2, atol=1e-12)


def test_discrete_gradients_are_curl_free(padded_mesh, rng):
    mesh = padded_mesh
    cc = assemble_curl_curl(mesh)
    scale = np.abs(cc.data).max()
    for _ in range(5):
        s = rng.standard_normal(mesh.node_count)
        g = discrete_gradient(s, mesh)
        assert np.abs(cc.matvec(g)).max() <= 1e-13 * scale * mesh.node_count


def test_quadratic_form_guards_against_negatives(padded_matrices, rng):
    mats = padded_matrices
    x = rng.standard_normal(mats.edge_mass.nrows)
    val = quadratic_form(mats.edge_mass, x)
    assert val > 0
    # a manifestly indefinite matrix must be caught
    from ellgsim.linalg import from_triplets

    bad = from_triplets(2, 2, np.array([0, 1]), np.array([0, 1]), np.array([1.0, -1.0]))
    with pytest.raises(InvariantViolation):
        quadratic_form(bad, np.array([0.0, 10.0]))


def _interp_errors(n):
    spec = MeshSpec(omega_box=(0.0, 1.0, 0.0, 1.0, 0.0, 1.0), cell=(1.0 / n,) * 3)
    mesh = build_mesh(spec)

    def F(x):
        return np.stack([np.sin(np.pi * x[:, 1]), np.sin(np.pi * x[:, 2]), np.sin(np.pi * x[:, 0])], axis=-1)

    def curlF(x):
        return -np.pi * np.stack([np.cos(np.pi * x[:, 2]), np.cos(np.pi * x[:, 0]), np.cos(np.pi * x[:, 1])], axis=-1)

    coeffs = interpolate_edge(F, mesh)
    pts, wts = oracles.tet_quadrature(4)
    vals = evaluate_edge_field(mesh, coeffs, pts)
    phys = np.einsum("qa,tac->tqc", pts, mesh.nodes[mesh.tets])
    vols = np.abs(np.linalg.det(mesh.nodes[mesh.tets][:, 1:] - mesh.nodes[mesh.tets][:, :1])) / 6.0

    diff = vals - F(phys.reshape(-1, 3)).reshape(phys.shape)
    err_l2 = np.sqrt(np.einsum("q,tqc,tqc,t->", wts, diff, diff, 6.0 * vols))

    # per-tet constant discrete curl, via the independently recovered basis
    ids = np.empty((mesh.tet_count, 12), dtype=int)
    ids[:, 0::2] = 2 * mesh.tet_edges
    ids[:, 1::2] = 2 * mesh.tet_edges + 1
    err_curl_sq = 0.0
    for t in range(mesh.tet_count):
        verts = mesh.nodes[mesh.tets[t]]
        bcoeffs = oracles.dual_edge_basis_coeffs(verts, mesh.tets[t], mesh.edges, mesh.tet_edges[t])
        curls = oracles.dual_basis_curls(bcoeffs, verts)
        curl_h = coeffs[ids[t]] @ curls
        cdiff = curlF(phys[t]) - curl_h[None, :]
        err_curl_sq += float(np.einsum("q,qc,qc->", wts, cdiff, cdiff)) * 6.0 * vols[t]
    return err_l2, np.sqrt(err_curl_sq)


def test_interpolation_convergence_orders():
    l2_coarse, curl_coarse = _interp_errors(2)
    l2_fine, curl_fine = _interp_errors(4)
    rate_l2 = np.log2(l2_coarse / l2_fine)
    rate_curl = np.log2(curl_coarse / curl_fine)
    assert 1.6 <= rate_l2 <= 2.4
    assert 0.6 <= rate_curl <= 1.4


def test_build_matrices_volume_bookkeeping(padded_mesh):
    mats = build_matrices(padded_mesh)
    assert mats.omega_volume == pytest.approx(0.4 * 0.4 * 0.2, rel=1e-12)
    assert mats.domain_volume == pytest.approx(0.8 * 0.8 * 0.4, rel=1e-12)


def test_interpolate_nodal_shapes(padded_mesh):
    vals = interpolate_nodal(np.array([1.0, 0.0, 0.0]), padded_mesh)
    assert vals.shape == (padded_mesh.omega_node_count, 3)
    vals = interpolate_nodal(lambda x: x, padded_mesh)
    assert np.allclose(vals, padded_mesh.nodes[padded_mesh.omega_nodes])
