"""Finite element assembly.

Nodal P1 elements live on the magnetic region (omega): mass, stiffness and
the magnetization cross term, all indexed by omega-local node ids.

Edge elements live on the whole conductor box: each mesh edge (lo, hi)
carries two tangential moments of the field,

    coeff[2e]   : average of F.t along the edge  (Whitney basis function)
    coeff[2e+1] : first moment against the linear weight running -1..+1
                  from lo to hi (basis: -3 * grad of the P2 edge bubble)

which together reproduce every piecewise-linear tangentially continuous
field exactly. Orientation is global: lo < hi by node id.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvariantViolation
from .linalg import SparseMatrix, from_triplets
from .mesh import TET_EDGE_LOCAL, Mesh

# quadrature on the reference tet, barycentric points, weights sum to 1/6
_A2 = (5.0 + 3.0 * np.sqrt(5.0)) / 20.0
_B2 = (5.0 - np.sqrt(5.0)) / 20.0
QUAD_D2_POINTS = np.array(
    [
        [_A2, _B2, _B2, _B2],
        [_B2, _A2, _B2, _B2],
        [_B2, _B2, _A2, _B2],
        [_B2, _B2, _B2, _A2],
    ]
)
QUAD_D2_WEIGHTS = np.full(4, 1.0 / 24.0)

QUAD_D3_POINTS = np.array(
    [
        [0.25, 0.25, 0.25, 0.25],
        [0.5, 1 / 6, 1 / 6, 1 / 6],
        [1 / 6, 0.5, 1 / 6, 1 / 6],
        [1 / 6, 1 / 6, 0.5, 1 / 6],
        [1 / 6, 1 / 6, 1 / 6, 0.5],
    ]
)
QUAD_D3_WEIGHTS = np.array([-2.0 / 15.0, 3.0 / 40.0, 3.0 / 40.0, 3.0 / 40.0, 3.0 / 40.0])

# 3-point Gauss on [0,1]
EDGE_GAUSS_POINTS = np.array([0.5 - np.sqrt(15.0) / 10.0, 0.5, 0.5 + np.sqrt(15.0) / 10.0])
EDGE_GAUSS_WEIGHTS = np.array([5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0])


@dataclass
class MeshGeometry:
    vols: np.ndarray   # (T,)
    grads: np.ndarray  # (T,4,3) gradients of the four barycentric hats


def tet_geometry(mesh: Mesh) -> MeshGeometry:
    x = mesh.nodes[mesh.tets]
    d = x[:, 1:] - x[:, :1]
    vols = np.linalg.det(d) / 6.0
    dinv = np.linalg.inv(d)
    grads = np.empty((mesh.tet_count, 4, 3))
    grads[:, 1:, :] = np.transpose(dinv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    return MeshGeometry(vols, grads)


def _scatter_nodal(mesh: Mesh, elem: np.ndarray, tets_sel: np.ndarray) -> SparseMatrix:
    """Assemble (T,4,4) element blocks into an omega-local nodal matrix."""
    loc = mesh.node_to_omega[mesh.tets[tets_sel]]
    n = mesh.omega_node_count
    rows = np.broadcast_to(loc[:, :, None], elem.shape)
    cols = np.broadcast_to(loc[:, None, :], elem.shape)
    return from_triplets(n, n, rows.ravel(), cols.ravel(), elem.ravel())


def assemble_nodal_mass(mesh: Mesh, geom: MeshGeometry | None = None) -> SparseMatrix:
    """P1 scalar mass matrix over the magnetic region (4-point rule, exact)."""
    geom = geom or tet_geometry(mesh)
    sel = mesh.omega_tets
    ref = np.einsum("q,qa,qb->ab", 6.0 * QUAD_D2_WEIGHTS, QUAD_D2_POINTS, QUAD_D2_POINTS)
    elem = geom.vols[sel, None, None] * ref[None, :, :]
    return _scatter_nodal(mesh, elem, sel)


def assemble_nodal_stiffness(mesh: Mesh, geom: MeshGeometry | None = None) -> SparseMatrix:
    """P1 scalar stiffness matrix over the magnetic region (exact, gradients constant)."""
    geom = geom or tet_geometry(mesh)
    sel = mesh.omega_tets
    g = geom.grads[sel]
    elem = np.einsum("tad,tbd,t->tab", g, g, geom.vols[sel])
    return _scatter_nodal(mesh, elem, sel)


def _edge_basis_at(lam: np.ndarray, grads: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Evaluate the 12 local edge basis functions.

    lam: (Q,4) barycentric points; grads: (T,4,3); signs: (T,6).
    Returns (T,Q,12,3); local dof 2e is the oriented Whitney function of local
    edge e, dof 2e+1 the bubble-gradient function.
    """
    a = TET_EDGE_LOCAL[:, 0]
    b = TET_EDGE_LOCAL[:, 1]
    la = lam[:, a]  # (Q,6)
    lb = lam[:, b]
    ga = grads[:, a, :]  # (T,6,3)
    gb = grads[:, b, :]
    whitney = (
        la[None, :, :, None] * gb[:, None, :, :] - lb[None, :, :, None] * ga[:, None, :, :]
    )
    whitney *= signs[:, None, :, None]
    bubble = -3.0 * (
        la[None, :, :, None] * gb[:, None, :, :] + lb[None, :, :, None] * ga[:, None, :, :]
    )
    T, Q = whitney.shape[0], whitney.shape[1]
    out = np.empty((T, Q, 12, 3))
    out[:, :, 0::2, :] = whitney
    out[:, :, 1::2, :] = bubble
    return out


def _edge_dof_ids(mesh: Mesh) -> np.ndarray:
    """(T,12) global dof ids matching the local basis layout of _edge_basis_at."""
    ids = np.empty((mesh.tet_count, 12), dtype=np.int64)
    ids[:, 0::2] = 2 * mesh.tet_edges
    ids[:, 1::2] = 2 * mesh.tet_edges + 1
    return ids


def edge_dof_count(mesh: Mesh) -> int:
    return 2 * mesh.edge_count


def assemble_edge_mass(mesh: Mesh, geom: MeshGeometry | None = None) -> SparseMatrix:
    """Edge-element mass matrix over the whole box (4-point rule, exact)."""
    geom = geom or tet_geometry(mesh)
    basis = _edge_basis_at(QUAD_D2_POINTS, geom.grads, mesh.tet_edge_signs)
    elem = np.einsum("q,tqix,tqjx->tij", 6.0 * QUAD_D2_WEIGHTS, basis, basis)
    elem *= geom.vols[:, None, None]
    ids = _edge_dof_ids(mesh)
    n = edge_dof_count(mesh)
    rows = np.broadcast_to(ids[:, :, None], elem.shape)
    cols = np.broadcast_to(ids[:, None, :], elem.shape)
    return from_triplets(n, n, rows.ravel(), cols.ravel(), elem.ravel())


def _edge_curls(mesh: Mesh, geom: MeshGeometry) -> np.ndarray:
    """(T,12,3) per-tet curls; constant per basis function, zero for bubbles."""
    a = TET_EDGE_LOCAL[:, 0]
    b = TET_EDGE_LOCAL[:, 1]
    ga = geom.grads[:, a, :]
    gb = geom.grads[:, b, :]
    cw = 2.0 * np.cross(ga, gb) * mesh.tet_edge_signs[:, :, None]
    out = np.zeros((mesh.tet_count, 12, 3))
    out[:, 0::2, :] = cw
    return out


def assemble_curl_curl(mesh: Mesh, geom: MeshGeometry | None = None) -> SparseMatrix:
    """Curl-curl matrix over the whole box; exact with one point per tet."""
    geom = geom or tet_geometry(mesh)
    curls = _edge_curls(mesh, geom)
    elem = np.einsum("tix,tjx,t->tij", curls, curls, geom.vols)
    ids = _edge_dof_ids(mesh)
    n = edge_dof_count(mesh)
    rows = np.broadcast_to(ids[:, :, None], elem.shape)
    cols = np.broadcast_to(ids[:, None, :], elem.shape)
    return from_triplets(n, n, rows.ravel(), cols.ravel(), elem.ravel())


def assemble_node_edge_coupling(mesh: Mesh, geom: MeshGeometry | None = None) -> SparseMatrix:
    """Coupling matrix B[edge dof, 3*z+c] = integral over omega of (hat_z e_c) . basis.

    Columns use omega-local node numbering interleaved by component.
    """
    geom = geom or tet_geometry(mesh)
    sel = mesh.omega_tets
    basis = _edge_basis_at(QUAD_D2_POINTS, geom.grads[sel], mesh.tet_edge_signs[sel])
    # elem[t,i,z,c] = sum_q 6 w_q lam_q[z] basis[t,q,i,c] * vol_t
    elem = np.einsum("q,qz,tqic->tizc", 6.0 * QUAD_D2_WEIGHTS, QUAD_D2_POINTS, basis)
    elem *= geom.vols[sel, None, None, None]
    ids = _edge_dof_ids(mesh)[sel]
    loc = mesh.node_to_omega[mesh.tets[sel]]
    comp = np.arange(3, dtype=np.int64)
    rows = np.broadcast_to(ids[:, :, None, None], elem.shape)
    cols = np.broadcast_to(
        (3 * loc[:, None, :, None] + comp[None, None, None, :]), elem.shape
    )
    return from_triplets(
        edge_dof_count(mesh), 3 * mesh.omega_node_count, rows.ravel(), cols.ravel(), elem.ravel()
    )


def assemble_cross_term(mesh: Mesh, m: np.ndarray, geom: MeshGeometry | None = None) -> SparseMatrix:
    """Matrix of (m x u, w) over omega for nodal vector fields u, w.

    Skew-symmetric by construction (x.T S x = 0); exact for nodal m via the
    degree-3 rule, since the integrand is cubic in the barycentrics.
    """
    geom = geom or tet_geometry(mesh)
    sel = mesh.omega_tets
    loc = mesh.node_to_omega[mesh.tets[sel]]
    rows, cols, vals = kernels.cross_term_triplets(
        loc, geom.vols[sel], QUAD_D3_POINTS, 6.0 * QUAD_D3_WEIGHTS, np.asarray(m, dtype=float)
    )
    n = 3 * mesh.omega_node_count
    return from_triplets(n, n, rows, cols, vals)


@dataclass
class FemMatrices:
    """Everything assembled once per mesh."""

    mesh: Mesh
    geom: MeshGeometry
    mass: SparseMatrix        # omega nodal P1
    stiffness: SparseMatrix   # omega nodal P1
    edge_mass: SparseMatrix   # box edge elements
    curl_curl: SparseMatrix   # box edge elements, no material factor
    coupling: SparseMatrix    # edge dofs x (3 * omega nodes)
    coupling_t: SparseMatrix
    omega_volume: float
    domain_volume: float

    def cross_term(self, m: np.ndarray) -> SparseMatrix:
        return assemble_cross_term(self.mesh, m, self.geom)


def build_matrices(mesh: Mesh) -> FemMatrices:
    geom = tet_geometry(mesh)
    coupling = assemble_node_edge_coupling(mesh, geom)
    return FemMatrices(
        mesh=mesh,
        geom=geom,
        mass=assemble_nodal_mass(mesh, geom),
        stiffness=assemble_nodal_stiffness(mesh, geom),
        edge_mass=assemble_edge_mass(mesh, geom),
        curl_curl=assemble_curl_curl(mesh, geom),
        coupling=coupling,
        coupling_t=coupling.transpose(),
        omega_volume=float(geom.vols[mesh.omega_tets].sum()),
        domain_volume=float(geom.vols.sum()),
    )


def apply_blockwise(mat: SparseMatrix, field: np.ndarray) -> np.ndarray:
    """Apply a scalar nodal matrix to each component of a (V,3) field."""
    out = np.empty_like(field)
    for c in range(3):
        out[:, c] = mat.matvec(field[:, c])
    return out


def quadratic_form(mat: SparseMatrix, x: np.ndarray) -> float:
    """x.T A x for a PSD matrix; clamps round-off negatives, rejects real ones."""
    x = np.asarray(x, dtype=float).ravel()
    q = float(x @ mat.matvec(x))
    scale = float(np.abs(mat.data).max()) if mat.nnz else 0.0
    floor = -1e-13 * max(1.0, scale * float(x @ x))
    if q < floor:
        raise InvariantViolation(f"quadratic form of a PSD matrix came out negative: {q}")
    return max(q, 0.0)


def nodal_field_norms(mats: FemMatrices, field: np.ndarray) -> tuple[float, float]:
    """(L2 norm squared, H1-seminorm squared) of a nodal vector field on omega."""
    l2 = sum(quadratic_form(mats.mass, field[:, c]) for c in range(3))
    h1 = sum(quadratic_form(mats.stiffness, field[:, c]) for c in range(3))
    return l2, h1


def edge_field_l2_and_curl_norms(
    coeffs: np.ndarray, edge_mass: SparseMatrix, curl_curl: SparseMatrix
) -> tuple[float, float]:
    """(||F||_L2, ||curl F||_L2) of an edge field from its coefficient vector."""
    return (
        float(np.sqrt(quadratic_form(edge_mass, coeffs))),
        float(np.sqrt(quadratic_form(curl_curl, coeffs))),
    )


def interpolate_nodal(f, mesh: Mesh) -> np.ndarray:
    """Nodal interpolant on omega: f maps (n,3) coords to (n,3) values,
    or is a constant 3-vector."""
    coords = mesh.nodes[mesh.omega_nodes]
    if callable(f):
        vals = np.asarray(f(coords), dtype=float)
        if vals.shape != coords.shape:
            raise ValueError("nodal interpolation function returned a wrong shape")
        return vals
    vec = np.asarray(f, dtype=float).reshape(3)
    return np.tile(vec, (coords.shape[0], 1))


def interpolate_edge(F, mesh: Mesh) -> np.ndarray:
    """Edge interpolant on the box: both tangential moments per edge by
    3-point Gauss quadrature (exact for fields with cubic edge restriction)."""
    lo = mesh.nodes[mesh.edges[:, 0]]
    hi = mesh.nodes[mesh.edges[:, 1]]
    delta = hi - lo
    coeffs = np.zeros(2 * mesh.edge_count)
    if callable(F):
        for s, w in zip(EDGE_GAUSS_POINTS, EDGE_GAUSS_WEIGHTS):
            vals = np.asarray(F(lo + s * delta), dtype=float)
            tang = np.einsum("ec,ec->e", vals, delta)
            coeffs[0::2] += w * tang
            coeffs[1::2] += w * tang * (2.0 * s - 1.0)
    else:
        vec = np.asarray(F, dtype=float).reshape(3)
        coeffs[0::2] = delta @ vec
    return coeffs


def discrete_gradient(s: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Edge coefficients of the gradient of a nodal scalar on the box.

    The tangential trace of a P1 gradient is constant along every edge, so
    only the average moments are nonzero: s[hi] - s[lo].
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (mesh.node_count,):
        raise ValueError("discrete_gradient expects one scalar per mesh node")
    coeffs = np.zeros(2 * mesh.edge_count)
    coeffs[0::2] = s[mesh.edges[:, 1]] - s[mesh.edges[:, 0]]
    return coeffs


def evaluate_edge_field(
    mesh: Mesh, coeffs: np.ndarray, lam: np.ndarray, geom: MeshGeometry | None = None
) -> np.ndarray:
    """Evaluate an edge field at barycentric points lam (Q,4) in every tet -> (T,Q,3)."""
    geom = geom or tet_geometry(mesh)
    basis = _edge_basis_at(np.atleast_2d(lam), geom.grads, mesh.tet_edge_signs)
    local = coeffs[_edge_dof_ids(mesh)]
    return np.einsum("ti,tqic->tqc", local, basis)


def evaluate_nodal_field(
    mesh: Mesh, values: np.ndarray, tet_ids: np.ndarray, lam: np.ndarray
) -> np.ndarray:
    """Evaluate an omega nodal field at barycentric points of selected omega tets."""
    loc = mesh.node_to_omega[mesh.tets[tet_ids]]
    if np.any(loc < 0):
        raise ValueError("evaluation tet has nodes outside the magnetic region")
    return np.einsum("qa,tac->tqc", np.atleast_2d(lam), values[loc])
