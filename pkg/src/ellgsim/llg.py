"""Tangent-space solve and nodewise normalization for the magnetization update.

Each step solves a linear system for an update v constrained to the discrete
tangent space of the current magnetization: per node, v(z) is spanned by two
frame vectors orthogonal to m(z), which reduces the 3V unknowns to 2V.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, InvariantViolation, SolverError
from .fem import FemMatrices, apply_blockwise
from .linalg import SolveReport, SparseMatrix, from_triplets, solve_general


@dataclass
class LlgParams:
    alpha: float
    c_exch: float
    theta: float
    k: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError(f"damping alpha must be positive, got {self.alpha}")
        if self.c_exch < 0:
            raise ConfigError(f"exchange coefficient must be nonnegative, got {self.c_exch}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if self.k <= 0:
            raise ConfigError(f"time-step k must be positive, got {self.k}")


@dataclass
class TangentFrame:
    """Per-node orthonormal pair spanning the plane orthogonal to m."""

    t1: np.ndarray  # (V,3)
    t2: np.ndarray  # (V,3)


def tangent_frame(m: np.ndarray) -> TangentFrame:
    """Deterministic orthonormal tangent frames for a unit nodal field.

    Per node: take the coordinate axis e_j with the smallest |m_j| (ties pick
    the smallest j), project it off m and normalize for t1; t2 = m x t1.
    """
    m = np.asarray(m, dtype=float)
    norms = np.linalg.norm(m, axis=1)
    if np.abs(norms - 1.0).max() > 1e-10:
        raise InvariantViolation("tangent_frame needs unit magnetization at every node")
    j = np.argmin(np.abs(m), axis=1)
    e = np.zeros_like(m)
    e[np.arange(m.shape[0]), j] = 1.0
    t1 = e - (e * m).sum(axis=1, keepdims=True) * m
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(m, t1)
    return TangentFrame(t1, t2)


def reduce_vector(frame: TangentFrame, full: np.ndarray) -> np.ndarray:
    """Project a (V,3) field onto the frames -> (2V,) interleaved."""
    out = np.empty(2 * full.shape[0])
    out[0::2] = (frame.t1 * full).sum(axis=1)
    out[1::2] = (frame.t2 * full).sum(axis=1)
    return out


def expand_vector(frame: TangentFrame, red: np.ndarray) -> np.ndarray:
    """Inverse of reduce_vector on the tangent bundle: (2V,) -> (V,3)."""
    return red[0::2, None] * frame.t1 + red[1::2, None] * frame.t2


def reduce_matrix(frame: TangentFrame, rows, cols, vals, n_nodes: int) -> SparseMatrix:
    """Project COO triplets of a 3V x 3V operator onto the frames (2V x 2V)."""
    r2, c2, v2 = kernels.reduce_frame_triplets(
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(vals, dtype=float),
        frame.t1,
        frame.t2,
    )
    return from_triplets(2 * n_nodes, 2 * n_nodes, r2, c2, v2)


@dataclass
class TangentSystem:
    matrix: SparseMatrix  # 2V x 2V
    rhs: np.ndarray       # (2V,)
    frame: TangentFrame
    m: np.ndarray         # (V,3) state the system was built for


def _expand_scalar_triplets(mat: SparseMatrix):
    """Triplets of (scalar matrix) applied identically to all three components."""
    r, c, v = mat.triplets()
    comp = np.arange(3, dtype=np.int64)
    rows = (3 * r[:, None] + comp[None, :]).ravel()
    cols = (3 * c[:, None] + comp[None, :]).ravel()
    vals = np.repeat(v, 3)
    return rows, cols, vals


def assemble_llg_system(
    m: np.ndarray,
    h_coeffs: np.ndarray,
    contribution_field: np.ndarray,
    params: LlgParams,
    mats: FemMatrices,
    frame: TangentFrame | None = None,
    scalar_part: SparseMatrix | None = None,
) -> TangentSystem:
    """Build the reduced tangent-space system for the update v.

    Weak form against tangent test functions phi:
        alpha (v, phi) + (m x v, phi) + c_exch theta k (grad v, grad phi)
          = -c_exch (grad m, grad phi) + (H, phi) + (contribution, phi)
    scalar_part may carry the precomputed alpha*M + c_exch*theta*k*K matrix.
    """
    m = np.asarray(m, dtype=float)
    v_nodes = m.shape[0]
    if frame is None:
        frame = tangent_frame(m)
    if scalar_part is None:
        scalar_part = _combine_scalar_part(params, mats)

    fr, fc, fv = _expand_scalar_triplets(scalar_part)
    cross = mats.cross_term(m)
    cr, cc, cv = cross.triplets()
    a_red = reduce_matrix(
        frame,
        np.concatenate([fr, cr]),
        np.concatenate([fc, cc]),
        np.concatenate([fv, cv]),
        v_nodes,
    )

    rhs_full = -params.c_exch * apply_blockwise(mats.stiffness, m)
    rhs_full += mats.coupling_t.matvec(np.asarray(h_coeffs, dtype=float)).reshape(v_nodes, 3)
    rhs_full += apply_blockwise(mats.mass, np.asarray(contribution_field, dtype=float))
    return TangentSystem(a_red, reduce_vector(frame, rhs_full), frame, m)


def _combine_scalar_part(params: LlgParams, mats: FemMatrices) -> SparseMatrix:
    mr, mc, mv = mats.mass.triplets()
    kr, kc, kv = mats.stiffness.triplets()
    n = mats.mass.nrows
    return from_triplets(
        n,
        n,
        np.concatenate([mr, kr]),
        np.concatenate([mc, kc]),
        np.concatenate([params.alpha * mv, params.c_exch * params.theta * params.k * kv]),
    )


def solve_v(
    system: TangentSystem,
    tol: float = 1e-10,
    max_iter: int | None = None,
    jacobi: bool = False,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve the reduced system and lift the update back to (V,3).

    The lifted v is tangent to m by construction; the residual nodal dot
    products only reflect frame round-off and are checked against 1e-10
    relative to max |v|.
    """
    y, report = solve_general(system.matrix, system.rhs, tol=tol, max_iter=max_iter, jacobi=jacobi, x0=x0)
    if not report.converged:
        raise SolverError(
            f"tangent system solve did not converge: residual {report.residual:.3e} "
            f"after {report.iterations} iterations"
        )
    v = expand_vector(system.frame, y)
    vmax = np.abs(v).max()
    if vmax > 0:
        worst = np.abs((v * system.m).sum(axis=1)).max()
        if worst > 1e-10 * vmax:
            raise InvariantViolation(f"update left the tangent space: max |v.m| = {worst:.3e}")
    return v, report


def normalize_update(m: np.ndarray, v: np.ndarray, k: float) -> np.ndarray:
    """Nodewise m_next = (m + k v) / |m + k v|.

    Tangency makes |m + k v|^2 = 1 + k^2 |v|^2, so the denominator never
    drops below one; a smaller value means v leaked out of the tangent plane.
    """
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    tang = np.abs((m * v).sum(axis=1))
    if tang.size and tang.max() > 1e-8 * (1.0 + np.abs(v).max()):
        raise InvariantViolation(f"normalize_update got a non-tangent v: max |v.m| = {tang.max():.3e}")
    w = m + k * v
    d_sq = (w * w).sum(axis=1)
    if d_sq.min() < 1.0 - 1e-12:
        raise InvariantViolation(
            f"normalization denominator fell below one: min |m+kv|^2 = {d_sq.min():.17g}"
        )
    return w / np.sqrt(d_sq)[:, None]
