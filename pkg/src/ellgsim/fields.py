"""Lower-order effective-field contributions and initial data.

A contribution maps a nodal magnetization to a nodal field and declares an
L2 bound constant: for unit-modulus nodal inputs (the integrator's actual
domain), ||contribution(m)||_L2^2 never exceeds the declared bound. General
L2-normalized inputs can exceed it; the declared constants are documented
per class.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .fem import (
    FemMatrices,
    QUAD_D2_POINTS,
    QUAD_D2_WEIGHTS,
    evaluate_edge_field,
    quadratic_form,
)
from .linalg import SparseMatrix
from .mesh import Mesh

log = logging.getLogger(__name__)


def uniaxial_anisotropy(m: np.ndarray, ca: float, axis: np.ndarray) -> np.ndarray:
    """Nodal values of ca * <m, p> p for a unit easy axis p."""
    axis = np.asarray(axis, dtype=float).reshape(3)
    return ca * np.outer(m @ axis, axis)


def applied_field(h_ext: np.ndarray, n_nodes: int) -> np.ndarray:
    """Constant nodal field, independent of m."""
    vec = np.asarray(h_ext, dtype=float).reshape(3)
    return np.tile(vec, (n_nodes, 1))


class FieldContribution(ABC):
    """A magnetization-dependent lower-order field term with a declared bound."""

    bound: float

    @abstractmethod
    def evaluate(self, m: np.ndarray) -> np.ndarray:
        ...


class ZeroContribution(FieldContribution):
    bound = 0.0

    def evaluate(self, m: np.ndarray) -> np.ndarray:
        return np.zeros_like(m)


class UniaxialAnisotropy(FieldContribution):
    """ca * <m,p> p; bound ca^2 |omega| is sharp for unit-modulus nodal m
    (nodal values are capped by ca, and the mass row sums total |omega|)."""

    def __init__(self, ca: float, axis, omega_volume: float):
        axis = np.asarray(axis, dtype=float).reshape(3)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ValueError("easy axis must be nonzero")
        self.ca = float(ca)
        self.axis = axis / norm
        self.bound = self.ca**2 * float(omega_volume)

    def evaluate(self, m: np.ndarray) -> np.ndarray:
        return uniaxial_anisotropy(m, self.ca, self.axis)


class UniformField(FieldContribution):
    """Applied field; bound |H_ext|^2 |omega| holds with equality."""

    def __init__(self, h_ext, omega_volume: float):
        self.h_ext = np.asarray(h_ext, dtype=float).reshape(3)
        self.bound = float(self.h_ext @ self.h_ext) * float(omega_volume)

    def evaluate(self, m: np.ndarray) -> np.ndarray:
        return applied_field(self.h_ext, m.shape[0])


class CompositeContribution(FieldContribution):
    """Sum of contributions; bound by the triangle inequality."""

    def __init__(self, parts: list[FieldContribution]):
        self.parts = list(parts)
        self.bound = sum(np.sqrt(p.bound) for p in self.parts) ** 2

    def evaluate(self, m: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(m, dtype=float))
        for p in self.parts:
            out += p.evaluate(m)
        return out


def check_contribution_bound(
    contrib: FieldContribution,
    mass: SparseMatrix,
    rng: np.random.Generator,
    trials: int = 20,
) -> float:
    """Probe the declared bound on random unit-modulus nodal fields.

    Samples random unit vectors per node (rescaled further if their L2 norm
    exceeds one), evaluates the contribution, and returns the worst ratio
    ||contribution||^2 / bound. Ratios above 1 are logged, not raised.
    """
    n = mass.nrows
    worst = 0.0
    for _ in range(trials):
        m = rng.standard_normal((n, 3))
        m /= np.linalg.norm(m, axis=1, keepdims=True)
        norm_sq = sum(quadratic_form(mass, m[:, c]) for c in range(3))
        if norm_sq > 1.0:
            m /= np.sqrt(norm_sq)
        field = contrib.evaluate(m)
        val = sum(quadratic_form(mass, field[:, c]) for c in range(3))
        if contrib.bound == 0.0:
            ratio = 0.0 if val == 0.0 else np.inf
        else:
            ratio = val / contrib.bound
        worst = max(worst, float(ratio))
    if worst > 1.0:
        log.warning("field contribution exceeded its declared bound: ratio %.3g", worst)
    return worst


@dataclass
class InitialData:
    m0: np.ndarray        # (V,3) unit nodal magnetization on omega
    h0: np.ndarray        # (2E,) edge coefficients of the initial field
    mismatch_l2: float    # interpolation gap of the magnetic-box indicator


def build_initial_data(m0_spec, h0_star, mesh: Mesh, mats: FemMatrices | None = None) -> InitialData:
    """Initial nodal magnetization and edge field.

    The edge field interpolates H0* minus the magnetization extended by zero:
    an edge takes the magnetization term exactly when both endpoints lie in
    the closed magnetic box, which includes edges inside its boundary faces
    (one-sided trace from inside).
    """
    coords = mesh.nodes[mesh.omega_nodes]
    if callable(m0_spec):
        m0 = np.asarray(m0_spec(coords), dtype=float)
    else:
        m0 = np.tile(np.asarray(m0_spec, dtype=float).reshape(3), (coords.shape[0], 1))
    norms = np.linalg.norm(m0, axis=1)
    if np.abs(norms - 1.0).max() > 1e-10:
        raise InvariantViolation("initial magnetization is not unit length at every node")

    h0_star = np.asarray(h0_star, dtype=float).reshape(3)
    lo_ids = mesh.edges[:, 0]
    hi_ids = mesh.edges[:, 1]
    delta = mesh.nodes[hi_ids] - mesh.nodes[lo_ids]
    coeffs = np.zeros(2 * mesh.edge_count)
    coeffs[0::2] = delta @ h0_star

    in_closure = mesh.node_to_omega >= 0
    mag_edges = in_closure[lo_ids] & in_closure[hi_ids]
    if mag_edges.any():
        m_lo = m0[mesh.node_to_omega[lo_ids[mag_edges]]]
        m_hi = m0[mesh.node_to_omega[hi_ids[mag_edges]]]
        d = delta[mag_edges]
        # the magnetization is linear along the edge: both moments are exact
        coeffs[0::2][mag_edges] -= np.einsum("ec,ec->e", 0.5 * (m_lo + m_hi), d)
        coeffs[1::2][mag_edges] -= np.einsum("ec,ec->e", (m_hi - m_lo) / 6.0, d)

    mismatch = _interpolation_mismatch(mesh, mats, m0, h0_star, coeffs)
    return InitialData(m0, coeffs, mismatch)


def _interpolation_mismatch(mesh, mats, m0, h0_star, coeffs) -> float:
    """L2 distance between the interpolated initial field and the discontinuous
    target H0* - chi_omega m0; quantifies the smearing across the interface."""
    geom = mats.geom if mats is not None else None
    vals = evaluate_edge_field(mesh, coeffs, QUAD_D2_POINTS, geom)
    target = np.tile(h0_star, (mesh.tet_count, QUAD_D2_POINTS.shape[0], 1))
    loc = mesh.node_to_omega[mesh.tets[mesh.omega_tets]]
    m_at = np.einsum("qa,tac->tqc", QUAD_D2_POINTS, m0[loc])
    target[mesh.omega_tets] -= m_at
    diff = vals - target
    if geom is None:
        from .fem import tet_geometry

        geom = tet_geometry(mesh)
    per_tet = np.einsum("q,tqc,tqc->t", 6.0 * QUAD_D2_WEIGHTS, diff, diff) * geom.vols
    return float(np.sqrt(per_tet.sum()))
