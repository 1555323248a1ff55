"""Implicit Euler step for the eddy-current field on edge elements."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SolverError
from .fem import FemMatrices
from .linalg import SolveReport, SparseMatrix, from_triplets, solve_spd


@dataclass
class EddyParams:
    mu0: float
    sigma: float
    k: float

    def __post_init__(self):
        if self.mu0 <= 0:
            raise ConfigError(f"mu0 must be positive, got {self.mu0}")
        if self.sigma <= 0:
            raise ConfigError(f"conductivity must be positive, got {self.sigma}")
        if self.k <= 0:
            raise ConfigError(f"time-step k must be positive, got {self.k}")


def build_eddy_system(params: EddyParams, mats: FemMatrices) -> SparseMatrix:
    """A_E = (mu0/k) M_E + (1/sigma) C; SPD since M_E is and C is PSD."""
    mr, mc, mv = mats.edge_mass.triplets()
    cr, cc, cv = mats.curl_curl.triplets()
    n = mats.edge_mass.nrows
    return from_triplets(
        n,
        n,
        np.concatenate([mr, cr]),
        np.concatenate([mc, cc]),
        np.concatenate([(params.mu0 / params.k) * mv, (1.0 / params.sigma) * cv]),
    )


def step_H(
    h_coeffs: np.ndarray,
    v: np.ndarray,
    params: EddyParams,
    a_eddy: SparseMatrix,
    mats: FemMatrices,
    tol: float = 1e-10,
    max_iter: int | None = None,
    jacobi: bool = False,
) -> tuple[np.ndarray, SolveReport]:
    """One implicit step: A_E H_next = (mu0/k) M_E H - mu0 B v.

    Warm-started at the current field, so a state the step preserves in
    exact arithmetic is returned bitwise unchanged.
    """
    h_coeffs = np.asarray(h_coeffs, dtype=float)
    rhs = (params.mu0 / params.k) * mats.edge_mass.matvec(h_coeffs)
    rhs -= params.mu0 * mats.coupling.matvec(np.asarray(v, dtype=float).ravel())
    h_next, report = solve_spd(
        a_eddy, rhs, tol=tol, max_iter=max_iter, jacobi=jacobi, x0=h_coeffs
    )
    if not report.converged:
        raise SolverError(
            f"eddy step did not converge: residual {report.residual:.3e} "
            f"after {report.iterations} iterations"
        )
    return h_next, report
