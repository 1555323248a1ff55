"""Minimal deterministic sparse linear algebra: CSR storage, CG, GMRES.

Kept dependency-free on purpose; the matrices here are small enough
(tens of thousands of unknowns) that a tuned general-purpose library is
not worth the coupling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import SolverError

DROP_TOL = 1e-300


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    method: str = ""


@dataclass
class SparseMatrix:
    """CSR matrix with canonical storage: sorted unique columns per row.

    coo_rows caches the expanded row index per stored entry; the numpy
    matvec backend needs it and transposition reuses it.
    """

    nrows: int
    ncols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    coo_rows: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.coo_rows is None:
            self.coo_rows = np.repeat(
                np.arange(self.nrows, dtype=np.int64), np.diff(self.indptr)
            )

    @property
    def nnz(self) -> int:
        return int(self.data.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ncols,):
            raise ValueError(f"matvec shape mismatch: {x.shape} vs {self.shape}")
        return kernels.csr_matvec(self.indptr, self.indices, self.data, self.coo_rows, x)

    def __matmul__(self, x):
        return self.matvec(x)

    def transpose(self) -> "SparseMatrix":
        return from_triplets(self.ncols, self.nrows, self.indices, self.coo_rows, self.data)

    def scaled(self, c: float) -> "SparseMatrix":
        return SparseMatrix(
            self.nrows, self.ncols, self.indptr, self.indices, c * self.data, self.coo_rows
        )

    def diagonal(self) -> np.ndarray:
        if self.nrows != self.ncols:
            raise ValueError("diagonal of a non-square matrix")
        d = np.zeros(self.nrows)
        on_diag = self.coo_rows == self.indices
        d[self.coo_rows[on_diag]] = self.data[on_diag]
        return d

    def toarray(self) -> np.ndarray:
        a = np.zeros(self.shape)
        a[self.coo_rows, self.indices] = self.data
        return a

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.coo_rows, self.indices, self.data


def from_triplets(nrows, ncols, rows, cols, vals) -> SparseMatrix:
    """Build a CSR matrix from COO triplets, summing duplicates.

    Entries with magnitude below 1e-300 after summation are dropped, so the
    stored pattern never contains explicit zeros.
    """
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("triplet arrays must have matching lengths")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= ncols:
            raise ValueError("column index out of range")
    key = rows * np.int64(ncols) + cols
    order = np.argsort(key, kind="stable")
    key = key[order]
    vals = vals[order]
    if key.size:
        starts = np.flatnonzero(np.concatenate(([True], key[1:] != key[:-1])))
        sums = np.add.reduceat(vals, starts)
        ukey = key[starts]
        keep = np.abs(sums) >= DROP_TOL
        sums = sums[keep]
        ukey = ukey[keep]
    else:
        sums = vals
        ukey = key
    r = ukey // ncols
    c = ukey % ncols
    indptr = np.searchsorted(r, np.arange(nrows + 1, dtype=np.int64), side="left").astype(np.int64)
    return SparseMatrix(int(nrows), int(ncols), indptr, c, sums, coo_rows=r)


def add(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch in add: {a.shape} vs {b.shape}")
    ar, ac, av = a.triplets()
    br, bc, bv = b.triplets()
    return from_triplets(
        a.nrows,
        a.ncols,
        np.concatenate([ar, br]),
        np.concatenate([ac, bc]),
        np.concatenate([av, bv]),
    )


def _jacobi_inverse(a: SparseMatrix) -> np.ndarray:
    d = a.diagonal()
    bad = np.abs(d) < DROP_TOL
    if bad.any():
        raise SolverError("jacobi preconditioner: zero diagonal entry")
    return 1.0 / d


def _inf_norm(a: SparseMatrix) -> float:
    """Maximum absolute row sum, used to scale stopping criteria."""
    if not a.nnz:
        return 0.0
    sums = np.bincount(a.coo_rows, weights=np.abs(a.data), minlength=a.nrows)
    return float(sums.max())


def _check_symmetry(a: SparseMatrix, rng_seed: int = 0) -> None:
    rng = np.random.default_rng(rng_seed)
    scale = np.abs(a.data).max() if a.nnz else 0.0
    at = a.transpose()
    for _ in range(3):
        x = rng.standard_normal(a.ncols)
        dev = np.abs(a.matvec(x) - at.matvec(x)).max()
        if dev > 1e-12 * max(scale, 1.0) * max(np.abs(x).max(), 1.0) * a.ncols:
            raise SolverError("matrix failed the symmetry check")


def solve_spd(
    a: SparseMatrix,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
    jacobi: bool = False,
    x0: np.ndarray | None = None,
    check_symmetry: bool = False,
) -> tuple[np.ndarray, SolveReport]:
    """Conjugate gradients for a symmetric positive definite matrix.

    Stops on the backward error ||b - A x|| <= tol * (||b|| + ||A|| ||x||),
    which stays reachable in floating point even when the operator mixes
    very different scales. A zero right-hand side returns the zero vector
    without iterating, and a start vector that already satisfies the system
    is returned unchanged.
    """
    n = a.nrows
    if a.ncols != n:
        raise ValueError("solve_spd needs a square matrix")
    b = np.asarray(b, dtype=float)
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, "cg")
    if check_symmetry:
        _check_symmetry(a)
    if max_iter is None:
        max_iter = 10 * n
    minv = _jacobi_inverse(a) if jacobi else None
    norm_a = _inf_norm(a)

    def backward_scale(vec: np.ndarray) -> float:
        return norm_b + norm_a * np.linalg.norm(vec)

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    iters = 0
    for _refresh in range(3):
        r = b - a.matvec(x)
        rel = np.linalg.norm(r) / backward_scale(x)
        if rel <= tol:
            return x, SolveReport(iters, rel, True, "cg")
        z = minv * r if jacobi else r
        p = z.copy()
        rz = float(r @ z)
        while iters < max_iter:
            ap = a.matvec(p)
            pap = float(p @ ap)
            if pap <= 0.0:
                raise SolverError("cg breakdown: matrix is not positive definite")
            alpha = rz / pap
            x += alpha * p
            r -= alpha * ap
            iters += 1
            if np.linalg.norm(r) <= tol * backward_scale(x):
                break
            z = minv * r if jacobi else r
            rz_next = float(r @ z)
            p = z + (rz_next / rz) * p
            rz = rz_next
        rel = np.linalg.norm(b - a.matvec(x)) / backward_scale(x)
        if rel <= tol or iters >= max_iter:
            return x, SolveReport(iters, rel, rel <= tol, "cg")
    return x, SolveReport(iters, rel, rel <= tol, "cg")


DENSE_FALLBACK_MAX = 2000


def _dense_solve(a: SparseMatrix, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(a.toarray(), b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"dense fallback failed: {exc}") from exc


def solve_general(
    a: SparseMatrix,
    b: np.ndarray,
    tol: float = 1e-10,
    max_iter: int | None = None,
    restart: int = 200,
    jacobi: bool = False,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Restarted GMRES for a general square matrix.

    Uses the same backward error stopping rule as solve_spd. Falls back to a
    dense LU solve when the Krylov iteration stalls and the system is small
    (n <= 2000).
    """
    n = a.nrows
    if a.ncols != n:
        raise ValueError("solve_general needs a square matrix")
    b = np.asarray(b, dtype=float)
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, "gmres")
    if max_iter is None:
        max_iter = 10 * n
    minv = _jacobi_inverse(a) if jacobi else None
    norm_a = _inf_norm(a)

    def backward_error(vec: np.ndarray) -> float:
        scale = norm_b + norm_a * np.linalg.norm(vec)
        return np.linalg.norm(b - a.matvec(vec)) / scale

    def precond(v):
        return minv * v if jacobi else v

    pb = precond(b)
    norm_pb = np.linalg.norm(pb)
    m = min(restart, n)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    total = 0
    prev_cycle_res = None
    while total < max_iter:
        r = precond(b - a.matvec(x))
        beta = np.linalg.norm(r)
        if beta <= tol * norm_pb:
            break
        if prev_cycle_res is not None and beta > 0.9 * prev_cycle_res:
            # stalled across a restart cycle
            rel = backward_error(x)
            if rel <= tol:
                return x, SolveReport(total, rel, True, "gmres")
            if n <= DENSE_FALLBACK_MAX:
                x = _dense_solve(a, b)
                rel = backward_error(x)
                return x, SolveReport(total, rel, rel <= tol, "gmres+dense")
            return x, SolveReport(total, rel, False, "gmres")
        prev_cycle_res = beta
        q = np.zeros((m + 1, n))
        h = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        q[0] = r / beta
        k_used = 0
        for k in range(m):
            if total >= max_iter:
                break
            w = precond(a.matvec(q[k]))
            for i in range(k + 1):
                h[i, k] = float(w @ q[i])
                w -= h[i, k] * q[i]
            h[k + 1, k] = np.linalg.norm(w)
            total += 1
            breakdown = h[k + 1, k] <= 1e-300 * max(1.0, abs(h[k, k]))
            if not breakdown:
                q[k + 1] = w / h[k + 1, k]
            for i in range(k):
                tmp = cs[i] * h[i, k] + sn[i] * h[i + 1, k]
                h[i + 1, k] = -sn[i] * h[i, k] + cs[i] * h[i + 1, k]
                h[i, k] = tmp
            denom = np.hypot(h[k, k], h[k + 1, k])
            if denom <= 1e-300:
                k_used = k
                break
            cs[k] = h[k, k] / denom
            sn[k] = h[k + 1, k] / denom
            h[k, k] = denom
            h[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            k_used = k + 1
            if abs(g[k + 1]) <= tol * norm_pb or breakdown:
                break
        if k_used > 0:
            y = np.zeros(k_used)
            for i in range(k_used - 1, -1, -1):
                y[i] = (g[i] - h[i, i + 1:k_used] @ y[i + 1:]) / h[i, i]
            x = x + q[:k_used].T @ y
        else:
            break
    rel = backward_error(x)
    if rel > tol and n <= DENSE_FALLBACK_MAX:
        x = _dense_solve(a, b)
        rel = backward_error(x)
        return x, SolveReport(total, rel, rel <= tol, "gmres+dense")
    return x, SolveReport(total, rel, rel <= tol, "gmres")
