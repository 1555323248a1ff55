"""numba-jitted implementations of the per-step hot kernels.

Same contracts as kernels_numpy; see there for argument conventions.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _csr_matvec_impl(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    y = np.zeros(n)
    for row in range(n):
        acc = 0.0
        for k in range(indptr[row], indptr[row + 1]):
            acc += data[k] * x[indices[k]]
        y[row] = acc
    return y


def csr_matvec(indptr, indices, data, coo_rows, x):
    return _csr_matvec_impl(indptr, indices, data, x)


@njit(cache=True)
def _cross_term_impl(tet_nodes, vols, qpoints, qweights6, mvals):
    T = tet_nodes.shape[0]
    Q = qpoints.shape[0]
    nnz = T * 144
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    pos = 0
    for t in range(T):
        vol = vols[t]
        w = np.zeros((4, 4, 3))
        for q in range(Q):
            m0 = 0.0
            m1 = 0.0
            m2 = 0.0
            for d in range(4):
                lam = qpoints[q, d]
                node = tet_nodes[t, d]
                m0 += lam * mvals[node, 0]
                m1 += lam * mvals[node, 1]
                m2 += lam * mvals[node, 2]
            for a in range(4):
                for b in range(4):
                    c = vol * qweights6[q] * qpoints[q, a] * qpoints[q, b]
                    w[a, b, 0] += c * m0
                    w[a, b, 1] += c * m1
                    w[a, b, 2] += c * m2
        for a in range(4):
            na = 3 * tet_nodes[t, a]
            for b in range(4):
                nb = 3 * tet_nodes[t, b]
                w0 = w[a, b, 0]
                w1 = w[a, b, 1]
                w2 = w[a, b, 2]
                # skew(w): rows (0,-w2,w1), (w2,0,-w0), (-w1,w0,0)
                entries = ((0, 1, -w2), (0, 2, w1), (1, 0, w2),
                           (1, 2, -w0), (2, 0, -w1), (2, 1, w0),
                           (0, 0, 0.0), (1, 1, 0.0), (2, 2, 0.0))
                for r, c_, v in entries:
                    rows[pos] = na + r
                    cols[pos] = nb + c_
                    vals[pos] = v
                    pos += 1
    return rows, cols, vals


def cross_term_triplets(tet_nodes, vols, qpoints, qweights6, mvals):
    return _cross_term_impl(tet_nodes, vols, qpoints, qweights6, mvals)


@njit(cache=True)
def _reduce_frame_impl(rows, cols, vals, t1, t2):
    nnz = rows.shape[0]
    out_rows = np.empty(4 * nnz, dtype=np.int64)
    out_cols = np.empty(4 * nnz, dtype=np.int64)
    out_vals = np.empty(4 * nnz)
    for k in range(nnz):
        a = rows[k] // 3
        i = rows[k] % 3
        b = cols[k] // 3
        j = cols[k] % 3
        v = vals[k]
        fa0 = t1[a, i]
        fa1 = t2[a, i]
        fb0 = t1[b, j]
        fb1 = t2[b, j]
        base = 4 * k
        out_rows[base] = 2 * a
        out_cols[base] = 2 * b
        out_vals[base] = v * fa0 * fb0
        out_rows[base + 1] = 2 * a
        out_cols[base + 1] = 2 * b + 1
        out_vals[base + 1] = v * fa0 * fb1
        out_rows[base + 2] = 2 * a + 1
        out_cols[base + 2] = 2 * b
        out_vals[base + 2] = v * fa1 * fb0
        out_rows[base + 3] = 2 * a + 1
        out_cols[base + 3] = 2 * b + 1
        out_vals[base + 3] = v * fa1 * fb1
    return out_rows, out_cols, out_vals


def reduce_frame_triplets(rows, cols, vals, t1, t2):
    return _reduce_frame_impl(rows, cols, vals, t1, t2)
