"""Vectorized numpy implementations of the per-step hot kernels."""
from __future__ import annotations

import numpy as np


def csr_matvec(indptr, indices, data, coo_rows, x):
    n = indptr.shape[0] - 1
    if data.shape[0] == 0:
        return np.zeros(n)
    # bincount keeps empty rows correct, unlike reduceat
    return np.bincount(coo_rows, weights=data * x[indices], minlength=n)


def cross_term_triplets(tet_nodes, vols, qpoints, qweights6, mvals):
    """COO triplets of the bilinear form (m x u, w) over the given tets.

    tet_nodes: (T,4) node ids local to the magnetic region
    vols:      (T,) tet volumes
    qpoints:   (Q,4) barycentric quadrature points
    qweights6: (Q,) weights scaled so they sum to 1 (reference weight * 6)
    mvals:     (V,3) nodal values of m

    Row/col indices are in the interleaved 3V vector numbering (3*node + comp).
    """
    mq = np.einsum("qa,tac->tqc", qpoints, mvals[tet_nodes])
    # w[t,a,b,:] = vol_t * sum_q w_q lam_a lam_b m(x_q)
    w = np.einsum("q,qa,qb,tqk->tabk", qweights6, qpoints, qpoints, mq)
    w *= vols[:, None, None, None]
    T = tet_nodes.shape[0]
    vals = np.zeros((T, 4, 4, 3, 3))
    vals[..., 0, 1] = -w[..., 2]
    vals[..., 0, 2] = w[..., 1]
    vals[..., 1, 0] = w[..., 2]
    vals[..., 1, 2] = -w[..., 0]
    vals[..., 2, 0] = -w[..., 1]
    vals[..., 2, 1] = w[..., 0]
    comp = np.arange(3, dtype=np.int64)
    rows = (3 * tet_nodes[:, :, None, None, None] + comp[None, None, None, :, None])
    rows = np.broadcast_to(rows, vals.shape)
    cols = (3 * tet_nodes[:, None, :, None, None] + comp[None, None, None, None, :])
    cols = np.broadcast_to(cols, vals.shape)
    return rows.ravel(), cols.ravel(), vals.ravel()


def reduce_frame_triplets(rows, cols, vals, t1, t2):
    """Project 3V x 3V COO triplets onto per-node tangent frames (2V x 2V).

    Entry (3a+i, 3b+j, v) contributes v * ts[a,i] * tt[b,j] to (2a+s, 2b+t)
    for s,t in {0,1} with t0 = t1-frame row, t1 = t2-frame row.
    """
    a, i = rows // 3, rows % 3
    b, j = cols // 3, cols % 3
    fa = (t1[a, i], t2[a, i])
    fb = (t1[b, j], t2[b, j])
    out_rows = []
    out_cols = []
    out_vals = []
    for s in (0, 1):
        for t in (0, 1):
            out_rows.append(2 * a + s)
            out_cols.append(2 * b + t)
            out_vals.append(vals * (fa[s] * fb[t]))
    return (
        np.concatenate(out_rows),
        np.concatenate(out_cols),
        np.concatenate(out_vals),
    )
