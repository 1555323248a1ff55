"""Built-in invariant checks for the `check` CLI subcommand.

Fast structural properties that should hold on any build; the full oracle
suite lives in the test tree.
"""
from __future__ import annotations

import numpy as np

from .config import MeshSpec
from .fem import (
    apply_blockwise,
    build_matrices,
    discrete_gradient,
    interpolate_edge,
    quadratic_form,
)
from .llg import normalize_update, tangent_frame
from .simulator import build_mesh


def run_invariant_suite(verbose: bool = False, seed: int = 2024) -> list[str]:
    """Run all checks; returns the list of failed check names."""
    rng = np.random.default_rng(seed)
    spec = MeshSpec(
        omega_box=(0.0, 0.4, 0.0, 0.4, 0.0, 0.2),
        cell=(0.2, 0.2, 0.1),
        pad_x=0.2,
        pad_y=0.2,
        pad_z_lo=0.1,
        pad_z_hi=0.1,
        layers=1,
    )
    mesh = build_mesh(spec)
    mats = build_matrices(mesh)
    failures: list[str] = []

    def check(name: str, ok: bool, detail: str = ""):
        if verbose:
            suffix = f" ({detail})" if detail and not ok else ""
            print(f"{'PASS' if ok else 'FAIL'}: {name}{suffix}")
        if not ok:
            failures.append(name)

    ones = np.ones(mats.mass.nrows)
    vol = float(ones @ mats.mass.matvec(ones))
    check(
        "nodal mass partition of unity",
        abs(vol - mats.omega_volume) <= 1e-12 * max(1.0, mats.omega_volume),
        f"sum {vol} vs volume {mats.omega_volume}",
    )

    rows = np.abs(mats.stiffness.matvec(ones))
    check("stiffness annihilates constants", rows.max() <= 1e-12)

    h = interpolate_edge(np.array([1.0, 0.0, 0.0]), mesh)
    l2 = quadratic_form(mats.edge_mass, h)
    check(
        "edge interpolation reproduces constants",
        abs(l2 - mats.domain_volume) <= 1e-12 * max(1.0, mats.domain_volume),
        f"{l2} vs {mats.domain_volume}",
    )
    check("constant field is curl-free", quadratic_form(mats.curl_curl, h) <= 1e-12)

    worst = 0.0
    for _ in range(10):
        s = rng.standard_normal(mesh.node_count)
        g = discrete_gradient(s, mesh)
        cg = np.abs(mats.curl_curl.matvec(g)).max()
        worst = max(worst, cg)
    scale = np.abs(mats.curl_curl.data).max()
    check("discrete gradients are curl-free", worst <= 1e-13 * scale * mesh.node_count,
          f"max residual {worst:.3e}")

    worst = 0.0
    for _ in range(10):
        m = rng.standard_normal((mats.mass.nrows, 3))
        m /= np.linalg.norm(m, axis=1, keepdims=True)
        s = mats.cross_term(m)
        x = rng.standard_normal(s.nrows)
        worst = max(worst, abs(float(x @ s.matvec(x))))
    check("cross term is skew", worst <= 1e-12 * mats.omega_volume * s.nrows,
          f"max x^T S x = {worst:.3e}")

    m = rng.standard_normal((mats.mass.nrows, 3))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    frame = tangent_frame(m)
    dev = max(
        np.abs((frame.t1 * m).sum(axis=1)).max(),
        np.abs((frame.t2 * m).sum(axis=1)).max(),
        np.abs((frame.t1 * frame.t2).sum(axis=1)).max(),
        np.abs(np.linalg.norm(frame.t1, axis=1) - 1).max(),
        np.abs(np.linalg.norm(frame.t2, axis=1) - 1).max(),
    )
    check("tangent frames orthonormal", dev <= 1e-12, f"max deviation {dev:.3e}")

    v = rng.standard_normal((mats.mass.nrows, 3))
    v -= (v * m).sum(axis=1, keepdims=True) * m
    m_next = normalize_update(m, v, 0.05)
    dev = np.abs(np.linalg.norm(m_next, axis=1) - 1).max()
    check("normalized update has unit nodes", dev <= 1e-14, f"max deviation {dev:.3e}")

    mvec = apply_blockwise(mats.mass, v)
    check(
        "mass application finite",
        bool(np.isfinite(mvec).all()),
    )
    return failures
