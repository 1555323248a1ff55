"""Compare the numba and numpy kernel backends on preset-sized data.

Times the three hot kernels (CSR matvec, cross-term assembly, tangent-frame
reduction) on the mumag1 problem and checks that both implementations agree.

    python3 benchmarks/bench_backends.py [--repeat N]
"""
import argparse
import time

import numpy as np

from ellgsim.backends import HAVE_NUMBA, get_kernels
from ellgsim.config import preset_mumag1
from ellgsim.fem import QUAD_D3_POINTS, QUAD_D3_WEIGHTS
from ellgsim.linalg import from_triplets
from ellgsim.llg import tangent_frame
from ellgsim.simulator import build_setup


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def as_matrix(nrows, ncols, trip):
    return from_triplets(nrows, ncols, *trip)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions (best of)")
    args = ap.parse_args()

    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print("building the mumag1 setup ...")
    setup = build_setup(preset_mumag1())
    mesh, mats = setup.mesh, setup.mats
    a = setup.a_eddy
    rng = np.random.default_rng(7)

    n_omega = mesh.omega_node_count
    raw = rng.standard_normal((n_omega, 3))
    m = raw / np.linalg.norm(raw, axis=1)[:, None]
    frame = tangent_frame(m)
    x = rng.standard_normal(a.nrows)

    sel = mesh.omega_tets
    loc = mesh.node_to_omega[mesh.tets[sel]]
    vols = mats.geom.vols[sel]
    wts6 = 6.0 * QUAD_D3_WEIGHTS

    # a realistic reduction payload: the assembled cross term of this m
    cr, cc, cv = mats.cross_term(m).triplets()
    cr = cr.astype(np.int64)
    cc = cc.astype(np.int64)

    print(
        f"sizes: {n_omega} magnetic nodes, {mesh.tet_count} tets, "
        f"{mesh.edge_count} edges, eddy matrix {a.nrows} rows / {a.data.size} nonzeros, "
        f"reduction payload {cv.size} triplets"
    )

    backends = {name: get_kernels(name) for name in ("numpy", "numba")}

    cases = {
        "csr_matvec": lambda k: k.csr_matvec(a.indptr, a.indices, a.data, a.coo_rows, x),
        "cross_term_triplets": lambda k: k.cross_term_triplets(
            loc, vols, QUAD_D3_POINTS, wts6, m
        ),
        "reduce_frame_triplets": lambda k: k.reduce_frame_triplets(
            cr, cc, cv, frame.t1, frame.t2
        ),
    }

    # verify both backends compute the same operators before timing
    y = rng.standard_normal(3 * n_omega)
    z = rng.standard_normal(2 * n_omega)
    probes = {
        "csr_matvec": lambda out: np.asarray(out),
        "cross_term_triplets": lambda out: as_matrix(3 * n_omega, 3 * n_omega, out).matvec(y),
        "reduce_frame_triplets": lambda out: as_matrix(2 * n_omega, 2 * n_omega, out).matvec(z),
    }
    for name, call in cases.items():
        got = {b: probes[name](call(k)) for b, k in backends.items()}
        err = np.abs(got["numpy"] - got["numba"]).max()
        scale = np.abs(got["numpy"]).max() or 1.0
        if err > 1e-12 * scale:
            raise SystemExit(f"backend mismatch in {name}: max diff {err:.3e}")
        # first call above also served as the numba compilation warm-up

    print(f"\n{'kernel':<24}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_np = best_of(lambda: call(backends["numpy"]), args.repeat)
        t_nb = best_of(lambda: call(backends["numba"]), args.repeat)
        print(f"{name:<24}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
