"""Structured tetrahedral meshes for a magnetic box inside a conductor box.

The grid is a tensor product of strictly increasing coordinate lines; every
hex cell is split into six tetrahedra sharing the cell diagonal that runs
from the lexicographically smallest corner to the largest (Kuhn subdivision,
identical in every cell, so faces of neighboring cells match).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError
from .linalg import from_triplets

COORD_TOL = 1e-12

# the six axis orders of the path from cell corner (0,0,0) to (1,1,1)
_KUHN_PERMS = (
    ((0, 1, 2), 1),
    ((0, 2, 1), -1),
    ((1, 0, 2), -1),
    ((1, 2, 0), 1),
    ((2, 0, 1), 1),
    ((2, 1, 0), -1),
)

TET_EDGE_LOCAL = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]], dtype=np.int64)


@dataclass(frozen=True)
class BoxGrid:
    lines_x: np.ndarray
    lines_y: np.ndarray
    lines_z: np.ndarray
    omega_box: tuple[float, float, float, float, float, float]

    @property
    def node_count(self) -> int:
        return self.lines_x.size * self.lines_y.size * self.lines_z.size

    @property
    def cell_count(self) -> int:
        return (self.lines_x.size - 1) * (self.lines_y.size - 1) * (self.lines_z.size - 1)


def _check_lines(lines, name: str) -> np.ndarray:
    arr = np.asarray(lines, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise MeshError(f"{name}: need at least two coordinate lines")
    if not np.all(np.diff(arr) > 0):
        raise MeshError(f"{name}: coordinate lines must be strictly increasing")
    return arr


def _on_lines(value: float, lines: np.ndarray) -> bool:
    scale = max(1.0, np.abs(lines).max())
    return bool(np.any(np.abs(lines - value) <= COORD_TOL * scale))


def build_box_grid(lines_x, lines_y, lines_z, omega_box) -> BoxGrid:
    """Validate coordinate lines and the magnetic sub-box they must resolve."""
    lx = _check_lines(lines_x, "lines_x")
    ly = _check_lines(lines_y, "lines_y")
    lz = _check_lines(lines_z, "lines_z")
    box = tuple(float(v) for v in omega_box)
    if len(box) != 6:
        raise MeshError("omega_box must be (x0, x1, y0, y1, z0, z1)")
    x0, x1, y0, y1, z0, z1 = box
    if not (x0 < x1 and y0 < y1 and z0 < z1):
        raise MeshError("omega_box has empty extent")
    for val, lines, name in (
        (x0, lx, "x0"), (x1, lx, "x1"),
        (y0, ly, "y0"), (y1, ly, "y1"),
        (z0, lz, "z0"), (z1, lz, "z1"),
    ):
        if not _on_lines(val, lines):
            raise MeshError(f"omega_box corner {name}={val} does not lie on a grid line")
    return BoxGrid(lx, ly, lz, box)


def _graded_offsets(pad: float, layers: int) -> np.ndarray:
    """Cumulative offsets of `layers` geometrically growing increments (ratio 2)
    that sum to `pad`; the increment nearest the magnetic box is the smallest."""
    if pad < 0:
        raise MeshError("pad must be nonnegative")
    if layers < 1:
        raise MeshError("need at least one grading layer")
    d = pad / (2**layers - 1)
    return d * (2.0 ** np.arange(1, layers + 1) - 1.0)


def build_outer_grid(
    omega_grid: BoxGrid,
    pad_x: float,
    pad_y: float,
    pad_z_lo: float,
    pad_z_hi: float,
    layers: int,
) -> BoxGrid:
    """Extend a magnetic-box grid by graded outer layers on all sides.

    pad_x and pad_y are applied symmetrically; the z padding may differ
    below and above.
    """
    if min(pad_x, pad_y, pad_z_lo, pad_z_hi) <= 0:
        raise MeshError("outer padding must be positive on every side")

    def extend(lines, pad_lo, pad_hi):
        lo = lines[0] - _graded_offsets(pad_lo, layers)[::-1]
        hi = lines[-1] + _graded_offsets(pad_hi, layers)
        return np.concatenate([lo, lines, hi])

    return BoxGrid(
        extend(omega_grid.lines_x, pad_x, pad_x),
        extend(omega_grid.lines_y, pad_y, pad_y),
        extend(omega_grid.lines_z, pad_z_lo, pad_z_hi),
        omega_grid.omega_box,
    )


def extract_edges(tets: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique mesh edges as (lo, hi) node pairs, sorted lexicographically.

    Returns (edges (E,2), tet_edges (T,6), tet_edge_signs (T,6)); the sign is
    +1 when the local pair already runs from the smaller to the larger global
    node id.
    """
    a = tets[:, TET_EDGE_LOCAL[:, 0]]
    b = tets[:, TET_EDGE_LOCAL[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    signs = np.where(a < b, 1, -1).astype(np.int64)
    nmax = int(tets.max()) + 1
    key = lo.astype(np.int64) * nmax + hi.astype(np.int64)
    unique_keys, inverse = np.unique(key.ravel(), return_inverse=True)
    edges = np.stack([unique_keys // nmax, unique_keys % nmax], axis=1)
    tet_edges = inverse.reshape(key.shape).astype(np.int64)
    return edges, tet_edges, signs


@dataclass
class Mesh:
    nodes: np.ndarray           # (N,3)
    tets: np.ndarray            # (T,4), positively oriented
    edges: np.ndarray           # (E,2) global (lo,hi) pairs
    tet_edges: np.ndarray       # (T,6) edge index per local edge
    tet_edge_signs: np.ndarray  # (T,6) +-1
    omega_tets: np.ndarray      # tet indices covering the magnetic region
    omega_nodes: np.ndarray     # sorted node ids lying in the closed magnetic box
    node_to_omega: np.ndarray   # (N,) local index into omega_nodes, -1 outside
    omega_box: tuple | None
    h: float = field(init=False)

    def __post_init__(self):
        d = (
            self.nodes[self.tets][:, :, None, :] - self.nodes[self.tets][:, None, :, :]
        )
        self.h = float(np.sqrt((d * d).sum(axis=-1).max()))

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def tet_count(self) -> int:
        return self.tets.shape[0]

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]

    @property
    def omega_node_count(self) -> int:
        return self.omega_nodes.shape[0]

    @classmethod
    def from_arrays(cls, nodes, tets, omega_tets=None, omega_box=None) -> "Mesh":
        nodes = np.asarray(nodes, dtype=float)
        tets = np.asarray(tets, dtype=np.int64)
        vols = tet_volumes(nodes, tets)
        if np.any(vols <= 0):
            raise MeshError("tets must be positively oriented with nonzero volume")
        edges, tet_edges, signs = extract_edges(tets)
        if omega_tets is None:
            omega_tets = np.arange(tets.shape[0], dtype=np.int64)
        else:
            omega_tets = np.asarray(omega_tets, dtype=np.int64)
        omega_nodes = np.unique(tets[omega_tets]) if omega_tets.size else np.empty(0, np.int64)
        node_to_omega = np.full(nodes.shape[0], -1, dtype=np.int64)
        node_to_omega[omega_nodes] = np.arange(omega_nodes.size, dtype=np.int64)
        return cls(nodes, tets, edges, tet_edges, signs, omega_tets,
                   omega_nodes, node_to_omega, omega_box)


def tet_volumes(nodes: np.ndarray, tets: np.ndarray) -> np.ndarray:
    x = nodes[tets]
    d = x[:, 1:] - x[:, :1]
    return np.linalg.det(d) / 6.0


def tetrahedralize(grid: BoxGrid) -> Mesh:
    """Kuhn-subdivide every grid cell into six positively oriented tets."""
    lx, ly, lz = grid.lines_x, grid.lines_y, grid.lines_z
    nx, ny, nz = lx.size, ly.size, lz.size
    xs, ys, zs = np.meshgrid(lx, ly, lz, indexing="ij")
    nodes = np.stack([xs.ravel(), ys.ravel(), zs.ravel()], axis=1)

    def node_id(i, j, k):
        return (i * ny + j) * nz + k

    ci, cj, ck = np.meshgrid(
        np.arange(nx - 1), np.arange(ny - 1), np.arange(nz - 1), indexing="ij"
    )
    ci, cj, ck = ci.ravel(), cj.ravel(), ck.ravel()
    ncells = ci.size
    tets = np.empty((6 * ncells, 4), dtype=np.int64)
    for p, (perm, parity) in enumerate(_KUHN_PERMS):
        offs = np.zeros((4, 3), dtype=np.int64)
        for step in range(3):
            offs[step + 1] = offs[step]
            offs[step + 1, perm[step]] += 1
        verts = [node_id(ci + o[0], cj + o[1], ck + o[2]) for o in offs]
        if parity < 0:
            verts[1], verts[2] = verts[2], verts[1]
        tets[p::6] = np.stack(verts, axis=1)

    omega_tets = np.arange(tets.shape[0], dtype=np.int64)
    box = grid.omega_box
    if box is not None:
        x0, x1, y0, y1, z0, z1 = box
        bary = nodes[tets].mean(axis=1)
        scale = max(1.0, max(abs(v) for v in box))
        tol = COORD_TOL * scale
        inside = (
            (bary[:, 0] > x0 - tol) & (bary[:, 0] < x1 + tol)
            & (bary[:, 1] > y0 - tol) & (bary[:, 1] < y1 + tol)
            & (bary[:, 2] > z0 - tol) & (bary[:, 2] < z1 + tol)
        )
        omega_tets = np.flatnonzero(inside).astype(np.int64)
        if omega_tets.size == 0:
            raise MeshError("magnetic box contains no tets")
    return Mesh.from_arrays(nodes, tets, omega_tets, box)


@dataclass
class AngleAuditReport:
    worst_offdiag: float
    violating_pairs: int
    passed: bool
    scale: float

    def summary(self) -> str:
        status = "passed" if self.passed else "VIOLATED"
        return (
            f"angle condition {status}: worst off-diagonal stiffness entry "
            f"{self.worst_offdiag:.6g} ({self.violating_pairs} violating pairs)"
        )


def audit_angle_condition(mesh: Mesh, omega_only: bool = True) -> AngleAuditReport:
    """Report whether all off-diagonal P1 stiffness entries are nonpositive.

    This is a mesh-quality diagnostic only; nothing downstream enforces it.
    """
    tets = mesh.tets[mesh.omega_tets] if omega_only else mesh.tets
    if tets.size == 0:
        raise MeshError("no tets to audit")
    x = mesh.nodes[tets]
    d = x[:, 1:] - x[:, :1]
    vols = np.linalg.det(d) / 6.0
    dinv = np.linalg.inv(d)
    grads = np.empty((tets.shape[0], 4, 3))
    grads[:, 1:, :] = np.transpose(dinv, (0, 2, 1))
    grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
    ke = np.einsum("tad,tbd,t->tab", grads, grads, vols)
    n = mesh.node_count
    rows = np.broadcast_to(tets[:, :, None], ke.shape)
    cols = np.broadcast_to(tets[:, None, :], ke.shape)
    k = from_triplets(n, n, rows.ravel(), cols.ravel(), ke.ravel())
    r, c, v = k.triplets()
    off = r != c
    offvals = v[off]
    scale = float(np.abs(v).max()) if v.size else 0.0
    tol = 1e-14 * max(scale, 1.0)
    worst = float(offvals.max()) if offvals.size else 0.0
    # each unordered node pair appears twice in the symmetric pattern
    violating = int(np.count_nonzero(offvals > tol) // 2)
    return AngleAuditReport(worst, violating, worst <= tol, scale)
