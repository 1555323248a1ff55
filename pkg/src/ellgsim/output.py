"""Plain-text outputs: the energy log (CSV) and legacy-VTK state snapshots."""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .fem import evaluate_edge_field
from .mesh import Mesh
from .simulator import TimeSeries

CSV_HEADER = (
    "t,exch,h_l2,h_curl,total,v_accum,dtH_accum,curl_accum,"
    "lhs_total,unit_violation_max,tangency_max"
)


def format_energy_csv(series: TimeSeries) -> str:
    """Energy log with a pinned column set; floats keep 17 significant digits."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in series.records:
        total = r.exch + r.h_l2 + r.h_curl
        row = (
            r.t, r.exch, r.h_l2, r.h_curl, total, r.v_accum, r.dtH_accum,
            r.curl_accum, r.lhs_total, r.unit_violation_max, r.tangency_max,
        )
        out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return out.getvalue()


def write_energy_csv(series: TimeSeries, path) -> None:
    Path(path).write_text(format_energy_csv(series))


def write_vtk_snapshot(mesh: Mesh, m: np.ndarray, h_coeffs: np.ndarray, path) -> None:
    """Legacy VTK ASCII unstructured grid with the magnetization as point data
    (zero outside the magnetic region) and the field evaluated per tet."""
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write("coupled eddy-current LLG state\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.node_count} double\n")
        for p in mesh.nodes:
            f.write(f"{p[0]:.12g} {p[1]:.12g} {p[2]:.12g}\n")
        f.write(f"CELLS {mesh.tet_count} {5 * mesh.tet_count}\n")
        for t in mesh.tets:
            f.write(f"4 {t[0]} {t[1]} {t[2]} {t[3]}\n")
        f.write(f"CELL_TYPES {mesh.tet_count}\n")
        for _ in range(mesh.tet_count):
            f.write("10\n")

        m_full = np.zeros((mesh.node_count, 3))
        m_full[mesh.omega_nodes] = m
        f.write(f"POINT_DATA {mesh.node_count}\n")
        f.write("VECTORS m double\n")
        for v in m_full:
            f.write(f"{v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")

        center = np.array([[0.25, 0.25, 0.25, 0.25]])
        h_cell = evaluate_edge_field(mesh, np.asarray(h_coeffs, dtype=float), center)[:, 0, :]
        f.write(f"CELL_DATA {mesh.tet_count}\n")
        f.write("VECTORS H double\n")
        for v in h_cell:
            f.write(f"{v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")


def write_vtk_mesh(mesh: Mesh, path) -> None:
    """Mesh-only dump: the magnetic region indicator as cell data."""
    indicator = np.zeros(mesh.tet_count)
    indicator[mesh.omega_tets] = 1.0
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write("mesh with magnetic-region indicator\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.node_count} double\n")
        for p in mesh.nodes:
            f.write(f"{p[0]:.12g} {p[1]:.12g} {p[2]:.12g}\n")
        f.write(f"CELLS {mesh.tet_count} {5 * mesh.tet_count}\n")
        for t in mesh.tets:
            f.write(f"4 {t[0]} {t[1]} {t[2]} {t[3]}\n")
        f.write(f"CELL_TYPES {mesh.tet_count}\n")
        for _ in range(mesh.tet_count):
            f.write("10\n")
        f.write(f"CELL_DATA {mesh.tet_count}\n")
        f.write("SCALARS magnetic double 1\n")
        f.write("LOOKUP_TABLE default\n")
        for v in indicator:
            f.write(f"{v:.1f}\n")
