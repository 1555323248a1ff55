"""Finite element time integrator for coupled eddy-current and
Landau-Lifshitz-Gilbert dynamics.

The solver advances magnetization on a ferromagnetic subdomain and the
magnetic field on a surrounding conductor with a decoupled scheme: each
step solves one linear tangent-space system for the magnetization update,
renormalizes nodewise, and then takes one implicit step for the field.
"""
from .backends import backend_name
from .config import (
    SimConfig,
    load_preset,
    parse_config,
    preset_mumag1,
    serialize_config,
)
from .errors import ConfigError, InvariantViolation, MeshError, SolverError
from .mesh import Mesh, audit_angle_condition, build_box_grid, tetrahedralize
from .simulator import EnergyRecord, SimSetup, TimeSeries, build_mesh, build_setup, run

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EnergyRecord",
    "InvariantViolation",
    "Mesh",
    "MeshError",
    "SimConfig",
    "SimSetup",
    "SolverError",
    "TimeSeries",
    "audit_angle_condition",
    "backend_name",
    "build_box_grid",
    "build_mesh",
    "build_setup",
    "load_preset",
    "parse_config",
    "preset_mumag1",
    "run",
    "serialize_config",
    "tetrahedralize",
    "__version__",
]
