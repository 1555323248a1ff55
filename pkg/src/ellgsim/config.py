"""Simulation configuration: typed specs, INI parsing, and presets.

All numbers are treated as dimensionless; the standard-problem preset keeps
its material constants (exchange constant, saturation magnetization) as
metadata without feeding them into the solver.
"""
from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

from .eddy import EddyParams
from .errors import ConfigError
from .llg import LlgParams

Vec3 = tuple[float, float, float]


@dataclass
class MeshSpec:
    omega_box: tuple[float, float, float, float, float, float]
    cell: Vec3
    pad_x: float = 0.0
    pad_y: float = 0.0
    pad_z_lo: float = 0.0
    pad_z_hi: float = 0.0
    layers: int = 0

    def __post_init__(self):
        if len(self.omega_box) != 6:
            raise ConfigError("mesh omega box needs six numbers: x0 x1 y0 y1 z0 z1")
        if len(self.cell) != 3 or min(self.cell) <= 0:
            raise ConfigError("mesh cell sizes must be three positive numbers")
        if self.layers < 0:
            raise ConfigError("mesh layers must be nonnegative")
        pads = (self.pad_x, self.pad_y, self.pad_z_lo, self.pad_z_hi)
        if self.layers == 0 and any(p != 0 for p in pads):
            raise ConfigError("outer pads need layers >= 1")
        if self.layers > 0 and min(pads) <= 0:
            raise ConfigError("layers >= 1 needs positive pads on every side")


@dataclass
class FieldSpec:
    ca: float = 0.0
    easy_axis: Vec3 = (1.0, 0.0, 0.0)
    h_ext: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.ca < 0:
            raise ConfigError("anisotropy constant must be nonnegative")
        if self.ca > 0 and all(v == 0 for v in self.easy_axis):
            raise ConfigError("easy axis must be nonzero when anisotropy is enabled")


@dataclass
class InitialSpec:
    m0: Vec3 = (1.0, 0.0, 0.0)
    h0_star: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        n = math.sqrt(sum(v * v for v in self.m0))
        if abs(n - 1.0) > 1e-10:
            raise ConfigError(f"initial magnetization must be a unit vector, |m0| = {n}")


@dataclass
class SolverSpec:
    tol: float = 1e-10
    jacobi: bool = False

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ConfigError(f"solver tolerance must lie in (0, 1), got {self.tol}")


@dataclass
class OutputSpec:
    out_dir: str = "ellg-out"
    vtk_every: int = 0

    def __post_init__(self):
        if self.vtk_every < 0:
            raise ConfigError("vtk_every must be nonnegative (0 disables snapshots)")


@dataclass
class SimConfig:
    mesh: MeshSpec
    llg: LlgParams
    eddy: EddyParams
    field: FieldSpec
    initial: InitialSpec
    dt: float
    t_end: float
    solver: SolverSpec = field(default_factory=SolverSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    metadata: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ConfigError("dt and t_end must be positive")
        if self.llg.k != self.dt or self.eddy.k != self.dt:
            raise ConfigError("solver time-steps must equal the configured dt")
        q = self.t_end / self.dt
        n = round(q)
        if n < 1 or abs(q - n) > 1e-9 * max(1.0, abs(q)):
            raise ConfigError(
                f"t_end must be an integer multiple of dt (t_end/dt = {q!r})"
            )

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)


def _parse_floats(text: str, n: int, what: str) -> tuple:
    parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from exc


_SCHEMA = {
    "mesh": {"omega", "cell", "pad_x", "pad_y", "pad_z_lo", "pad_z_hi", "layers"},
    "llg": {"alpha", "c_exch", "theta"},
    "eddy": {"mu0", "sigma"},
    "field": {"ca", "easy_axis", "h_ext"},
    "initial": {"m0", "h0_star"},
    "time": {"dt", "t_end"},
    "solver": {"tol", "jacobi"},
    "output": {"out_dir", "vtk_every"},
    "metadata": None,  # free-form float keys
}
_REQUIRED_SECTIONS = ("mesh", "llg", "eddy", "field", "initial", "time")


_REQUIRED = object()


class _Section:
    def __init__(self, parser, name: str):
        self.name = name
        self.raw = dict(parser[name]) if parser.has_section(name) else {}
        self.seen: set[str] = set()

    def get(self, key: str, conv, default=_REQUIRED):
        self.seen.add(key)
        if key not in self.raw:
            if default is _REQUIRED:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return default
        try:
            return conv(self.raw[key])
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"[{self.name}] {key}: {exc}") from exc

    def finish(self):
        extra = set(self.raw) - self.seen
        if extra:
            raise ConfigError(f"[{self.name}] has unknown keys: {sorted(extra)}")


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> SimConfig:
    """Parse an INI configuration; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(
        strict=True, inline_comment_prefixes=("#",), interpolation=None
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    unknown = set(parser.sections()) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for name in _REQUIRED_SECTIONS:
        if not parser.has_section(name):
            raise ConfigError(f"missing required config section [{name}]")

    s = _Section(parser, "mesh")
    mesh = MeshSpec(
        omega_box=_parse_floats(s.get("omega", str), 6, "[mesh] omega"),
        cell=_parse_floats(s.get("cell", str), 3, "[mesh] cell"),
        pad_x=s.get("pad_x", float, 0.0),
        pad_y=s.get("pad_y", float, 0.0),
        pad_z_lo=s.get("pad_z_lo", float, 0.0),
        pad_z_hi=s.get("pad_z_hi", float, 0.0),
        layers=s.get("layers", int, 0),
    )
    s.finish()

    t = _Section(parser, "time")
    dt = t.get("dt", float)
    t_end = t.get("t_end", float)
    t.finish()

    s = _Section(parser, "llg")
    llg = LlgParams(
        alpha=s.get("alpha", float),
        c_exch=s.get("c_exch", float),
        theta=s.get("theta", float),
        k=dt,
    )
    s.finish()

    s = _Section(parser, "eddy")
    eddy = EddyParams(mu0=s.get("mu0", float), sigma=s.get("sigma", float), k=dt)
    s.finish()

    s = _Section(parser, "field")
    fld = FieldSpec(
        ca=s.get("ca", float, 0.0),
        easy_axis=_parse_floats(s.get("easy_axis", str, "1, 0, 0"), 3, "[field] easy_axis"),
        h_ext=_parse_floats(s.get("h_ext", str, "0, 0, 0"), 3, "[field] h_ext"),
    )
    s.finish()

    s = _Section(parser, "initial")
    init = InitialSpec(
        m0=_parse_floats(s.get("m0", str, "1, 0, 0"), 3, "[initial] m0"),
        h0_star=_parse_floats(s.get("h0_star", str, "0, 0, 0"), 3, "[initial] h0_star"),
    )
    s.finish()

    s = _Section(parser, "solver")
    solver = SolverSpec(tol=s.get("tol", float, 1e-10), jacobi=s.get("jacobi", _parse_bool, False))
    s.finish()

    s = _Section(parser, "output")
    output = OutputSpec(
        out_dir=s.get("out_dir", str, "ellg-out"),
        vtk_every=s.get("vtk_every", int, 0),
    )
    s.finish()

    metadata: dict[str, float] = {}
    if parser.has_section("metadata"):
        for key, val in parser["metadata"].items():
            try:
                metadata[key] = float(val)
            except ValueError as exc:
                raise ConfigError(f"[metadata] {key}: {exc}") from exc

    return SimConfig(
        mesh=mesh,
        llg=llg,
        eddy=eddy,
        field=fld,
        initial=init,
        dt=dt,
        t_end=t_end,
        solver=solver,
        output=output,
        metadata=metadata,
    )


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: SimConfig) -> str:
    """Round-trippable INI text: parse_config(serialize_config(cfg)) == cfg."""
    out = io.StringIO()

    def section(name, pairs):
        out.write(f"[{name}]\n")
        for k, v in pairs:
            out.write(f"{k} = {_fmt(v)}\n")
        out.write("\n")

    section(
        "mesh",
        [
            ("omega", cfg.mesh.omega_box),
            ("cell", cfg.mesh.cell),
            ("pad_x", cfg.mesh.pad_x),
            ("pad_y", cfg.mesh.pad_y),
            ("pad_z_lo", cfg.mesh.pad_z_lo),
            ("pad_z_hi", cfg.mesh.pad_z_hi),
            ("layers", cfg.mesh.layers),
        ],
    )
    section(
        "llg",
        [("alpha", cfg.llg.alpha), ("c_exch", cfg.llg.c_exch), ("theta", cfg.llg.theta)],
    )
    section("eddy", [("mu0", cfg.eddy.mu0), ("sigma", cfg.eddy.sigma)])
    section(
        "field",
        [("ca", cfg.field.ca), ("easy_axis", cfg.field.easy_axis), ("h_ext", cfg.field.h_ext)],
    )
    section("initial", [("m0", cfg.initial.m0), ("h0_star", cfg.initial.h0_star)])
    section("time", [("dt", cfg.dt), ("t_end", cfg.t_end)])
    section("solver", [("tol", cfg.solver.tol), ("jacobi", cfg.solver.jacobi)])
    section("output", [("out_dir", cfg.output.out_dir), ("vtk_every", cfg.output.vtk_every)])
    if cfg.metadata:
        section("metadata", sorted(cfg.metadata.items()))
    return out.getvalue()


def preset_mumag1() -> SimConfig:
    """Thin-film standard problem: 2 x 1 x 0.02 magnetic box in a graded
    conductor box, damping 0.5, unit conductivity, exchange 5e2."""
    return SimConfig(
        mesh=MeshSpec(
            omega_box=(0.0, 2.0, 0.0, 1.0, 0.0, 0.02),
            cell=(0.1, 0.1, 0.02),
            pad_x=0.2,
            pad_y=0.2,
            pad_z_lo=0.04,
            pad_z_hi=0.04,
            layers=1,
        ),
        llg=LlgParams(alpha=0.5, c_exch=5e2, theta=1.0, k=0.01),
        eddy=EddyParams(mu0=1.25667e-6, sigma=1.0, k=0.01),
        field=FieldSpec(ca=0.0, easy_axis=(1.0, 0.0, 0.0), h_ext=(0.0, 0.0, 0.0)),
        initial=InitialSpec(m0=(1.0, 0.0, 0.0), h0_star=(0.0, 0.0, 0.0)),
        solver=SolverSpec(tol=1e-10, jacobi=True),
        dt=0.01,
        t_end=1.0,
        metadata={"exchange_constant": 1.3e-11, "saturation_magnetization": 8e5},
    )


PRESETS = {"mumag1": preset_mumag1}


def load_preset(name: str) -> SimConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
