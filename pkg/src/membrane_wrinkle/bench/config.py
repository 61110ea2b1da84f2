"""Benchmark configuration files (TOML, ``schema = 1``).

Example::

    schema = 1
    benchmark = "airbag"

    [mesh]
    divisions = [8, 8]
    degree = 2

    [material]
    youngs_modulus = "588 MPa"
    poisson_ratio = 0.4
    eta = 0.0

    [geometry]
    diagonal = "120 cm"
    thickness = "0.06 cm"

    [loads]
    pressure = "5000 Pa"

    [stabilization]
    fraction = 0.01
    hold = 0.2

    [solver]
    steps = 20
    tol = 1e-6
    max_iter = 100

    [output]
    dir = "out/airbag"

Dimensional values are plain numbers in SI units or strings with a unit
suffix.  Unspecified keys take the benchmark defaults.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

from ..errors import ConfigError
from ..material import ElasticParams
from ..solver import SolverConfig
from .benchmarks import BENCHMARKS, BenchmarkSpec, default_spec

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["SCHEMA_VERSION", "parse_quantity", "load_config", "spec_from_dict"]

SCHEMA_VERSION = 1

_UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6},
    "stress": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9, "N/m2": 1.0, "N/m^2": 1.0},
    "force": {"N": 1.0, "kN": 1e3},
    "stiffness": {"N/m": 1.0, "kN/m": 1e3},
    "areal_density": {"kg/m2": 1.0, "kg/m^2": 1.0, "g/m2": 1e-3, "g/m^2": 1e-3},
    "acceleration": {"m/s2": 1.0, "m/s^2": 1.0},
    "dimensionless": {},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")

_KINDS = {
    ("material", "youngs_modulus"): "stress",
    ("material", "poisson_ratio"): "dimensionless",
    ("material", "eta"): "dimensionless",
    ("geometry", "height"): "length",
    ("geometry", "width"): "length",
    ("geometry", "length"): "length",
    ("geometry", "diagonal"): "length",
    ("geometry", "thickness"): "length",
    ("loads", "sigma0"): "stress",
    ("loads", "ratio"): "dimensionless",
    ("loads", "transverse_prestress"): "flag",
    ("loads", "T1"): "force",
    ("loads", "T2"): "force",
    ("loads", "pressure"): "stress",
    ("loads", "density"): "areal_density",
    ("loads", "gravity"): "acceleration",
    ("loads", "spring_stiffness"): "stiffness",
    ("stabilization", "fraction"): "dimensionless",
    ("stabilization", "hold"): "dimensionless",
}

_SECTIONS = {"mesh", "material", "geometry", "loads", "stabilization", "solver", "output"}


def parse_quantity(value, kind):
    """Convert ``value`` (number or ``"<number> <unit>"``) to SI."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a {kind} value, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a number or quantity string, got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise ConfigError(f"cannot parse quantity {value!r}")
    number, unit = float(m.group(1)), m.group(2)
    if not unit:
        return number
    table = _UNITS[kind]
    if unit not in table:
        known = ", ".join(table) or "none"
        raise ConfigError(f"unit {unit!r} is not a {kind} unit (known: {known})")
    return number * table[unit]


def _section(data, name):
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def spec_from_dict(data, base_dir=None) -> BenchmarkSpec:
    if data.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported or missing schema version {data.get('schema')!r} (expected {SCHEMA_VERSION})")
    bench = data.get("benchmark")
    if bench not in BENCHMARKS:
        raise ConfigError(f"benchmark must be one of {BENCHMARKS}, got {bench!r}")
    unknown = set(data) - _SECTIONS - {"schema", "benchmark"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    spec = default_spec(bench)

    parsed = {}
    for sec in ("material", "geometry", "loads", "stabilization"):
        for key, raw in _section(data, sec).items():
            kind = _KINDS.get((sec, key))
            if kind is None:
                raise ConfigError(f"unknown key {sec}.{key}")
            if kind == "flag":
                if not isinstance(raw, bool):
                    raise ConfigError(f"{sec}.{key} must be true or false")
                parsed[(sec, key)] = raw
            else:
                parsed[(sec, key)] = parse_quantity(raw, kind)

    mat = spec.params
    params = ElasticParams(
        parsed.get(("material", "youngs_modulus"), mat.E_mod),
        parsed.get(("material", "poisson_ratio"), mat.nu),
        parsed.get(("material", "eta"), mat.eta),
    )
    pick = lambda sec, cur: {**cur, **{k: v for (s, k), v in parsed.items() if s == sec}}  # noqa: E731
    geometry = pick("geometry", spec.geometry)
    loads = pick("loads", spec.loads)
    stab = pick("stabilization", spec.stabilization)
    for key in geometry:
        if key not in spec.geometry:
            raise ConfigError(f"geometry.{key} does not apply to {bench}")
    for key in loads:
        if key not in spec.loads:
            raise ConfigError(f"loads.{key} does not apply to {bench}")

    mesh_sec = _section(data, "mesh")
    mesh = tuple(mesh_sec.get("divisions", spec.mesh))
    if len(mesh) != 2 or not all(isinstance(v, int) for v in mesh):
        raise ConfigError("mesh.divisions must be two integers")
    degree = mesh_sec.get("degree", spec.degree)

    solver_sec = _section(data, "solver")
    extra = set(solver_sec) - {"steps", "tol", "max_iter", "coincidence_tol"}
    if extra:
        raise ConfigError(f"unknown solver keys: {sorted(extra)}")
    solver = SolverConfig(
        n_steps=int(solver_sec.get("steps", spec.solver.n_steps)),
        tol_rel=float(solver_sec.get("tol", spec.solver.tol_rel)),
        max_iter=int(solver_sec.get("max_iter", spec.solver.max_iter)),
        coincidence_tol=float(solver_sec.get("coincidence_tol", spec.solver.coincidence_tol)),
    )

    out = _section(data, "output").get("dir")
    if out is not None and base_dir is not None and not Path(out).is_absolute():
        out = str(Path(base_dir) / out)

    return BenchmarkSpec(
        benchmark=bench,
        mesh=mesh,
        degree=int(degree),
        params=params,
        geometry=geometry,
        loads=loads,
        solver=solver,
        stabilization=stab,
        output=out,
    )


def load_config(path) -> BenchmarkSpec:
    """Read a configuration file.  Relative output paths are kept relative
    to the working directory."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return spec_from_dict(data)
