"""Setups and runners for the four reference problems.

``pure-bending``
    Right half of a pre-tensioned strip under axial force and in-plane
    moment, applied as edge tractions.  The loaded element column is plain
    St. Venant-Kirchhoff.
``corner-load``
    Square sheet pulled by two diagonal pairs of corner forces.
``airbag``
    Quarter of a square cushion inflated by follower pressure.
``blanket``
    Square sheet hanging from its corners under self-weight.

Flat membranes carrying out-of-plane load have no initial transverse
stiffness.  The airbag and blanket therefore start with dead, outward edge
tractions that are held for a fraction of the steps and then ramped to zero
before the last step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..assembly import (
    LoadCase,
    Model,
    edge_load_vector,
    gravity_load_vector,
    point_load_vector,
)
from ..errors import ConfigError
from ..kinematics import Patch, rectangle_patch
from ..material import ElasticParams, WrinkleState
from ..solver import SolverConfig, SolveTrace, newton_step_solve
from .post import FieldRecord, Probe, field_records, probe_displacement, probe_stress

__all__ = [
    "BENCHMARKS",
    "BenchmarkSpec",
    "RunReport",
    "default_spec",
    "mesh_rect",
    "build_model",
    "run_benchmark",
    "run_pure_bending",
    "run_corner_load",
    "run_airbag",
    "run_blanket",
    "stretch_ramp",
    "measured_band_height",
]

log = logging.getLogger(__name__)

BENCHMARKS = ("pure-bending", "corner-load", "airbag", "blanket")


def mesh_rect(nx, ny, p, dimensions, thickness=1.0, origin=(0.0, 0.0)) -> Patch:
    """Structured flat patch of ``nx x ny`` elements of degree ``p``."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigError(f"mesh divisions must be positive integers, got {nx}x{ny}")
    if p not in (1, 2, 3):
        raise ConfigError(f"degree must be 1, 2 or 3, got {p}")
    width, height = dimensions
    if not (width > 0 and height > 0):
        raise ConfigError("mesh dimensions must be positive")
    return rectangle_patch(int(nx), int(ny), int(p), width, height, thickness, origin)


_DEFAULTS = {
    "pure-bending": dict(
        mesh=(11, 5),
        degree=2,
        material=dict(E_mod=1.0e8, nu=0.0, eta=0.0),
        geometry=dict(height=1.0, width=2.2, thickness=1.0e-4),
        loads=dict(sigma0=1.0e3, ratio=2.0 / 3.0, transverse_prestress=True),
        steps=5,
    ),
    "corner-load": dict(
        mesh=(40, 40),
        degree=3,
        material=dict(E_mod=3.5e9, nu=0.31, eta=0.0),
        geometry=dict(length=0.5, thickness=25e-6),
        loads=dict(T1=20.0, T2=5.0),
        steps=10,
    ),
    "airbag": dict(
        mesh=(8, 8),
        degree=2,
        material=dict(E_mod=588e6, nu=0.4, eta=0.0),
        geometry=dict(diagonal=1.2, thickness=0.6e-3),
        loads=dict(pressure=5000.0),
        stabilization=dict(fraction=0.01, hold=0.2),
        steps=20,
    ),
    "blanket": dict(
        mesh=(25, 25),
        degree=2,
        material=dict(E_mod=30000.0, nu=0.0, eta=0.0),
        geometry=dict(length=1.0, thickness=1.177e-3),
        loads=dict(density=0.144, gravity=9.81, spring_stiffness=22950.0),
        stabilization=dict(fraction=0.01, hold=0.2),
        steps=20,
    ),
}


@dataclass(frozen=True)
class BenchmarkSpec:
    """Complete description of one benchmark run (SI units)."""

    benchmark: str
    mesh: tuple
    degree: int
    params: ElasticParams
    geometry: dict
    loads: dict
    solver: SolverConfig = SolverConfig()
    stabilization: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ConfigError(f"unknown benchmark {self.benchmark!r}; choose from {BENCHMARKS}")
        nx, ny = self.mesh
        if nx < 1 or ny < 1:
            raise ConfigError("mesh divisions must be positive")
        if self.degree not in (1, 2, 3):
            raise ConfigError(f"degree must be 1, 2 or 3, got {self.degree}")
        for key, value in self.geometry.items():
            if not value > 0:
                raise ConfigError(f"geometry.{key} must be positive, got {value}")
        if self.benchmark in ("airbag", "blanket"):
            if self.solver.n_steps < 2:
                raise ConfigError(f"{self.benchmark} needs at least two load steps")
            frac = self.stabilization.get("fraction", 0.0)
            hold = self.stabilization.get("hold", 0.0)
            if frac < 0 or not 0.0 <= hold < 1.0:
                raise ConfigError("stabilization needs fraction >= 0 and 0 <= hold < 1")

    def with_overrides(self, mesh=None, degree=None, eta=None, nu=None, steps=None,
                       tol=None, out=None, loads=None):
        params = self.params
        if eta is not None or nu is not None:
            params = ElasticParams(
                params.E_mod,
                params.nu if nu is None else nu,
                params.eta if eta is None else eta,
            )
        solver = self.solver
        if steps is not None:
            solver = replace(solver, n_steps=int(steps))
        if tol is not None:
            solver = replace(solver, tol_rel=float(tol))
        return replace(
            self,
            mesh=tuple(mesh) if mesh is not None else self.mesh,
            degree=int(degree) if degree is not None else self.degree,
            params=params,
            solver=solver,
            loads={**self.loads, **(loads or {})},
            output=out if out is not None else self.output,
        )


def default_spec(benchmark, **overrides) -> BenchmarkSpec:
    """Default setup of ``benchmark``; keyword overrides as in ``with_overrides``."""
    if benchmark not in _DEFAULTS:
        raise ConfigError(f"unknown benchmark {benchmark!r}; choose from {BENCHMARKS}")
    d = _DEFAULTS[benchmark]
    spec = BenchmarkSpec(
        benchmark=benchmark,
        mesh=d["mesh"],
        degree=d["degree"],
        params=ElasticParams(**d["material"]),
        geometry=dict(d["geometry"]),
        loads=dict(d["loads"]),
        solver=SolverConfig(n_steps=d["steps"]),
        stabilization=dict(d.get("stabilization", {})),
    )
    return spec.with_overrides(**overrides) if overrides else spec


@dataclass
class RunReport:
    """Converged state, probes, convergence trace and field table of a run."""

    spec: BenchmarkSpec
    u: np.ndarray
    probes: list
    trace: SolveTrace
    fields: FieldRecord
    model: Model | None = None
    extra: dict = field(default_factory=dict)

    def probe(self, name) -> Probe:
        for p in self.probes:
            if p.name == name:
                return p
        raise KeyError(name)


def stretch_ramp(n_steps, hold):
    """Stabilizing-load factors: 1 for the first ``hold`` fraction of steps,
    then linearly down to 0, reached one step before the end at the latest."""
    n_hold = max(1, int(round(hold * n_steps)))
    n_hold = min(n_hold, n_steps - 1)
    n_down = n_steps - n_hold
    return [1.0 if s < n_hold else max(0.0, 1.0 - (s - n_hold + 1) / n_down) for s in range(n_steps)]


def _ramp_from_zero(n_steps):
    return [s / (n_steps - 1) for s in range(n_steps)]


def _edge_stretch(patch, edges, line_load):
    out = np.zeros(patch.n_dof)
    normals = {"left": (-1, 0, 0), "right": (1, 0, 0), "bottom": (0, -1, 0), "top": (0, 1, 0)}
    for e in edges:
        out += edge_load_vector(patch, e, line_load * np.asarray(normals[e], dtype=float))
    return out


def build_model(spec: BenchmarkSpec):
    """Model plus named probe points for ``spec``."""
    return _BUILDERS[spec.benchmark](spec)


def _build_pure_bending(spec):
    g, ld = spec.geometry, spec.loads
    H, W, t = g["height"], g["width"], g["thickness"]
    nx, ny = spec.mesh
    s0, ratio = ld["sigma0"], ld["ratio"]
    if ratio < 0:
        raise ConfigError("bending ratio 2M/PH must be non-negative")
    patch = mesh_rect(nx, ny, spec.degree, (W, H), t)
    std = np.zeros(patch.n_elem, dtype=bool)
    std[nx - 1 :: nx] = True  # loaded column stays taut
    model = Model(patch, spec.params, standard_elements=std)
    model.fix(3 * np.arange(patch.n_cp) + 2)
    left = patch.edge_cps("left")
    model.fix_cps(left, 0)
    mid = left[np.argmin(np.abs(patch.control_points[left, 1] - 0.5 * H))]
    model.fix_cps(mid, 1)
    axial = edge_load_vector(patch, "right", np.array([t * s0, 0.0, 0.0]))
    if ld.get("transverse_prestress", True):
        axial = axial + _edge_stretch(patch, ("bottom", "top"), t * s0)
    # 2M/PH = ratio gives a linear edge stress 3 ratio s0 (2y/H - 1)
    moment = edge_load_vector(
        patch, "right", lambda X: np.array([t * s0 * 3.0 * ratio * (2.0 * X[1] / H - 1.0), 0.0, 0.0])
    )
    n = spec.solver.n_steps
    mramp = [0.0] + [s / (n - 1) for s in range(1, n)] if n > 1 else [1.0]
    model.loads = [
        LoadCase("axial", axial, ramp=[1.0] * n),
        LoadCase("moment", moment, ramp=mramp),
    ]
    return model, {}


def _build_corner_load(spec):
    g, ld = spec.geometry, spec.loads
    L, t = g["length"], g["thickness"]
    nx, ny = spec.mesh
    if nx != ny:
        raise ConfigError("corner-load needs a square mesh")
    patch = mesh_rect(nx, ny, spec.degree, (L, L), t, origin=(-L / 2, -L / 2))
    if (nx + spec.degree) % 2 == 0:
        raise ConfigError("corner-load needs a control point at the centre (nx + p odd)")
    model = Model(patch, spec.params)
    X = patch.control_points
    model.fix(3 * np.arange(patch.n_cp) + 2)
    centre = int(np.argmin(np.linalg.norm(X[:, :2], axis=1)))
    model.fix_cps(centre, [0, 1])
    top = patch.edge_cps("top")
    model.fix_cps(top[np.argmin(np.abs(X[top, 0]))], 0)
    r = 1.0 / np.sqrt(2.0)
    T1, T2 = ld["T1"], ld["T2"]
    c00, c10, c11, c01 = patch.corner_cps()
    F = (
        point_load_vector(patch, c11, [T1 * r, T1 * r, 0.0])
        + point_load_vector(patch, c00, [-T1 * r, -T1 * r, 0.0])
        + point_load_vector(patch, c10, [T2 * r, -T2 * r, 0.0])
        + point_load_vector(patch, c01, [-T2 * r, T2 * r, 0.0])
    )
    model.loads = [LoadCase("corner forces", F)]
    probes = {"C1": (L / 2, L / 2), "C2": (L / 2, -L / 2), "C3": (-L / 2, -L / 2), "C4": (-L / 2, L / 2)}
    return model, probes


def _build_airbag(spec):
    g, ld, stab = spec.geometry, spec.loads, spec.stabilization
    a = g["diagonal"] / (2.0 * np.sqrt(2.0))  # half side of the square
    nx, ny = spec.mesh
    patch = mesh_rect(nx, ny, spec.degree, (a, a), g["thickness"], origin=(-a, -a))
    model = Model(patch, spec.params)
    model.fix_cps(patch.edge_cps("right"), 0)  # x = 0 symmetry line
    model.fix_cps(patch.edge_cps("top"), 1)  # y = 0 symmetry line
    model.fix_cps(patch.edge_cps("left"), 2)
    model.fix_cps(patch.edge_cps("bottom"), 2)
    n = spec.solver.n_steps
    P = ld["pressure"]
    q = stab.get("fraction", 0.01) * P * a  # per edge: fraction * P * a^2
    model.loads = [
        LoadCase("pressure", pressure=P, ramp=_ramp_from_zero(n)),
    ]
    if q > 0:
        st = _edge_stretch(patch, ("left", "bottom"), q)
        model.loads.insert(0, LoadCase("stretch", st, ramp=stretch_ramp(n, stab.get("hold", 0.2))))
    probes = {"M": (0.0, 0.0), "A": (-a, -a), "B": (0.0, -a)}
    return model, probes


def _build_blanket(spec):
    g, ld, stab = spec.geometry, spec.loads, spec.stabilization
    L, t = g["length"], g["thickness"]
    nx, ny = spec.mesh
    patch = mesh_rect(nx, ny, spec.degree, (L, L), t, origin=(-L / 2, -L / 2))
    model = Model(patch, spec.params)
    k = ld["spring_stiffness"]
    for c in patch.corner_cps():
        model.fix(3 * c + 2)
        model.add_spring([3 * c, 3 * c + 1], k)
    n = spec.solver.n_steps
    rho, grav = ld["density"], ld["gravity"]
    model.loads = [
        LoadCase("self-weight", gravity_load_vector(patch, rho, grav), ramp=_ramp_from_zero(n)),
    ]
    q = stab.get("fraction", 0.01) * rho * grav * L  # per edge: fraction * weight
    if q > 0:
        st = _edge_stretch(patch, ("left", "right", "bottom", "top"), q)
        model.loads.insert(0, LoadCase("stretch", st, ramp=stretch_ramp(n, stab.get("hold", 0.2))))
    probes = {"M": (0.0, 0.0), "A": (L / 2, 0.0), "B": (L / 4, 0.0)}
    return model, probes


_BUILDERS = {
    "pure-bending": _build_pure_bending,
    "corner-load": _build_corner_load,
    "airbag": _build_airbag,
    "blanket": _build_blanket,
}

# (probe point, quantity) pairs reported per benchmark
_PROBE_QUANTITIES = {
    "pure-bending": [],
    "corner-load": [(c, q) for c in ("C1", "C2", "C3", "C4") for q in ("ux", "uy")],
    "airbag": [("M", "uz"), ("A", "uy"), ("B", "uy"), ("M", "sigma1")],
    "blanket": [("M", "uz"), ("A", "ux"), ("B", "ux"), ("M", "sigma1")],
}


def _solve(spec, callback=None):
    model, points = build_model(spec)
    trace = newton_step_solve(model, spec.solver, callback=callback)
    rec = field_records(model, trace.u)
    probes = []
    for name, qty in _PROBE_QUANTITIES[spec.benchmark]:
        pt = points[name]
        if qty.startswith("u"):
            comp = "xyz".index(qty[1])
            p = probe_displacement(model.patch, trace.u, name, pt, comp)
        else:
            p = probe_stress(rec, name, pt, qty)
        probes.append(Probe(f"{qty}_{name}", p.quantity, p.position, p.value, p.unit, p.distance))
    return RunReport(spec=spec, u=trace.u, probes=probes, trace=trace, fields=rec, model=model)


def measured_band_height(y, e2, n2x, strain_scale, rel_tol=1e-3):
    """Height of the compressed band from sampled ``(y, e2)`` pairs.

    A sample belongs to the band when its compressive principal strain
    exceeds ``rel_tol * strain_scale`` and points along x.  The edge is put
    midway between the highest band sample and the next sample above it.
    """
    y = np.asarray(y, dtype=float)
    band = (np.asarray(e2) < -rel_tol * strain_scale) & (np.abs(n2x) > np.sqrt(0.5))
    if not np.any(band):
        return 0.0
    top = y[band].max()
    above = y[y > top]
    if len(above) == 0:
        return float(top)
    return float(0.5 * (top + above.min()))


def run_pure_bending(spec: BenchmarkSpec, callback=None) -> RunReport:
    """Solve the strip-bending problem and extract the stress profile.

    The profile samples the quadrature points of the element column next to
    the symmetry edge and is stored in ``extra`` as ``y_over_H`` and
    ``sigma_x_over_sigma0``, with the measured band height ``band_height``
    (as a fraction of ``H``).
    """
    _require(spec, "pure-bending")
    rep = _solve(spec, callback)
    H = spec.geometry["height"]
    nx = spec.mesh[0]
    rec = rep.fields
    col = (rec.element % nx) == 0
    sub = rec.subset(col)
    order = np.argsort(sub.X[:, 1], kind="stable")
    sub = sub.subset(order)
    n2x = -sub.n1[:, 1]  # n2 is n1 turned by +90 degrees (up to sign)
    s0 = spec.loads["sigma0"]
    rep.extra.update(
        y_over_H=sub.X[:, 1] / H,
        sigma_x_over_sigma0=sub.sigma[:, 0, 0] / s0,
        band_height=measured_band_height(
            sub.X[:, 1] / H, sub.e2, n2x, s0 / spec.params.E_mod
        ),
        element_height=1.0 / spec.mesh[1],
    )
    return rep


def run_corner_load(spec: BenchmarkSpec, callback=None) -> RunReport:
    """Corner-loaded square; trajectories are ``fields.n1`` scaled by ``|e2|``."""
    _require(spec, "corner-load")
    rep = _solve(spec, callback)
    rec = rep.fields
    rep.extra["trajectory"] = rec.n1 * np.abs(np.minimum(rec.e2, 0.0))[:, None]
    return rep


def run_airbag(spec: BenchmarkSpec, callback=None) -> RunReport:
    _require(spec, "airbag")
    rep = _solve(spec, callback)
    rep.extra["stabilization"] = dict(spec.stabilization)
    return rep


def run_blanket(spec: BenchmarkSpec, callback=None) -> RunReport:
    _require(spec, "blanket")
    rep = _solve(spec, callback)
    rep.extra["stabilization"] = dict(spec.stabilization)
    wr = rep.fields.state == WrinkleState.WRINKLED
    rep.extra["wrinkled_fraction"] = float(np.mean(wr)) if len(wr) else 0.0
    return rep


_RUNNERS = {
    "pure-bending": run_pure_bending,
    "corner-load": run_corner_load,
    "airbag": run_airbag,
    "blanket": run_blanket,
}


def run_benchmark(spec: BenchmarkSpec, callback=None) -> RunReport:
    log.info("running %s on %dx%d, p=%d", spec.benchmark, *spec.mesh, spec.degree)
    return _RUNNERS[spec.benchmark](spec, callback)


def _require(spec, name):
    if spec.benchmark != name:
        raise ConfigError(f"expected a {name} setup, got {spec.benchmark!r}")
