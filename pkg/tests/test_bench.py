import shutil
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from membrane_wrinkle.bench.analytic import analytic_band_height, analytic_sigma_x, reference_table
from membrane_wrinkle.bench.benchmarks import (
    BENCHMARKS,
    BenchmarkSpec,
    RunReport,
    build_model,
    default_spec,
    measured_band_height,
    mesh_rect,
    run_benchmark,
    stretch_ramp,
)
from membrane_wrinkle.bench.checks import check_report, profile_error
from membrane_wrinkle.bench.cli import main
from membrane_wrinkle.bench.config import load_config, parse_quantity, spec_from_dict
from membrane_wrinkle.bench.outputs import FIELD_COLUMNS, OutputError, write_outputs
from membrane_wrinkle.bench.post import FieldRecord, cauchy_and_principal, probe_stress
from membrane_wrinkle.bench.reference_data import AIRBAG_ETA_1E4, AIRBAG_MESH_STUDY, BLANKET
from membrane_wrinkle.errors import ConfigError, DomainError, GeometryError
from membrane_wrinkle.material import WrinkleState

# closed-form strip solution


@pytest.mark.parametrize("r, h", [(0.0, 0.0), (0.1, 0.0), (1 / 6, 0.0), (0.25, 0.25), (1 / 3, 0.5)])
def test_band_height(r, h):
    assert analytic_band_height(r) == pytest.approx(h, abs=1e-15)


@pytest.mark.parametrize("r", [0.5, 0.7, -0.1, np.inf])
def test_band_height_out_of_theory(r):
    with pytest.raises(DomainError):
        analytic_band_height(r)


def test_sigma_x_examples():
    assert analytic_sigma_x(1.0, 0.0) == pytest.approx(2.0)
    assert_allclose(analytic_sigma_x(np.linspace(0, 0.4, 5), 0.4), 0.0)
    assert analytic_sigma_x(np.nextafter(0.4, 1.0), 0.4) <= 1e-14
    with pytest.raises(DomainError):
        analytic_sigma_x(1.2, 0.0)
    with pytest.raises(DomainError):
        analytic_sigma_x(0.5, 1.0)


def test_sigma_x_carries_the_axial_force():
    # the taut profile integrates to sigma_0 * H for any band height
    y = np.linspace(0, 1, 20001)
    for h in (0.0, 0.25, 0.5):
        assert trapezoid(analytic_sigma_x(y, h), y) == pytest.approx(1.0, rel=1e-6)


def test_band_height_continuous_at_onset():
    r = 1 / 6
    assert abs(analytic_band_height(r) - analytic_band_height(np.nextafter(r, 0))) <= 1e-14


def test_reference_table():
    h, tab = reference_table(2 / 3, n=5)
    assert h == pytest.approx(0.5)
    assert_allclose(tab[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
    assert_allclose(tab[:, 1], [0, 0, 0, 2.0, 4.0])


# Cauchy conversion


def test_cauchy_zero():
    f = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    sigma, s1, s2 = cauchy_and_principal(f, np.zeros((2, 2)))
    assert not sigma.any() and s1 == 0 and s2 == 0


def test_cauchy_uniaxial():
    S11 = 3.5
    f = np.array([[1.1, 0, 0], [0, 1.0, 0]])
    sigma, s1, s2 = cauchy_and_principal(f, np.diag([S11, 0.0]))
    assert s1 == pytest.approx(1.1 * S11)
    assert s2 == pytest.approx(0.0, abs=1e-15)
    assert sigma[0, 0] == pytest.approx(1.1 * S11)


def test_cauchy_ordering_and_frame_independence():
    rng = np.random.default_rng(0)
    f = np.eye(2, 3) + 0.2 * rng.normal(size=(100, 2, 3))
    S = rng.normal(size=(100, 2, 2))
    S = S + np.swapaxes(S, 1, 2)
    sigma, s1, s2 = cauchy_and_principal(f, S)
    assert np.all(s1 >= s2)
    # the Cartesian tensor is tangent to the surface and shares the invariants
    n = np.cross(f[:, 0], f[:, 1])
    assert np.abs(np.einsum("kij,kj->ki", sigma, n)).max() <= 1e-12
    tr = np.trace(sigma, axis1=1, axis2=2)
    assert_allclose(s1 + s2, tr, atol=1e-12)
    det2 = 0.5 * (tr**2 - np.einsum("kij,kji->k", sigma, sigma))
    assert_allclose(s1 * s2, det2, atol=1e-11)


def test_cauchy_degenerate():
    with pytest.raises(GeometryError):
        cauchy_and_principal(np.array([[1.0, 0, 0], [2.0, 0, 0]]), np.eye(2))


def test_probe_stress_on_empty_table():
    with pytest.raises(DomainError):
        probe_stress(FieldRecord.empty(), "M", (0, 0))


# setups


@pytest.mark.parametrize(
    "nx, ny, p, n_cp", [(1, 1, 1, 4), (11, 5, 2, 91), (4, 3, 3, 42)]
)
def test_mesh_rect(nx, ny, p, n_cp):
    patch = mesh_rect(nx, ny, p, (2.0, 0.5))
    assert patch.n_cp == n_cp
    assert patch.quadrature().dA.sum() == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("args", [(0, 1, 1), (2, 2, 4), (1.5, 2, 2)])
def test_mesh_rect_invalid(args):
    with pytest.raises(ConfigError):
        mesh_rect(*args, (1.0, 1.0))


def test_stretch_ramp():
    r = stretch_ramp(10, 0.2)
    assert r[:2] == [1.0, 1.0]
    assert r[-1] == 0.0
    assert np.all(np.diff(r) <= 0)
    assert stretch_ramp(2, 0.9) == [1.0, 0.0]


def test_measured_band_height():
    y = np.linspace(0.05, 0.95, 10)
    e2 = np.where(y < 0.3, -1.0, 0.0)
    assert measured_band_height(y, e2, np.ones(10), 1.0) == pytest.approx(0.5 * (0.25 + 0.35))
    assert measured_band_height(y, np.zeros(10), np.ones(10), 1.0) == 0.0
    # compression along y does not count as an x-band
    assert measured_band_height(y, e2, np.zeros(10), 1.0) == 0.0


def test_default_specs_build():
    for b in BENCHMARKS:
        spec = default_spec(b, mesh=(4, 4) if b != "corner-load" else (6, 6))
        model, points = build_model(spec)
        assert model.n_dof == 3 * model.patch.n_cp
        assert model.constraints
        for pt in points.values():
            assert len(pt) == 2


def test_spec_validation():
    with pytest.raises(ConfigError):
        default_spec("airbag", steps=1)
    with pytest.raises(ConfigError):
        default_spec("nope")
    with pytest.raises(ConfigError):
        default_spec("airbag", degree=5)
    spec = default_spec("blanket")
    with pytest.raises(ConfigError):
        BenchmarkSpec("blanket", (4, 4), 2, spec.params, {"length": -1.0}, spec.loads)
    with pytest.raises(ConfigError):
        build_model(default_spec("corner-load", mesh=(5, 5)))  # no centre control point
    with pytest.raises(ConfigError):
        build_model(default_spec("pure-bending", loads={"ratio": -1.0}))


def test_with_overrides_keeps_original():
    a = default_spec("airbag")
    b = a.with_overrides(eta=1e-4, mesh=(16, 16), tol=1e-8)
    assert a.params.eta == 0.0 and a.mesh == (8, 8)
    assert b.params.eta == 1e-4 and b.mesh == (16, 16) and b.solver.tol_rel == 1e-8
    assert b.params.nu == a.params.nu


def test_reference_tables_are_consistent():
    assert AIRBAG_MESH_STUDY[8]["uz_M"] == 0.2172
    assert AIRBAG_ETA_1E4[2]["uz_M"] == 0.2164
    assert BLANKET[0.0]["uz_M"] == -0.28949
    assert BLANKET[0.3]["uz_M"] == -0.29531


# small runs


@pytest.fixture(scope="module")
def small_airbag(runs):
    return runs("airbag", mesh=(4, 4), steps=8)[0]


def test_small_airbag_report(small_airbag):
    rep = small_airbag
    assert rep.trace.converged
    assert [p.name for p in rep.probes] == ["uz_M", "uy_A", "uy_B", "sigma1_M"]
    assert rep.probe("uz_M").value > 0.1
    assert rep.probe("uy_B").value > 0  # edge midpoint pulled inwards
    with pytest.raises(KeyError):
        rep.probe("nothing")
    # state codes agree with the ordered principal strains
    f = rep.fields
    expected = np.where(f.e2 > 0, 0, np.where(f.e1 > 0, 1, 2))
    assert np.array_equal(f.state, expected)
    checks = check_report(rep)
    assert len(checks) == 2 and all(c.passed for c in checks)


def test_airbag_independent_of_stabilization_magnitude():
    # once the edge tractions are ramped out, only the pressure remains
    base = default_spec("airbag", mesh=(4, 4), steps=8, tol=1e-10)
    values = []
    for stab in (dict(fraction=0.01, hold=0.2), dict(fraction=0.02, hold=0.2), dict(fraction=0.01, hold=0.4)):
        rep = run_benchmark(replace(base, stabilization=stab))
        values.append([p.value for p in rep.probes])
    assert_allclose(values[1], values[0], rtol=1e-8)
    assert_allclose(values[2], values[0], rtol=1e-8)


def test_pure_bending_onset_has_no_band(runs):
    rep, _ = runs("pure-bending", loads={"ratio": 1 / 3})
    f = rep.fields
    H = rep.spec.geometry["height"]
    far = f.X[:, 1] > H / rep.spec.mesh[1]
    assert not np.any(f.state[far] == WrinkleState.WRINKLED)
    err, h = profile_error(rep)
    assert h == 0.0 and err <= 0.05


def test_pure_bending_poisson_deviates_slightly(runs):
    rep, _ = runs("pure-bending", nu=0.3)
    assert rep.trace.converged
    err, _ = profile_error(rep)
    assert 0.05 < err < 0.3


def test_pure_bending_moment_step_converges_quickly(runs):
    rep, _ = runs("pure-bending")
    # the first moment increment is the first step with a wrinkling band
    assert all(s.converged for s in rep.trace.steps)
    assert max(s.iterations for s in rep.trace.steps) <= 10


# configuration files


@pytest.mark.parametrize(
    "value, kind, si",
    [("588 MPa", "stress", 588e6), ("120 cm", "length", 1.2), ("25 um", "length", 25e-6),
     ("22.95 kN/m", "stiffness", 22950.0), (3, "force", 3.0), ("1e-3", "dimensionless", 1e-3),
     ("144 g/m2", "areal_density", 0.144)],
)
def test_parse_quantity(value, kind, si):
    assert parse_quantity(value, kind) == pytest.approx(si)


@pytest.mark.parametrize("value, kind", [("5 N", "length"), ("abc", "length"), (True, "force"), ([1], "force")])
def test_parse_quantity_errors(value, kind):
    with pytest.raises(ConfigError):
        parse_quantity(value, kind)


@pytest.mark.parametrize("name", ["pure_bending", "corner_load", "airbag", "blanket"])
def test_shipped_configs_match_defaults(configs, name):
    spec = load_config(configs / f"{name}.toml")
    ref = default_spec(spec.benchmark)
    assert spec.mesh == ref.mesh and spec.degree == ref.degree
    assert spec.params == ref.params
    for k, v in ref.geometry.items():
        assert spec.geometry[k] == pytest.approx(v)
    for k, v in ref.loads.items():
        assert spec.loads[k] == pytest.approx(v)


def _base():
    return {"schema": 1, "benchmark": "airbag"}


@pytest.mark.parametrize(
    "patch",
    [
        {"schema": 2},
        {"benchmark": "tent"},
        {"extra": 1},
        {"material": {"colour": "red"}},
        {"loads": {"T1": "5 N"}},
        {"mesh": {"divisions": [8]}},
        {"solver": {"speed": 1}},
        {"material": {"poisson_ratio": 0.6}},
        {"loads": "x"},
    ],
)
def test_config_errors(patch):
    with pytest.raises(ConfigError):
        spec_from_dict({**_base(), **patch})


def test_config_overrides_apply():
    spec = spec_from_dict({**_base(), "material": {"eta": 1e-4}, "mesh": {"divisions": [16, 16]},
                           "solver": {"steps": 10, "tol": 1e-8}, "output": {"dir": "x"}})
    assert spec.params.eta == 1e-4 and spec.mesh == (16, 16)
    assert spec.solver.n_steps == 10 and spec.solver.tol_rel == 1e-8
    assert spec.output == "x"


def test_load_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("schema = = 1\n")
    with pytest.raises(ConfigError):
        load_config(bad)


# outputs


def test_outputs_written_and_deterministic(small_airbag, tmp_path):
    a = write_outputs(small_airbag, tmp_path / "a")
    again = run_benchmark(small_airbag.spec)
    b = write_outputs(again, tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes(), key
    probes = a["probes"].read_text().splitlines()
    assert probes[0] == "name,x,y,z,value,unit"
    assert probes[1].startswith("uz_M,")
    assert len(probes) == 5
    fields = a["fields"].read_text().splitlines()
    assert fields[0] == FIELD_COLUMNS
    assert len(fields) == 1 + len(small_airbag.fields)
    assert len(fields[1].split(",")) == len(FIELD_COLUMNS.split(","))
    vtk = a["vtk"].read_text()
    for section in ("DATASET UNSTRUCTURED_GRID", "POINTS 25 double", "CELLS 16 80", "VECTORS displacement",
                    "SCALARS sigma1", "SCALARS state int", "SCALARS intensity"):
        assert section in vtk
    trace = a["trace"].read_text().splitlines()
    assert trace[0] == "step,iteration,residual"
    assert len(trace) == 1 + sum(len(s.residuals) for s in small_airbag.trace.steps)


def test_outputs_with_empty_tables(small_airbag, tmp_path):
    rep = RunReport(small_airbag.spec, small_airbag.u, [], small_airbag.trace, FieldRecord.empty(),
                    small_airbag.model)
    paths = write_outputs(rep, tmp_path)
    assert paths["probes"].read_text() == "name,x,y,z,value,unit\n"
    assert paths["fields"].read_text() == FIELD_COLUMNS + "\n"
    assert "CELL_DATA 16" in paths["vtk"].read_text()


def test_output_errors_name_the_path(small_airbag, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OutputError, match="file"):
        write_outputs(small_airbag, blocker / "sub")


# command line


def test_cli_reference(capsys):
    assert main(["reference", "pure-bending", "--ratio", "0.6666666666666666", "--points", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].endswith("h/H = 0.500000")
    assert out[1] == "y/H,sigma_x/sigma0"
    assert out[-1] == "1.000000,4.000000"


def test_cli_reference_out_of_theory(capsys):
    assert main(["reference", "pure-bending", "--ratio", "1"]) == 2
    assert "outside the theory" in capsys.readouterr().err


def test_cli_verify(capsys):
    assert main(["verify"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_cli_run_and_sweep(configs, tmp_path, capsys):
    cfg = configs / "airbag.toml"
    out = tmp_path / "run"
    assert main(["run", str(cfg), "--mesh", "3x3", "--steps", "6", "--out", str(out)]) == 0
    assert (out / "probes.csv").exists()
    small = tmp_path / "small.toml"
    small.write_text(cfg.read_text().replace("[8, 8]", "[3, 3]").replace("steps = 20", "steps = 6"))
    assert main(["sweep", str(small), "--param", "eta", "--values", "0", "1e-4", "--out", str(tmp_path / "sw")]) == 0
    text = capsys.readouterr().out
    assert "eta,uz_M,uy_A,uy_B,sigma1_M" in text
    assert (tmp_path / "sw" / "eta=1e-4" / "trace.csv").exists()


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('schema = 1\nbenchmark = "airbag"\n[material]\npoisson_ratio = 0.7\n')
    assert main(["run", str(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_failed_check_exit_code(configs, capsys):
    # a 3x2 strip mesh is too coarse for the stress profile tolerance
    assert main(["run", str(configs / "pure_bending.toml"), "--mesh", "3x2"]) == 1
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("membrane-wrinkle") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["membrane-wrinkle", "reference", "pure-bending", "--ratio", "0.5"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "h/H = 0.250000" in res.stdout


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "membrane_wrinkle", "--help"], capture_output=True, text=True,
                         check=False)
    assert res.returncode == 0
    assert "verify" in res.stdout
