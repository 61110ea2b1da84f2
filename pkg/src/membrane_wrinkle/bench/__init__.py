"""Reference problems, analytic solutions, postprocessing and the CLI."""

from .analytic import analytic_band_height, analytic_sigma_x, reference_table
from .benchmarks import (
    BENCHMARKS,
    BenchmarkSpec,
    RunReport,
    build_model,
    default_spec,
    mesh_rect,
    run_airbag,
    run_benchmark,
    run_blanket,
    run_corner_load,
    run_pure_bending,
)
from .post import FieldRecord, Probe, cauchy_and_principal, field_records

__all__ = [
    "BENCHMARKS",
    "BenchmarkSpec",
    "FieldRecord",
    "Probe",
    "RunReport",
    "analytic_band_height",
    "analytic_sigma_x",
    "build_model",
    "cauchy_and_principal",
    "default_spec",
    "field_records",
    "mesh_rect",
    "reference_table",
    "run_airbag",
    "run_benchmark",
    "run_blanket",
    "run_corner_load",
    "run_pure_bending",
]
