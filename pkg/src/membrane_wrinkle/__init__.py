"""Geometrically nonlinear membrane analysis with a spectral wrinkling model."""

from .assembly import LoadCase, Model, assemble_external, assemble_internal
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GeometryError,
    MembraneError,
    SolverError,
)
from .kinematics import Patch, rectangle_patch
from .material import ElasticParams, WrinkleState, evaluate
from .solver import SolverConfig, SolveTrace, newton_step_solve

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "ElasticParams",
    "GeometryError",
    "LoadCase",
    "MembraneError",
    "Model",
    "Patch",
    "SolveTrace",
    "SolverConfig",
    "SolverError",
    "WrinkleState",
    "assemble_external",
    "assemble_internal",
    "evaluate",
    "newton_step_solve",
    "rectangle_patch",
]
