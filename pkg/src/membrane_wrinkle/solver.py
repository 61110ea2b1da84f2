"""Newton-Raphson load stepping with Dirichlet elimination."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import Model, assemble_external, assemble_internal
from .errors import ConfigError, ConvergenceError, SolverError
from .material import COINCIDENCE_TOL

__all__ = [
    "SolverConfig",
    "StepRecord",
    "SolveTrace",
    "ReducedSystem",
    "apply_constraints",
    "linear_solve",
    "newton_step_solve",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    n_steps: int = 1
    tol_rel: float = 1e-6
    max_iter: int = 100
    coincidence_tol: float = COINCIDENCE_TOL

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if not self.tol_rel > 0:
            raise ConfigError("tol_rel must be positive")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")


@dataclass
class StepRecord:
    step: int
    residuals: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        """Number of linear solves performed in this step."""
        return max(len(self.residuals) - 1, 0)


@dataclass
class SolveTrace:
    steps: list = field(default_factory=list)
    converged: bool = False
    u: np.ndarray | None = None

    def rows(self):
        for rec in self.steps:
            for it, r in enumerate(rec.residuals):
                yield rec.step, it, r


@dataclass
class ReducedSystem:
    K: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    values: np.ndarray

    def expand(self, x_free):
        n = len(self.free) + len(self.fixed)
        x = np.zeros(n)
        x[self.free] = x_free
        x[self.fixed] = self.values
        return x


def _normalise_constraints(constraints, n):
    if isinstance(constraints, dict):
        items = constraints.items()
    else:
        items = constraints
    out = {}
    for r, v in items:
        r = int(r)
        if not 0 <= r < n:
            raise ConfigError(f"constrained DOF {r} out of range")
        if r in out and out[r] != v:
            raise ConfigError(f"conflicting prescriptions on DOF {r}: {out[r]} vs {v}")
        out[r] = float(v)
    return out


def apply_constraints(K, rhs, constraints):
    """Eliminate prescribed DOFs from ``K x = rhs``.

    ``constraints`` maps DOF -> prescribed value (or is a sequence of pairs,
    in which case contradicting entries raise :class:`ConfigError`).  The
    prescribed values move to the right-hand side.
    """
    K = sp.csr_matrix(K)
    n = K.shape[0]
    cons = _normalise_constraints(constraints, n)
    fixed = np.array(sorted(cons), dtype=int)
    values = np.array([cons[r] for r in fixed], dtype=float)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    Kff = K[free][:, free]
    b = np.asarray(rhs, dtype=float)[free]
    if len(fixed):
        b = b - K[free][:, fixed] @ values
    return ReducedSystem(K=Kff, rhs=b, free=free, fixed=fixed, values=values)


def linear_solve(K, rhs):
    """Direct sparse solve of ``K x = rhs``.

    Rows of ``K`` that are identically zero and carry a zero right-hand side
    (unloaded DOFs without stiffness, e.g. out-of-plane DOFs of a flat
    membrane without stress) are decoupled and receive ``x = 0``.  A zero row
    with a nonzero right-hand side is a singular system.
    """
    K = sp.csr_matrix(K)
    rhs = np.asarray(rhs, dtype=float)
    n = K.shape[0]
    if n == 0:
        return np.zeros(0)
    row_nnz = np.diff(K.indptr)
    absrow = np.zeros(n)
    nz = row_nnz > 0
    if np.any(nz):
        absrow[nz] = np.maximum.reduceat(np.abs(K.data), K.indptr[:-1][nz])
    empty = absrow == 0.0
    if np.any(empty & (rhs != 0.0)):
        bad = np.flatnonzero(empty & (rhs != 0.0))[:5]
        raise SolverError(f"singular tangent: loaded DOFs {bad.tolist()} have no stiffness")
    x = np.zeros(n)
    act = np.flatnonzero(~empty)
    if len(act) == 0:
        return x
    Ka = K[act][:, act].tocsc()
    try:
        lu = spla.splu(Ka)
    except RuntimeError as exc:
        raise SolverError(f"factorisation failed: {exc}") from exc
    xa = lu.solve(rhs[act])
    if not np.all(np.isfinite(xa)):
        raise SolverError("factorisation produced non-finite values (singular tangent)")
    x[act] = xa
    return x


def _residual_norm(R_free, Fext_free):
    ref = np.linalg.norm(Fext_free)
    r = np.linalg.norm(R_free)
    if ref < 1e-12:
        return r
    return r / ref


def newton_step_solve(model: Model, cfg: SolverConfig, u0=None, callback=None) -> SolveTrace:
    """Incremental-iterative solution of ``F_int(u) = F_ext(u)``.

    Each load step iterates ``K du = -R`` until ``|R| / |F_ext| <= tol_rel``
    over the free DOFs (absolute norm while no load acts).  Raises
    :class:`ConvergenceError` carrying the trace if a step fails.
    """
    model.coincidence_tol = cfg.coincidence_tol
    n = model.n_dof
    u = np.zeros(n) if u0 is None else np.array(u0, dtype=float)
    cons = _normalise_constraints(model.constraints, n)
    fixed = np.array(sorted(cons), dtype=int)
    values = np.array([cons[r] for r in fixed], dtype=float)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    u[fixed] = values
    trace = SolveTrace()
    for step in range(cfg.n_steps):
        rec = StepRecord(step)
        trace.steps.append(rec)
        for it in range(cfg.max_iter + 1):
            F_int, K = assemble_internal(model, u)
            F_ext = assemble_external(model, u, step, cfg.n_steps)
            R = F_int - F_ext
            norm = _residual_norm(R[free], F_ext[free])
            rec.residuals.append(float(norm))
            log.debug("step %d iter %d residual %.3e", step, it, norm)
            if not np.isfinite(norm):
                trace.u = u
                raise ConvergenceError(
                    f"non-finite residual in step {step}", trace=trace, step=step, iteration=it
                )
            if norm <= cfg.tol_rel:
                rec.converged = True
                break
            if it == cfg.max_iter:
                break
            Kff = K[free][:, free]
            try:
                du = linear_solve(Kff, -R[free])
            except SolverError as exc:
                trace.u = u
                raise SolverError(f"step {step}, iteration {it}: {exc}", step, it) from exc
            u[free] += du
        if callback is not None:
            callback(step, u, rec)
        if not rec.converged:
            trace.u = u
            raise ConvergenceError(
                f"step {step} not converged after {cfg.max_iter} iterations "
                f"(residual {rec.residuals[-1]:.3e})",
                trace=trace,
                step=step,
                iteration=cfg.max_iter,
            )
    trace.converged = True
    trace.u = u
    return trace
