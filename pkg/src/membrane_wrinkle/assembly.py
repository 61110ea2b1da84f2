"""Global residual and tangent assembly for a membrane patch.

Internal forces and stiffness use the total-Lagrangian form in the local
orthonormal frame: with ``f_i = F t_i`` and ``A_ai`` the derivative of shape
function ``a`` along ``t_i``,

``dE_ij/du_ak = (A_aj f_ik + A_ai f_jk) / 2``,

so that the element integrals reduce to dense tensor contractions which are
evaluated in vectorised chunks of elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .kinematics import Patch, basis_funs_ders, gauss_legendre
from .material import COINCIDENCE_TOL, ElasticParams, evaluate, standard_svk

__all__ = [
    "LoadCase",
    "Model",
    "InternalState",
    "assemble_internal",
    "assemble_external",
    "evaluate_points",
    "edge_load_vector",
    "surface_load_vector",
    "gravity_load_vector",
    "point_load_vector",
    "follower_pressure_vector",
]

_VOIGT = ((0, 0), (1, 1), (0, 1))
_CHUNK = 256


@dataclass
class LoadCase:
    """A load pattern and its per-step scale factors.

    ``dead`` is a precomputed configuration-independent force vector;
    ``pressure`` is the magnitude of a follower pressure acting along the
    current surface normal ``g1 x g2``.  ``ramp[s]`` scales the pattern in
    load step ``s``; ``None`` means a linear ramp ``(s + 1) / n_steps``.
    """

    name: str
    dead: np.ndarray | None = None
    pressure: float = 0.0
    ramp: Sequence[float] | None = None

    def factor(self, step, n_steps):
        if self.ramp is None:
            return (step + 1) / n_steps
        if len(self.ramp) < n_steps:
            raise ConfigError(
                f"load case {self.name!r}: ramp has {len(self.ramp)} entries "
                f"for {n_steps} steps"
            )
        value = float(self.ramp[step])
        if not np.isfinite(value):
            raise ConfigError(f"load case {self.name!r}: non-finite ramp factor")
        return value


@dataclass
class Model:
    """Patch, material, supports and loads of one membrane analysis."""

    patch: Patch
    params: ElasticParams
    standard_elements: np.ndarray | None = None
    constraints: dict = field(default_factory=dict)
    springs: dict = field(default_factory=dict)
    loads: list = field(default_factory=list)
    coincidence_tol: float = COINCIDENCE_TOL

    def __post_init__(self):
        ne = self.patch.n_elem
        if self.standard_elements is None:
            self.standard_elements = np.zeros(ne, dtype=bool)
        self.standard_elements = np.asarray(self.standard_elements, dtype=bool)
        if self.standard_elements.shape != (ne,):
            raise ConfigError("standard_elements must have one flag per element")
        self._sparsity = None

    @property
    def n_dof(self):
        return self.patch.n_dof

    def fix(self, dofs, value=0.0):
        """Prescribe ``value`` on the given DOFs; conflicting values raise."""
        for r in np.atleast_1d(dofs):
            r = int(r)
            if not 0 <= r < self.n_dof:
                raise ConfigError(f"constrained DOF {r} out of range")
            old = self.constraints.get(r)
            if old is not None and old != value:
                raise ConfigError(f"conflicting prescriptions on DOF {r}: {old} vs {value}")
            self.constraints[r] = float(value)

    def fix_cps(self, cps, directions, value=0.0):
        cps = np.atleast_1d(cps)
        for i in np.atleast_1d(directions):
            self.fix(3 * cps + int(i), value)

    def add_spring(self, dofs, stiffness):
        for r in np.atleast_1d(dofs):
            r = int(r)
            if not 0 <= r < self.n_dof:
                raise ConfigError(f"spring DOF {r} out of range")
            self.springs[r] = self.springs.get(r, 0.0) + float(stiffness)

    def sparsity(self):
        if self._sparsity is None:
            ed = self.patch.quadrature().edofs
            nd = ed.shape[1]
            rows = np.repeat(ed, nd, axis=1).ravel()
            cols = np.tile(ed, (1, nd)).ravel()
            self._sparsity = (rows, cols)
        return self._sparsity


@dataclass
class InternalState:
    """Per-quadrature-point results of an internal-force evaluation."""

    E: np.ndarray  # (ne, nq, 2, 2) local Green-Lagrange strain
    S: np.ndarray  # (ne, nq, 2, 2) PK2 stress
    f: np.ndarray  # (ne, nq, 2, 3) images of the local frame vectors
    psi: np.ndarray  # (ne, nq) stored energy density
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    state: np.ndarray
    n1: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    intensity: np.ndarray

    def energy(self, qd, thickness):
        return float(np.sum(self.psi * qd.dA) * thickness)


def _material(model: Model, E, std_mask, tangent):
    res = evaluate(E, model.params, tangent=tangent, coincidence_tol=model.coincidence_tol)
    S, C = res.S, res.C
    psi = res.psi
    psi_p, psi_m = res.psi_plus, res.psi_minus
    if np.any(std_mask):
        psi_s, S_s, C_s = standard_svk(E[std_mask], model.params)
        S = S.copy()
        S[std_mask] = S_s
        psi = psi.copy()
        psi[std_mask] = psi_s
        if tangent:
            C = C.copy()
            C[std_mask] = C_s
    return res, S, C, psi, psi_p, psi_m


def _kinematics(qd, u_cp, sl):
    # E from the displacement gradient h_i = F t_i - t_i: exact zero at u = 0
    h = np.einsum("eqli,elk->eqik", qd.A[sl], u_cp[qd.conn[sl]])
    t = qd.t[sl]
    th = np.einsum("eqik,eqjk->eqij", t, h)
    E = 0.5 * (th + np.swapaxes(th, -1, -2) + np.einsum("eqik,eqjk->eqij", h, h))
    return t + h, E


def _bmatrix(A, f):
    nc, nq, nloc = A.shape[:3]
    B = np.empty((nc, nq, 3, nloc, 3))
    B[:, :, 0] = A[..., 0, None] * f[:, :, None, 0, :]
    B[:, :, 1] = A[..., 1, None] * f[:, :, None, 1, :]
    B[:, :, 2] = A[..., 0, None] * f[:, :, None, 1, :] + A[..., 1, None] * f[:, :, None, 0, :]
    return B.reshape(nc, nq, 3, 3 * nloc)


def assemble_internal(model: Model, u, tangent=True, return_state=False):
    """Internal force vector and (optionally) the tangent stiffness.

    Springs are included: they add ``k u_r`` to the force and ``k`` to the
    diagonal.  Returns ``(F_int, K)`` or ``(F_int, K, state)``.
    """
    patch = model.patch
    qd = patch.quadrature()
    u = np.asarray(u, dtype=float)
    u_cp = u.reshape(-1, 3)
    ne, nq = qd.n_elem, qd.n_qp
    nd = qd.edofs.shape[1]
    t = patch.thickness
    std_q = np.repeat(model.standard_elements[:, None], nq, axis=1)

    Fe = np.empty((ne, nd))
    Ke = np.empty((ne, nd, nd)) if tangent else None
    keep = {} if return_state else None
    pieces = []
    for start in range(0, ne, _CHUNK):
        sl = slice(start, min(start + _CHUNK, ne))
        f, E = _kinematics(qd, u_cp, sl)
        res, S, C, psi, psi_p, psi_m = _material(model, E, std_q[sl], tangent)
        w = qd.dA[sl] * t
        A = qd.A[sl]
        B = _bmatrix(A, f)
        Sv = np.stack([S[..., 0, 0], S[..., 1, 1], S[..., 0, 1]], axis=-1)
        Fe[sl] = np.einsum("eq,eqI,eqIr->er", w, Sv, B)
        if tangent:
            Cv = np.empty(C.shape[:2] + (3, 3))
            for I, (i, j) in enumerate(_VOIGT):
                for J, (k, l) in enumerate(_VOIGT):
                    Cv[..., I, J] = C[..., i, j, k, l]
            WB = np.einsum("eq,eqIJ,eqJs->eqIs", w, Cv, B)
            Kmat = np.einsum("eqIr,eqIs->ers", B, WB)
            Kg = np.einsum("eq,eqij,eqli,eqmj->elm", w, S, A, A)
            nloc = A.shape[2]
            Kgeo = np.einsum("elm,ik->elimk", Kg, np.eye(3)).reshape(-1, 3 * nloc, 3 * nloc)
            Ke[sl] = Kmat + Kgeo
        if return_state:
            pieces.append((E, S, f, psi, psi_p, psi_m, res))

    F = np.zeros(model.n_dof)
    np.add.at(F, qd.edofs.ravel(), Fe.ravel())
    K = None
    if tangent:
        rows, cols = model.sparsity()
        K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(model.n_dof,) * 2).tocsr()
    if model.springs:
        idx = np.fromiter(model.springs.keys(), dtype=int)
        k = np.fromiter(model.springs.values(), dtype=float)
        F[idx] += k * u[idx]
        if tangent:
            K = K + sp.csr_matrix((k, (idx, idx)), shape=K.shape)
    if not return_state:
        return F, K
    cat = lambda i: np.concatenate([pc[i] for pc in pieces])  # noqa: E731
    results = [pc[6] for pc in pieces]
    state = InternalState(
        E=cat(0),
        S=cat(1),
        f=cat(2),
        psi=cat(3),
        psi_plus=cat(4),
        psi_minus=cat(5),
        state=np.concatenate([r.state for r in results]),
        n1=np.concatenate([r.spectral.n1 for r in results]),
        e1=np.concatenate([r.spectral.e1 for r in results]),
        e2=np.concatenate([r.spectral.e2 for r in results]),
        intensity=np.concatenate([r.intensity for r in results]),
    )
    return F, K, state


def evaluate_points(model: Model, u):
    """Per-quadrature-point strain, stress and state data (no assembly)."""
    return assemble_internal(model, u, tangent=False, return_state=True)[2]


def follower_pressure_vector(patch: Patch, u, pressure):
    """Nodal forces of a pressure acting on the current normal ``g1 x g2``."""
    qd = patch.quadrature()
    x_cp = patch.control_points + np.asarray(u, dtype=float).reshape(-1, 3)
    xe = x_cp[qd.conn]
    g = np.einsum("eqla,elk->eqak", qd.dN, xe)
    nvec = np.cross(g[:, :, 0], g[:, :, 1])
    wpar = qd.dA / qd.jacobian  # parametric area weight
    Fe = pressure * np.einsum("eq,eql,eqk->elk", wpar, qd.N, nvec)
    F = np.zeros(patch.n_dof)
    np.add.at(F, qd.edofs.ravel(), Fe.ravel())
    return F


def assemble_external(model: Model, u, step, n_steps):
    """External force vector at ``step``.

    Follower pressure is evaluated on the current configuration; its load
    stiffness is intentionally not returned.  Springs live in
    :func:`assemble_internal`.
    """
    F = np.zeros(model.n_dof)
    for lc in model.loads:
        s = lc.factor(step, n_steps)
        if s == 0.0:
            continue
        if lc.dead is not None:
            F += s * lc.dead
        if lc.pressure:
            F += follower_pressure_vector(model.patch, u, s * lc.pressure)
    return F


def surface_load_vector(patch: Patch, traction):
    """Dead surface traction (force per reference area), constant or ``f(X)``."""
    qd = patch.quadrature()
    if callable(traction):
        fq = np.apply_along_axis(traction, -1, qd.X)
    else:
        fq = np.broadcast_to(np.asarray(traction, dtype=float), qd.X.shape)
    Fe = np.einsum("eq,eql,eqk->elk", qd.dA, qd.N, fq)
    F = np.zeros(patch.n_dof)
    np.add.at(F, qd.edofs.ravel(), Fe.ravel())
    return F


def gravity_load_vector(patch: Patch, density, g=9.81, direction=(0.0, 0.0, -1.0)):
    """Self-weight of a membrane with surface density ``density``."""
    return surface_load_vector(patch, density * g * np.asarray(direction, dtype=float))


def point_load_vector(patch: Patch, cp, force):
    F = np.zeros(patch.n_dof)
    F[3 * int(cp) : 3 * int(cp) + 3] += np.asarray(force, dtype=float)
    return F


def edge_load_vector(patch: Patch, edge, traction: Callable | Sequence[float], n_gauss=None):
    """Dead line load (force per reference length) along a boundary edge.

    ``traction`` is a constant 3-vector or a callable of the reference
    position returning one.
    """
    p = patch.degree
    if edge in ("left", "right"):
        knots, spans = patch.knots_v, patch.spans_v
    elif edge in ("bottom", "top"):
        knots, spans = patch.knots_u, patch.spans_u
    else:
        raise ConfigError(f"unknown edge {edge!r}")
    cps = patch.edge_cps(edge)
    Xe = patch.control_points[cps]
    pts, wts = gauss_legendre(n_gauss or p + 2)
    F = np.zeros(patch.n_dof)
    for s in spans:
        a, b = knots[s], knots[s + 1]
        for xi, wi in zip(pts, wts):
            uu = a + 0.5 * (xi + 1.0) * (b - a)
            N, dN = basis_funs_ders(knots, p, s, uu)
            loc = cps[s - p : s + 1]
            X = N @ Xe[s - p : s + 1]
            dX = dN @ Xe[s - p : s + 1]
            tr = np.asarray(traction(X) if callable(traction) else traction, dtype=float)
            ds = np.linalg.norm(dX) * 0.5 * (b - a) * wi
            for la, cp in enumerate(loc):
                F[3 * cp : 3 * cp + 3] += N[la] * tr * ds
    return F
