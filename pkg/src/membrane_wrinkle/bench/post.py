"""Postprocessing of converged states: Cauchy stresses, field tables, probes."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..assembly import Model, evaluate_points
from ..errors import DomainError, GeometryError
from ..kinematics import Patch, basis_eval
from ..tensor_spectral import spectral_decompose

__all__ = [
    "cauchy_and_principal",
    "FieldRecord",
    "field_records",
    "Probe",
    "displacement_at",
    "probe_displacement",
    "probe_stress",
]


def cauchy_and_principal(f, S):
    """In-plane Cauchy stress from the frame stretches and the PK2 stress.

    ``f[..., i, :] = F t_i`` are the images of the reference frame vectors
    and ``S`` the frame components of the PK2 stress.  Returns the Cauchy
    stress as a Cartesian 3x3 tensor (tangent to the current surface)
    together with the ordered principal values ``sigma1 >= sigma2``.
    """
    f = np.asarray(f, dtype=float)
    S = np.asarray(S, dtype=float)
    detF = np.linalg.norm(np.cross(f[..., 0, :], f[..., 1, :]), axis=-1)
    if np.any(~(detF > 0.0)):
        raise GeometryError("degenerate current configuration (zero area ratio)")
    c1 = f[..., 0, :] / np.linalg.norm(f[..., 0, :], axis=-1, keepdims=True)
    w = f[..., 1, :] - np.einsum("...k,...k->...", f[..., 1, :], c1)[..., None] * c1
    c2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
    c = np.stack([c1, c2], axis=-2)
    F = np.einsum("...ak,...ik->...ai", c, f)
    sig_loc = np.einsum("...ai,...ij,...bj->...ab", F, S, F) / detF[..., None, None]
    sp = spectral_decompose(sig_loc)
    sigma = np.einsum("...ik,...ij,...jl->...kl", f, S, f) / detF[..., None, None]
    return sigma, sp.e1, sp.e2


@dataclass
class FieldRecord:
    """Flat per-quadrature-point table of a converged state.

    Rows are ordered element by element, quadrature points in the patch
    order.  ``E``, ``S`` are frame components; ``sigma`` is Cartesian.
    """

    element: np.ndarray
    qp: np.ndarray
    X: np.ndarray
    x: np.ndarray
    E: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n1: np.ndarray
    state: np.ndarray
    intensity: np.ndarray
    S: np.ndarray
    sigma: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.element)

    @classmethod
    def empty(cls):
        z = lambda *s: np.zeros((0,) + s)  # noqa: E731
        return cls(
            element=np.zeros(0, int),
            qp=np.zeros(0, int),
            X=z(3),
            x=z(3),
            E=z(2, 2),
            e1=z(),
            e2=z(),
            n1=z(2),
            state=np.zeros(0, np.int8),
            intensity=z(),
            S=z(2, 2),
            sigma=z(3, 3),
            sigma1=z(),
            sigma2=z(),
            weight=z(),
        )

    def subset(self, mask):
        return FieldRecord(**{fl.name: getattr(self, fl.name)[mask] for fl in fields(self)})


def field_records(model: Model, u) -> FieldRecord:
    qd = model.patch.quadrature()
    st = evaluate_points(model, u)
    ne, nq = qd.n_elem, qd.n_qp
    U = np.asarray(u, dtype=float).reshape(-1, 3)
    xq = qd.X + np.einsum("eql,elk->eqk", qd.N, U[qd.conn])
    sigma, s1, s2 = cauchy_and_principal(st.f, st.S)
    flat = lambda a: a.reshape((ne * nq,) + a.shape[2:])  # noqa: E731
    return FieldRecord(
        element=np.repeat(np.arange(ne), nq),
        qp=np.tile(np.arange(nq), ne),
        X=flat(qd.X),
        x=flat(xq),
        E=flat(st.E),
        e1=flat(st.e1),
        e2=flat(st.e2),
        n1=flat(st.n1),
        state=flat(st.state),
        intensity=flat(st.intensity),
        S=flat(st.S),
        sigma=flat(sigma),
        sigma1=flat(s1),
        sigma2=flat(s2),
        weight=flat(qd.dA),
    )


@dataclass(frozen=True)
class Probe:
    name: str
    quantity: str
    position: tuple
    value: float
    unit: str
    distance: float = 0.0


def _parametric(patch: Patch, point):
    xs = patch.control_points[:, 0]
    ys = patch.control_points[:, 1]
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    tu = (point[0] - x0) / (x1 - x0)
    tv = (point[1] - y0) / (y1 - y0)
    tol = 1e-9
    if not (-tol <= tu <= 1 + tol and -tol <= tv <= 1 + tol):
        raise DomainError(f"probe point {tuple(point)} lies outside the patch")
    return float(np.clip(tu, 0.0, 1.0)), float(np.clip(tv, 0.0, 1.0))


def displacement_at(patch: Patch, u, theta):
    """Displacement at parametric points ``theta`` (shape ``(n, 2)``)."""
    U = np.asarray(u, dtype=float).reshape(-1, 3)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    out = np.empty((len(theta), 3))
    for k, th in enumerate(theta):
        elem = patch.locate(th)
        cps, N, _ = basis_eval(patch, elem, th)
        out[k] = N @ U[cps]
    return out


def probe_displacement(patch: Patch, u, name, point, component):
    """Interpolated displacement component (0, 1, 2) at a flat-patch point."""
    theta = _parametric(patch, point)
    value = displacement_at(patch, u, theta)[0, component]
    X = patch.evaluate(theta)
    return Probe(name, "u" + "xyz"[component], tuple(map(float, X)), float(value), "m")


def probe_stress(rec: FieldRecord, name, point, quantity="sigma1"):
    """Stress at the quadrature point nearest to ``point``."""
    if len(rec) == 0:
        raise DomainError("no quadrature data to probe")
    d = np.linalg.norm(rec.X[:, :2] - np.asarray(point, dtype=float)[:2], axis=1)
    k = int(np.argmin(d))
    value = getattr(rec, quantity)[k]
    return Probe(name, quantity, tuple(map(float, rec.X[k])), float(value), "Pa", float(d[k]))
